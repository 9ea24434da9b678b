from .checks import (
    BoundCheck,
    ColinearityCheckConfig,
    ColinearityResult,
    colinearity_bound,
    colinearity_condition,
    corollary_step_scaling,
    match_distance_profile,
    numerical_minimizer,
    sample_ball,
    thm1_direction_check,
    thm2_bound_check,
    thm2_hold_rate,
)
from .reports import TheoryCheck, run_theory_check

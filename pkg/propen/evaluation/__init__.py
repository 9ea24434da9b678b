from .metrics import (
    EvalReport,
    average_improvement,
    evaluate_candidates,
    evaluate_trajectories,
    novelty,
    per_step_metrics,
    ratio_of_improvement,
    uniqueness,
)

from .design_optimizer import DesignOptimizer
from .explicit_guidance import ExplicitGuidanceModel, GuidanceConfig, train_explicit
from .propen import IoMode, PropEn, PropEnVariant, TabularPropEn, train_propen
from .trajectory import (
    OptimizeConfig,
    Trajectory,
    iterate_design,
    trajectories_to_csv,
    trajectories_to_dataframe,
)
from .utils import Standardizer, tabular_minimizer

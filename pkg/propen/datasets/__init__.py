from .design_set import DesignSet
from .analytic_properties import (
    AnalyticProperty,
    LinearProperty,
    QuadraticProperty,
    analytic_property,
)
from .kde import KdeModel, kde_log_density
from .naca import (
    NacaParams,
    SyntheticAirfoilProperty,
    generate_naca,
    naca_coordinates,
    random_airfoils,
    recover_naca_params,
    synthetic_lift_to_drag,
)
from .toy_datasets import Embedding, ToyConfig, ToyFamily, embed, generate_toy

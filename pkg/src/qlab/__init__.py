"""qlab: a numerical laboratory for sup-norm scaling of quasimodes of
two-dimensional semiclassical Schrodinger operators -h^2 Lap_g + V."""

__version__ = "0.1.0"

from .field import (
    BumpProfile,
    Grid1D,
    Grid2D,
    GridFunction,
    MetricField,
    PotentialField,
    default_profiles,
    inner_product,
    l2_norm,
    sample_function,
    sup_norm,
    weighted_norm,
)
from .operator import SemiclassicalOperator, FourierMultiplier, assemble

__all__ = [
    "BumpProfile",
    "Grid1D",
    "Grid2D",
    "GridFunction",
    "MetricField",
    "PotentialField",
    "SemiclassicalOperator",
    "FourierMultiplier",
    "assemble",
    "default_profiles",
    "inner_product",
    "l2_norm",
    "sample_function",
    "sup_norm",
    "weighted_norm",
    "__version__",
]

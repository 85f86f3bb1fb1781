"""Constructive matroid-colorful KKM: covers, triangulations, elimination and applications."""

from .apps import (Allocation, CakeInstance, CaratheodoryInstance, CaratheodoryResult, HypothesisError,
                   cake_solve, caratheodory_solve, gale_solve)
from .cover import CakeCover, CaratheodoryCover, Density, Halfspace, NoLabel, Region, TableCover, kkm_vertex, \
    validate_mkomiya
from .geometry import Polytope, conv_contains, explicit, regular_polygon, simplex
from .matroid import Matroid, linear, partition, truncate, uniform
from .solver import Witness, good_triangulation, solve, sperner_shapley_face, verify_witness

__all__ = [
    "Allocation", "CakeCover", "CakeInstance", "CaratheodoryCover", "CaratheodoryInstance", "CaratheodoryResult",
    "Density", "Halfspace", "HypothesisError", "Matroid", "NoLabel", "Polytope", "Region", "TableCover", "Witness",
    "cake_solve", "caratheodory_solve", "conv_contains", "explicit", "gale_solve", "good_triangulation",
    "kkm_vertex", "linear", "partition", "regular_polygon", "simplex", "solve", "sperner_shapley_face", "truncate",
    "uniform", "validate_mkomiya", "verify_witness",
]
__version__ = "0.1.0"

"""Exact Harder-Narasimhan polygons for Hodge-Tate modules over valued fields."""

from .descent import hn_nonrenormalized, hn_renormalized, run_descent
from .errors import DomainError, HNError, InvalidInputError, ResourceBoundError, UndefinedSlopeError
from .htmod import IntegralHTModule, TorsionHTModule, hn_polygon_torsion
from .kernel import BACKEND
from .polygon import ConcavePolygon, HalfLinePolygon, SlopeMultiset
from .valring import FieldConfig

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConcavePolygon",
    "DomainError",
    "FieldConfig",
    "HNError",
    "HalfLinePolygon",
    "IntegralHTModule",
    "InvalidInputError",
    "ResourceBoundError",
    "SlopeMultiset",
    "TorsionHTModule",
    "UndefinedSlopeError",
    "hn_nonrenormalized",
    "hn_polygon_torsion",
    "hn_renormalized",
    "run_descent",
]

"""Exact Voronoi tessellation of the hyperboloid under the plane Cremona group."""

from .classes import PMClass, anti_canonical, cmp_dist, excess, intersect, is_boundary, self_intersect
from .config import Configuration
from .maps import CharMatrix, apply, compose, inverse, jonquieres, quadratic, symmetric

__all__ = [
    "CharMatrix",
    "Configuration",
    "PMClass",
    "anti_canonical",
    "apply",
    "cmp_dist",
    "compose",
    "excess",
    "intersect",
    "inverse",
    "is_boundary",
    "jonquieres",
    "quadratic",
    "self_intersect",
    "symmetric",
]

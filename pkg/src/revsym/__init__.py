"""Symmetric periodic orbits of reversible planar maps: symmetry lines,
fixed-point indices and finite checks of the symmetric fixed-point theorems."""
from .domains import InvariantDomain, Kind, LocusSegment, Point
from .revmaps import MapSpec, builtin
from .symmlines import SymmetricOrbit, SymmetryLine, find_symmetric_periodic_points

__version__ = "0.1.0"

__all__ = [
    "InvariantDomain", "Kind", "LocusSegment", "MapSpec", "Point", "SymmetricOrbit",
    "SymmetryLine", "builtin", "find_symmetric_periodic_points",
]

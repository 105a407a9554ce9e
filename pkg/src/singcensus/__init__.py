"""Closed-form and numerical counts of stable singularities of polynomial maps C^3 -> C^3."""

from .census import CensusReport, GermReport, check_germ, deformation_experiment, run_census
from .invariants import DegreeTriple, InvariantTable, compute_invariants, determinacy_gate
from .jets import Kind, PointClass, SingularitySystem, build_system, classify_point
from .polycore import MultiPoly, PolyMap, deform, leading_form, random_map
from .tracker import SolutionSet, SquareSystem, TrackSettings, solve

__all__ = [
    "CensusReport",
    "DegreeTriple",
    "GermReport",
    "InvariantTable",
    "Kind",
    "MultiPoly",
    "PointClass",
    "PolyMap",
    "SingularitySystem",
    "SolutionSet",
    "SquareSystem",
    "TrackSettings",
    "build_system",
    "check_germ",
    "classify_point",
    "compute_invariants",
    "deform",
    "deformation_experiment",
    "determinacy_gate",
    "leading_form",
    "random_map",
    "run_census",
    "solve",
]
__version__ = "0.1.0"

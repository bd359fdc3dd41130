"""Limit sets of algebraic flows in commutative complex Lie groups C^n / Gamma."""

from .curve1d import LaurentCurve, limit_set, stratify
from .lattice import ClosedSubgroup, Lattice, subgroup_closure
from .linalg import QI
from .multiflow import MultiLaurentMap, enumerate_complete_sequences, good_disc, leading_powers

__all__ = [
    "ClosedSubgroup",
    "LaurentCurve",
    "Lattice",
    "MultiLaurentMap",
    "QI",
    "enumerate_complete_sequences",
    "good_disc",
    "leading_powers",
    "limit_set",
    "stratify",
    "subgroup_closure",
]
__version__ = "0.1.0"

"""Heuristics for elliptic curves ordered by discriminant: counts, local laws, periods, vanishing model, lattice shapes."""

from .curve import (
    C4C6Model,
    CongruenceClass,
    Curve,
    InadmissibleError,
    admissible_classes,
    discriminant_of,
    from_a_invariants,
    is_minimal,
)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "C4C6Model",
    "CongruenceClass",
    "Curve",
    "InadmissibleError",
    "admissible_classes",
    "discriminant_of",
    "from_a_invariants",
    "is_minimal",
]

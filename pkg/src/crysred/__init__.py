"""Semi-simplified mod p reductions of two-dimensional crystalline
representations, computed from Hecke relations on the tree of GL2(Q_p)."""

from .engine import (
    ConstancyReport,
    InvalidInput,
    Reduction,
    ResourceLimit,
    Undetermined,
    compute_reduction,
    constancy,
)

__all__ = [
    "ConstancyReport",
    "InvalidInput",
    "Reduction",
    "ResourceLimit",
    "Undetermined",
    "compute_reduction",
    "constancy",
]
__version__ = "0.1.0"

"""Certify infinite pro-p towers with depth-weighted Golod-Shafarevich series.

Submodules: ``series`` (exact series and cuts), ``magnus`` (Zassenhaus depth in
free pro-p groups), ``cft`` (rank bookkeeping), ``certified`` and ``rdbound``
(certified root-discriminant bounds), ``casebook`` (worked examples) and
``cli``.
"""

from .errors import (
    BranchError,
    ConsistencyError,
    DepthError,
    DomainError,
    FixtureError,
    GSTowerError,
    PreconditionError,
    ResourceError,
)
from .series import GSSeries, Verdict, VerdictKind, cut, cut_tail, find_witness, frobenius_schedule
from .magnus import DepthResult, FreeWord, NCSeries, depth, embed
from .certified import CertifiedReal

__version__ = "0.1.0"

__all__ = [
    "BranchError",
    "CertifiedReal",
    "ConsistencyError",
    "DepthError",
    "DepthResult",
    "DomainError",
    "FixtureError",
    "FreeWord",
    "GSSeries",
    "GSTowerError",
    "NCSeries",
    "PreconditionError",
    "ResourceError",
    "Verdict",
    "VerdictKind",
    "cut",
    "cut_tail",
    "depth",
    "embed",
    "find_witness",
    "frobenius_schedule",
]

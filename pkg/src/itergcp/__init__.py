"""Iterated generalized counting processes: exact laws, samplers and cross-checks."""

from .compound import JumpLaw
from .core import (BudgetExceeded, DomainError, IntegrationError, PmfVector, SeriesResult,
                   TruncationError)
from .gcp import GcpParams, RateSchedule
from .igcp import IgcpParams
from .mc import McConfig, McEstimate, run_mc
from .multivariate import MvIgcpParams
from .qiter import QIterParams
from .timechange import StableParams, TcIgcpParams

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded", "DomainError", "GcpParams", "IgcpParams", "IntegrationError", "JumpLaw",
    "McConfig", "McEstimate", "MvIgcpParams", "PmfVector", "QIterParams", "RateSchedule",
    "SeriesResult", "StableParams", "TcIgcpParams", "TruncationError", "run_mc",
]

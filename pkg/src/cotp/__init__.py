"""Exact small-blocklength simulation of the conditional quantum one-time pad."""
from . import config, entropic, errors, pad, qcore, seeding, squash, typesys
from .entropic import cqmi, mutual_information, rate_report
from .qcore import DensityMatrix, Isometry, PureState, SystemLayout

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix", "Isometry", "PureState", "SystemLayout", "config", "cqmi", "entropic",
    "errors", "mutual_information", "pad", "qcore", "rate_report", "seeding", "squash",
    "typesys", "__version__",
]

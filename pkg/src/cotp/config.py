"""Capacity limits for dense simulation.

The density-operator cap can be overridden with the ``COTP_MAX_DIM``
environment variable; it is read on every check so tests and the CLI can
change it at runtime.
"""
import os

from .errors import CapacityExceeded

DEFAULT_MAX_DENSITY_DIM = 8192
DEFAULT_MAX_PURE_DIM = 10**6
ENUMERATION_CAP = 10**6


def max_density_dim() -> int:
    value = os.environ.get("COTP_MAX_DIM")
    if value:
        return int(value)
    return DEFAULT_MAX_DENSITY_DIM


def max_pure_dim() -> int:
    return max(DEFAULT_MAX_PURE_DIM, max_density_dim())


def check_density_dim(dim: int) -> None:
    cap = max_density_dim()
    if dim > cap:
        raise CapacityExceeded(f"density operator of dimension {dim} exceeds cap {cap}")


def check_pure_dim(dim: int) -> None:
    cap = max_pure_dim()
    if dim > cap:
        raise CapacityExceeded(f"state vector of dimension {dim} exceeds cap {cap}")

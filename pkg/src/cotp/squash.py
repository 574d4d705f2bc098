"""Upper bounds on ``inf_E I(A;B|E)`` over extensions of a bipartite state.

Every extension of ``rho_AB`` arises from a channel on the purifying system
``E'`` of a fixed purification.  Channels are realised as isometries
``E' -> E G`` followed by discarding ``G``; the isometry is the first
columns of ``exp(i H(theta))`` for a Hermitian generator ``H`` whose real
and imaginary entries are the parameters ``theta``.  No factor 1/2 is
applied to the objective.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize as _scipy_minimize

from . import config
from .entropic import cqmi
from .errors import ConfigError
from .qcore import EIG_CUTOFF, DensityMatrix, PureState, SystemLayout, partial_trace

METHODS = ("gradient", "direct")
# I(A;B|E) >= 0, so anything this small is a global minimum
ZERO_FLOOR = 1e-12


@dataclass(frozen=True)
class ExtensionParameterization:
    rho_ab: DensityMatrix
    psi: np.ndarray         # purification, shape (dA, dB, dE')
    dim_e: int
    dim_g: int

    @property
    def dim_eprime(self) -> int:
        return self.psi.shape[2]

    @property
    def n_params(self) -> int:
        return (self.dim_e * self.dim_g) ** 2

    @property
    def columns(self) -> np.ndarray:
        # |e'> -> |e'>_E |0>_G at theta = 0, so E holds the whole purification;
        # when E is too small for that, the first basis vectors of E G are used
        if self.dim_e >= self.dim_eprime:
            return np.arange(self.dim_eprime) * self.dim_g
        return np.arange(self.dim_eprime)

    def generator(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        n = self.dim_e * self.dim_g
        if theta.shape != (n * n,):
            raise ConfigError(f"theta must have {n * n} entries, got {theta.shape}")
        h = np.zeros((n, n), dtype=complex)
        iu = np.triu_indices(n, 1)
        m = len(iu[0])
        h[np.diag_indices(n)] = theta[:n]
        h[iu] = theta[n:n + m] + 1j * theta[n + m:]
        return h + np.triu(h, 1).conj().T

    def isometry(self, theta) -> np.ndarray:
        return expm(1j * self.generator(theta))[:, self.columns]

    def extension(self, theta) -> DensityMatrix:
        da, db, _ = self.psi.shape
        v = self.isometry(theta)
        out = np.einsum("abe,xe->abx", self.psi, v).reshape(da, db, self.dim_e, self.dim_g)
        state = PureState(SystemLayout.of(("A", da), ("B", db), ("E", self.dim_e),
                                          ("G", self.dim_g)), out.reshape(-1), check=False)
        return partial_trace(state, ("A", "B", "E"))


def parameterize(rho_ab: DensityMatrix, dim_e: int | None = None,
                 dim_g: int | None = None) -> ExtensionParameterization:
    """Purify ``rho_AB`` on its support; default ``dim E = dim G = rank``."""
    if len(rho_ab.layout) != 2:
        raise ConfigError("rho_AB must have exactly two factors")
    da, db = rho_ab.layout.dims
    lam, vecs = np.linalg.eigh(rho_ab.data)
    keep = lam > EIG_CUTOFF
    r = int(keep.sum())
    psi = (vecs[:, keep] * np.sqrt(lam[keep])[None, :]).reshape(da, db, r)
    dim_e = r if dim_e is None else int(dim_e)
    dim_g = r if dim_g is None else int(dim_g)
    if dim_e * dim_g < r:
        raise ConfigError(f"E (x) G of dimension {dim_e * dim_g} cannot hold a rank-{r} purification")
    if dim_e < 1 or dim_g < 1:
        raise ConfigError("extension dimensions must be positive")
    config.check_density_dim(da * db * dim_e)
    rho_ab = rho_ab.relabel(dict(zip(rho_ab.layout.labels, ("A", "B"))))
    return ExtensionParameterization(rho_ab, psi, dim_e, dim_g)


def extension_state(rho_ab: DensityMatrix, theta, dims=None) -> DensityMatrix:
    """``rho_ABE(theta)``; ``Tr_E`` of the result is ``rho_AB`` for every ``theta``."""
    dims = dims or (None, None)
    return parameterize(rho_ab, *dims).extension(theta)


def objective(param: ExtensionParameterization, theta) -> float:
    return cqmi(param.extension(theta), "A", "B", "E")


def numerical_gradient(param: ExtensionParameterization, theta, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of the objective."""
    theta = np.asarray(theta, dtype=float)
    grad = np.empty_like(theta)
    for i in range(theta.size):
        step = np.zeros_like(theta)
        step[i] = h
        grad[i] = (objective(param, theta + step) - objective(param, theta - step)) / (2 * h)
    return grad


@dataclass
class OptimizationResult:
    best_value: float
    best_theta: np.ndarray
    trajectory: list = field(default_factory=list)   # (restart, iteration, value, best so far)
    restarts: int = 0

    @property
    def best_so_far(self) -> list:
        return [row[3] for row in self.trajectory]


class _Stop(Exception):
    pass


class _Tracker:
    """Best-so-far bookkeeping and the plateau stopping rule."""

    def __init__(self, restart, best, patience, tol, record):
        self.restart = restart
        self.best = best
        self.patience = patience
        self.tol = tol
        self.record = record
        self.it = 0
        self.history = []

    def update(self, value: float):
        self.it += 1
        self.best = min(self.best, value)
        self.history.append(self.best)
        self.record((self.restart, self.it, float(value), float(self.best)))
        if self.best <= ZERO_FLOOR:
            raise _Stop
        if len(self.history) > self.patience and \
                self.history[-self.patience - 1] - self.best < self.tol:
            raise _Stop


def _direct_search(param, theta0, tracker, iters):
    f = lambda th: objective(param, th)
    best = {"theta": np.array(theta0), "value": f(theta0)}

    def cb(xk):
        val = f(xk)
        if val < best["value"]:
            best["theta"], best["value"] = np.array(xk), val
        tracker.update(val)

    try:
        _scipy_minimize(f, theta0, method="Nelder-Mead", callback=cb,
                        options={"maxiter": iters, "adaptive": True, "xatol": 1e-10,
                                 "fatol": 1e-12})
    except _Stop:
        pass
    return best["theta"], best["value"]


def _gradient_descent(param, theta0, tracker, iters, step0=1.0):
    theta = np.array(theta0, dtype=float)
    value = objective(param, theta)
    step = step0
    try:
        for _ in range(iters):
            grad = numerical_gradient(param, theta)
            gnorm2 = float(grad @ grad)
            if gnorm2 < 1e-24:
                tracker.update(value)
                break
            # Armijo backtracking
            while step > 1e-12:
                cand = theta - step * grad
                cval = objective(param, cand)
                if cval <= value - 1e-4 * step * gnorm2:
                    theta, value = cand, cval
                    step *= 2.0
                    break
                step *= 0.5
            tracker.update(value)
            if step <= 1e-12:
                break
    except _Stop:
        pass
    return theta, value


def minimize(rho_ab: DensityMatrix, dims=None, method: str = "gradient", restarts: int = 4,
             iters: int = 500, seed: int = 0, patience: int = 50, tol: float = 1e-7,
             init_scale: float = 1.0) -> OptimizationResult:
    """Search extensions for the smallest ``I(A;B|E)``.

    Restart 0 starts from ``theta = 0`` (``E`` holds the purification);
    later restarts start from Gaussian ``theta`` drawn from ``seed``.  A
    restart stops when its best value improves by less than ``tol`` over
    ``patience`` iterations, or after ``iters`` iterations.  The search
    ends early once the value is zero to ``ZERO_FLOOR``.
    """
    if method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}")
    if restarts < 1 or iters < 1:
        raise ConfigError("restarts and iters must be positive")
    dims = dims or (None, None)
    param = parameterize(rho_ab, *dims)
    rng = np.random.default_rng(seed)
    starts = [np.zeros(param.n_params)]
    starts += [init_scale * rng.standard_normal(param.n_params) for _ in range(restarts - 1)]
    result = OptimizationResult(math.inf, starts[0], [], restarts)
    run = _direct_search if method == "direct" else _gradient_descent
    for r, theta0 in enumerate(starts):
        if result.best_value <= ZERO_FLOOR:
            break
        v0 = objective(param, theta0)
        if v0 < result.best_value:
            result.best_value, result.best_theta = v0, theta0
        tracker = _Tracker(r, result.best_value, patience, tol, result.trajectory.append)
        tracker.record((r, 0, float(v0), float(result.best_value)))
        if param.n_params > 1 and v0 > ZERO_FLOOR:
            theta, value = run(param, theta0, tracker, iters)
            if value < result.best_value:
                result.best_value, result.best_theta = value, theta
    return result

"""Pretty-good measurement decoder."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..qcore import EIG_CUTOFF, DensityMatrix

SUPPORT_RTOL = 1e-12


def _pinv_sqrt(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``S^{-1/2}`` on the support of ``S`` and the support projector."""
    lam, vecs = np.linalg.eigh(s)
    cut = max(EIG_CUTOFF, SUPPORT_RTOL * max(lam.max(initial=0.0), 0.0))
    keep = lam > cut
    v = vecs[:, keep]
    inv = (v / np.sqrt(lam[keep])[None, :]) @ v.conj().T
    return inv, v @ v.conj().T


@dataclass(frozen=True)
class PGMResult:
    povm: list            # Lambda_i, one per input state
    completion: np.ndarray  # I - Pi_supp(S)
    success: np.ndarray


def _data(x):
    return x.data if isinstance(x, DensityMatrix) else np.asarray(x, dtype=complex)


def pgm_decoder(states, projector=None) -> PGMResult:
    """``Lambda_i = S^{-1/2} w_i S^{-1/2}`` with ``S = sum_i w_i``.

    With ``projector`` each ``w_i`` is first sandwiched as ``Pi w_i Pi``;
    success probabilities are always evaluated on the unsandwiched states.
    """
    raw = [_data(s) for s in states]
    if projector is not None:
        p = _data(projector)
        used = [p @ w @ p for w in raw]
    else:
        used = raw
    s = sum(used)
    inv, supp = _pinv_sqrt(s)
    povm = [inv @ w @ inv for w in used]
    completion = np.eye(s.shape[0]) - supp
    success = np.array([np.real(np.sum(lam * w.T)) for lam, w in zip(povm, raw)])
    return PGMResult(povm, completion, np.clip(success, 0.0, 1.0))


def pgm_success_monomial(rho: np.ndarray, perms: np.ndarray, phases: np.ndarray, rest: int,
                         projector: np.ndarray | None = None) -> np.ndarray:
    """Success probabilities of the PGM on ``w_i = U_i rho U_i^dagger``.

    Streams over the states twice (once for ``S``, once for the traces) so
    only a handful of ``D x D`` arrays are alive at any time.  A sandwiching
    projector enters only through ``S -> Pi S Pi``: ``S^{-1/2}`` then lives
    inside the range of ``Pi``, so ``Tr(S^{-1/2} Pi w Pi S^{-1/2} w)`` equals
    ``Tr(S^{-1/2} w S^{-1/2} w)`` with the sandwiched ``S``.
    """
    s = np.zeros_like(rho)
    kernels.accumulate(s, rho, perms, phases, rest)
    if projector is not None:
        s = projector @ s @ projector
    inv, _ = _pinv_sqrt(s)
    out = np.empty(len(perms))
    for i in range(len(perms)):
        w = kernels.conjugate(rho, perms[i], phases[i], rest)
        y = inv @ w
        out[i] = np.real(np.sum(y * y.T))
    return np.clip(out, 0.0, 1.0)

"""Pure-numpy versions of the monomial-conjugation kernels."""
import numpy as np


def _full_index(perm, phase, rest):
    idx = (perm[:, None] * rest + np.arange(rest)[None, :]).reshape(-1)
    ph = np.repeat(phase, rest)
    return idx, ph


def conjugate(rho, perm, phase, rest):
    """``U rho U^dagger`` for ``U = P diag(phase)`` acting on the leading factor.

    ``U|a> = phase[a] |perm[a]>`` on the first factor, identity on the
    trailing ``rest``-dimensional factor.
    """
    idx, ph = _full_index(np.asarray(perm), np.asarray(phase), rest)
    out = np.empty_like(rho)
    out[np.ix_(idx, idx)] = ph[:, None] * rho * ph.conj()[None, :]
    return out


def accumulate(out, rho, perms, phases, rest):
    """Add ``sum_k U_k rho U_k^dagger`` into ``out`` in place."""
    for perm, phase in zip(perms, phases):
        idx, ph = _full_index(perm, phase, rest)
        out[np.ix_(idx, idx)] += ph[:, None] * rho * ph.conj()[None, :]
    return out

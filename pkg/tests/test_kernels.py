import importlib

import numpy as np
import pytest

from cotp import kernels
from cotp.kernels import _fallback

try:
    _compiled = importlib.import_module("cotp.kernels._monomial")
except ImportError:
    _compiled = None

needs_compiled = pytest.mark.skipif(_compiled is None, reason="extension not built")


def random_case(dim, rest, count, seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim * rest,) * 2) + 1j * rng.normal(size=(dim * rest,) * 2)
    rho = g @ g.conj().T
    perms = np.array([rng.permutation(dim) for _ in range(count)], dtype=np.int64)
    phases = np.exp(2j * np.pi * rng.random((count, dim)))
    return rho, perms, phases


def explicit(rho, perm, phase, rest):
    dim = len(perm)
    u = np.zeros((dim, dim), dtype=complex)
    u[perm, np.arange(dim)] = phase
    big = np.kron(u, np.eye(rest))
    return big @ rho @ big.conj().T


@pytest.mark.parametrize("dim, rest", [(4, 1), (8, 4), (5, 3)])
def test_fallback_matches_explicit(dim, rest):
    rho, perms, phases = random_case(dim, rest, 3, dim * rest)
    for p, ph in zip(perms, phases):
        got = _fallback.conjugate(rho, p, ph, rest)
        assert np.max(np.abs(got - explicit(rho, p, ph, rest))) < 1e-12


@needs_compiled
@pytest.mark.parametrize("dim, rest", [(4, 1), (8, 4), (5, 3)])
def test_backends_agree(dim, rest):
    rho, perms, phases = random_case(dim, rest, 6, 100 + dim)
    for p, ph in zip(perms, phases):
        assert np.max(np.abs(_compiled.conjugate(rho, p, ph, rest)
                             - _fallback.conjugate(rho, p, ph, rest))) < 1e-12
    a = np.zeros_like(rho)
    b = np.zeros_like(rho)
    _compiled.accumulate(a, rho, perms, phases, rest)
    _fallback.accumulate(b, rho, perms, phases, rest)
    assert np.max(np.abs(a - b)) < 1e-11


def test_accumulate_is_sum():
    rho, perms, phases = random_case(6, 2, 4, 7)
    out = np.zeros_like(rho)
    kernels.accumulate(out, rho, perms, phases, 2)
    want = sum(explicit(rho, p, ph, 2) for p, ph in zip(perms, phases))
    assert np.max(np.abs(out - want)) < 1e-11


def test_backend_flag():
    assert kernels.BACKEND in ("compiled", "python")

"""Encoding unitaries ``U(s) = (+)_t (-1)^{b_t} X(x_t) Z(z_t)`` and random codes.

In the spectral frame of ``rho_A`` every ``U(s)`` is a monomial matrix (a
permutation with phases), which is how it is stored and applied:
``U|a> = phase[a] |perm[a]>``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .. import config
from ..errors import ConfigError, EnumerationCapExceeded
from ..qcore import DensityMatrix, SystemLayout, copy_label
from ..typesys import SpectralAlphabet, TypeDecomposition


def generalized_pauli(d: int, x: int, z: int) -> np.ndarray:
    """``X(x) Z(z)`` on ``d`` dimensions: ``|j> -> exp(2 pi i j z / d) |j + x mod d>``."""
    if not (0 <= x < d and 0 <= z < d):
        raise ConfigError(f"shift {x} and phase {z} must lie in [0, {d})")
    j = np.arange(d)
    out = np.zeros((d, d), dtype=complex)
    out[(j + x) % d, j] = np.exp(2j * np.pi * j * z / d)
    return out


@dataclass(frozen=True)
class EncodingVector:
    """One ``(b_t, x_t, z_t)`` triple per type class."""

    b: tuple[int, ...]
    x: tuple[int, ...]
    z: tuple[int, ...]

    @classmethod
    def zero(cls, num_types: int) -> "EncodingVector":
        return cls((0,) * num_types, (0,) * num_types, (0,) * num_types)

    def check(self, dims) -> None:
        if not (len(self.b) == len(self.x) == len(self.z) == len(dims)):
            raise ConfigError(f"encoding vector has {len(self.b)} triples, "
                              f"decomposition has {len(dims)} types")
        for b, x, z, d in zip(self.b, self.x, self.z, dims):
            if b not in (0, 1) or not (0 <= x < d) or not (0 <= z < d):
                raise ConfigError(f"triple {(b, x, z)} out of range for d_t={d}")


def decompose_marginal(rho_a: DensityMatrix, n: int) -> TypeDecomposition:
    """Type decomposition of the canonical purification of ``rho_A``.

    The reference vector of letter ``x`` is ``|letters[x]>_R``, so the
    spectral basis is taken straight from ``rho_A`` without re-diagonalising.
    """
    alphabet = SpectralAlphabet.of(rho_a)
    d = alphabet.dim
    ref = np.zeros((d, alphabet.size), dtype=complex)
    ref[alphabet.letters, np.arange(alphabet.size)] = 1.0
    label = rho_a.layout.labels[0] if len(rho_a.layout) == 1 else "A"
    layout = SystemLayout(((copy_label(label, n), d ** n), (copy_label("R", n), d ** n)))
    return TypeDecomposition(alphabet, ref, n, layout)


class Encoder:
    """Turns encoding vectors into monomial form on a (possibly compressed) ``A^n``.

    ``blocks[t]`` lists the frame indices spanned by type ``t`` in
    lexicographic sequence order; indices outside every block are left
    untouched by all encoders.
    """

    def __init__(self, dim: int, blocks: list[np.ndarray]):
        self.dim = int(dim)
        self.blocks = [np.asarray(b, dtype=np.int64) for b in blocks]
        self.type_dims = [len(b) for b in self.blocks]

    @classmethod
    def from_decomposition(cls, decomp: TypeDecomposition) -> "Encoder":
        return cls(decomp.alphabet.dim ** decomp.n, decomp.indices)

    @property
    def num_types(self) -> int:
        return len(self.blocks)

    @property
    def count(self) -> int:
        """Number of distinct encoding vectors, ``prod_t 2 d_t^2``."""
        return math.prod(2 * d * d for d in self.type_dims)

    def monomials(self, b, x, z) -> tuple[np.ndarray, np.ndarray]:
        """Batched monomial form; ``b, x, z`` have shape ``(N, num_types)``."""
        b = np.atleast_2d(np.asarray(b, dtype=np.int64))
        x = np.atleast_2d(np.asarray(x, dtype=np.int64))
        z = np.atleast_2d(np.asarray(z, dtype=np.int64))
        num = b.shape[0]
        perm = np.tile(np.arange(self.dim, dtype=np.int64), (num, 1))
        phase = np.ones((num, self.dim), dtype=complex)
        for t, idx in enumerate(self.blocks):
            d = len(idx)
            pos = np.arange(d)
            target = (pos[None, :] + x[:, t:t + 1]) % d
            perm[:, idx] = idx[target]
            sign = 1.0 - 2.0 * b[:, t:t + 1]
            phase[:, idx] = sign * np.exp(2j * np.pi * pos[None, :] * z[:, t:t + 1] / d)
        return perm, phase

    def monomial(self, s: EncodingVector) -> tuple[np.ndarray, np.ndarray]:
        s.check(self.type_dims)
        perm, phase = self.monomials([s.b], [s.x], [s.z])
        return perm[0], phase[0]

    def frame_matrix(self, s: EncodingVector) -> np.ndarray:
        perm, phase = self.monomial(s)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        out[perm, np.arange(self.dim)] = phase
        return out


def encoding_unitary(s: EncodingVector, decomp: TypeDecomposition) -> np.ndarray:
    """``U(s)`` on ``A^n`` in the original basis of ``A``."""
    enc = Encoder.from_decomposition(decomp)
    w = decomp.frame_unitary()
    return w @ enc.frame_matrix(s) @ w.conj().T


def count_all_s(decomp_or_encoder) -> int:
    enc = _encoder(decomp_or_encoder)
    return enc.count


def _encoder(obj) -> Encoder:
    return obj if isinstance(obj, Encoder) else Encoder.from_decomposition(obj)


def enumerate_all_s(decomp_or_encoder, cap: int = config.ENUMERATION_CAP):
    """Every encoding vector, in lexicographic order of the per-type triples."""
    enc = _encoder(decomp_or_encoder)
    if enc.count > cap:
        raise EnumerationCapExceeded(f"{enc.count} encoding vectors exceed the cap {cap}; "
                                     "sample codes instead")
    per_type = [list(itertools.product((0, 1), range(d), range(d))) for d in enc.type_dims]
    for combo in itertools.product(*per_type):
        yield EncodingVector(tuple(c[0] for c in combo), tuple(c[1] for c in combo),
                             tuple(c[2] for c in combo))


def all_s_arrays(enc: Encoder, cap: int = config.ENUMERATION_CAP):
    """``(b, x, z)`` arrays of shape ``(count, num_types)`` in enumeration order."""
    rows = list(enumerate_all_s(enc, cap))
    return (np.array([r.b for r in rows], dtype=np.int64).reshape(len(rows), enc.num_types),
            np.array([r.x for r in rows], dtype=np.int64).reshape(len(rows), enc.num_types),
            np.array([r.z for r in rows], dtype=np.int64).reshape(len(rows), enc.num_types))


@dataclass(frozen=True)
class Code:
    """Encoding vectors ``s(m, k)`` stored as arrays of shape ``(M, K, T)``.

    For several keys ``k_1 .. k_p`` the key axis is the row-major flattening
    of ``key_shape``.
    """

    b: np.ndarray
    x: np.ndarray
    z: np.ndarray
    key_shape: tuple[int, ...]
    seed: int | None = None

    @property
    def M(self) -> int:
        return self.b.shape[0]

    @property
    def K(self) -> int:
        return self.b.shape[1]

    def entry(self, m: int, k) -> EncodingVector:
        if not isinstance(k, (int, np.integer)):
            k = int(np.ravel_multi_index(tuple(k), self.key_shape))
        return EncodingVector(tuple(int(v) for v in self.b[m, k]),
                              tuple(int(v) for v in self.x[m, k]),
                              tuple(int(v) for v in self.z[m, k]))

    def flat(self):
        t = self.b.shape[2]
        return (self.b.reshape(-1, t), self.x.reshape(-1, t), self.z.reshape(-1, t))

    def rows(self, messages) -> "Code":
        messages = list(messages)
        return Code(self.b[messages], self.x[messages], self.z[messages], self.key_shape,
                    self.seed)


def build_code(M: int, key_shape, decomp_or_encoder, rng, seed=None) -> Code:
    """I.i.d. uniform encoding vectors for every ``(m, k)``."""
    enc = _encoder(decomp_or_encoder)
    key_shape = tuple(int(k) for k in np.atleast_1d(key_shape))
    if M < 1 or any(k < 1 for k in key_shape):
        raise ConfigError("M and every key count must be at least 1")
    K = math.prod(key_shape)
    dims = np.array(enc.type_dims, dtype=np.int64)
    t = enc.num_types
    # fixed draw order (b, then x, then z) keeps codes reproducible per seed
    b = rng.integers(0, 2, size=(M, K, t))
    x = rng.integers(0, dims, size=(M, K, t))
    z = rng.integers(0, dims, size=(M, K, t))
    return Code(b, x, z, key_shape, seed)


def full_key_code(M: int, decomp_or_encoder) -> Code:
    """Every message row holds all encoding vectors, one per key."""
    enc = _encoder(decomp_or_encoder)
    b, x, z = all_s_arrays(enc)
    rep = lambda a: np.repeat(a[None], M, axis=0)
    return Code(rep(b), rep(x), rep(z), (b.shape[0],), None)

"""Type classes of n-letter sequences and the subspaces they label.

Letters are indices into the spectral basis of a reduced state, taken in the
ascending-eigenvalue order returned by ``numpy.linalg.eigh``.  Letters with
zero probability are removed before any enumeration.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import config
from .entropic import entropy_of_spectrum
from .errors import CapacityExceeded, ConfigError, DegenerateProjection
from .qcore import (EIG_CUTOFF, DensityMatrix, PureState, SystemLayout, as_labels,
                    copy_label, merge, permute)


def multinomial(counts) -> int:
    n = sum(counts)
    out = math.factorial(n)
    for c in counts:
        out //= math.factorial(c)
    return out


@dataclass(frozen=True)
class TypeClass:
    """Sequences of length ``n`` with letter frequencies ``counts``."""

    counts: tuple[int, ...]
    sequences: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def dim(self) -> int:
        return len(self.sequences)

    def probability(self, p) -> float:
        """Total weight ``d_t * prod p(x)^counts(x)`` under i.i.d. ``p``."""
        return self.dim * float(np.prod([px ** c for px, c in zip(p, self.counts)]))


def _compositions(n: int, k: int):
    # counts vectors, first entry descending: the order in which types first
    # appear when sequences are listed lexicographically
    if k == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def enumerate_types(n: int, alphabet_size: int) -> list[TypeClass]:
    """All type classes, each with its sequences in lexicographic order."""
    if n < 1:
        raise ConfigError("n must be at least 1")
    if alphabet_size < 1:
        raise ConfigError("alphabet must have at least one letter")
    if alphabet_size ** n > config.max_pure_dim():
        raise CapacityExceeded(f"{alphabet_size}^{n} sequences exceed the capacity cap")
    buckets: dict[tuple[int, ...], list] = {}
    for seq in itertools.product(range(alphabet_size), repeat=n):
        counts = tuple(np.bincount(seq, minlength=alphabet_size).tolist())
        buckets.setdefault(counts, []).append(seq)
    return [TypeClass(c, tuple(buckets[c])) for c in _compositions(n, alphabet_size)]


def sequence_index(seq, letters, dim: int) -> int:
    """Position of ``|letters[x_1] ... letters[x_n]>`` in a ``dim^n`` space."""
    idx = 0
    for x in seq:
        idx = idx * dim + letters[x]
    return idx


@dataclass(frozen=True)
class SpectralAlphabet:
    """Non-zero part of the spectrum of a reduced state.

    ``basis[:, x]`` is the eigenvector for letter ``x`` (probability
    ``probs[x]``); ``full_basis`` holds every eigenvector, with letter ``x``
    sitting in column ``letters[x]``.
    """

    probs: np.ndarray
    letters: np.ndarray
    full_basis: np.ndarray

    @classmethod
    def of(cls, rho) -> "SpectralAlphabet":
        data = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)
        lam, vecs = np.linalg.eigh(data)
        keep = np.flatnonzero(lam > EIG_CUTOFF)
        return cls(probs=lam[keep] / lam[keep].sum(), letters=keep, full_basis=vecs)

    @property
    def basis(self) -> np.ndarray:
        return self.full_basis[:, self.letters]

    @property
    def dim(self) -> int:
        return self.full_basis.shape[0]

    @property
    def size(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class TypeComponent:
    type_class: TypeClass
    probability: float
    state: PureState


class TypeDecomposition:
    """``|phi>^{(x) n} = sum_t sqrt(p(t)) |Phi_t>`` for a bipartite pure ``phi``.

    The ``Phi_t`` are built lazily; the encoder only needs the index
    structure (``indices``) of each type subspace inside ``A^n``.
    """

    def __init__(self, alphabet: SpectralAlphabet, ref_vectors: np.ndarray, n: int,
                 layout: SystemLayout):
        self.alphabet = alphabet
        self.ref_vectors = ref_vectors      # column x: reference Schmidt vector of letter x
        self.n = n
        self.layout = layout                # (A^n, R^n)
        self.types = [t for t in enumerate_types(n, alphabet.size)]
        self.probabilities = np.array([t.probability(alphabet.probs) for t in self.types])

    @property
    def dims(self) -> list[int]:
        return [t.dim for t in self.types]

    @cached_property
    def indices(self) -> list[np.ndarray]:
        """Positions of each type's sequences in the spectral-frame ``A^n`` basis."""
        d = self.alphabet.dim
        return [np.array([sequence_index(s, self.alphabet.letters, d) for s in t.sequences],
                         dtype=np.int64) for t in self.types]

    def frame_unitary(self) -> np.ndarray:
        """``W^{(x) n}``: spectral-frame coordinates to the original ``A^n`` basis."""
        w = self.alphabet.full_basis
        out = w
        for _ in range(self.n - 1):
            out = np.kron(out, w)
        return out

    def _power(self, vecs: np.ndarray, seq) -> np.ndarray:
        out = vecs[:, seq[0]]
        for x in seq[1:]:
            out = np.kron(out, vecs[:, x])
        return out

    def type_state(self, i: int) -> PureState:
        t = self.types[i]
        a_vecs = self.alphabet.basis
        v = np.zeros(self.layout.dim, dtype=complex)
        for seq in t.sequences:
            v += np.kron(self._power(a_vecs, seq), self._power(self.ref_vectors, seq))
        return PureState(self.layout, v / math.sqrt(t.dim), check=False)

    @property
    def components(self) -> list[TypeComponent]:
        return [TypeComponent(t, float(p), self.type_state(i))
                for i, (t, p) in enumerate(zip(self.types, self.probabilities))]

    def reassemble(self) -> PureState:
        v = sum(math.sqrt(p) * self.type_state(i).data
                for i, p in enumerate(self.probabilities))
        return PureState(self.layout, v, check=False)


def type_decompose(phi: PureState, n: int, a_label: str | None = None) -> TypeDecomposition:
    """Type decomposition of ``phi^{(x) n}`` on the grouped layout ``(A^n, R^n)``.

    ``phi`` must have exactly two factors; ``a_label`` picks the one playing
    the role of ``A`` (default: the first).  The Schmidt basis is the spectral
    basis of ``rho_A``.
    """
    if len(phi.layout) != 2:
        raise ConfigError("type_decompose needs a bipartite pure state")
    a_label = a_label or phi.layout.labels[0]
    r_label = [lab for lab in phi.layout.labels if lab != a_label][0]
    phi = permute(phi, [a_label, r_label])
    da, dr = phi.layout.dims
    config.check_pure_dim((da * dr) ** n)
    mat = phi.data.reshape(da, dr)
    alphabet = SpectralAlphabet.of(mat @ mat.conj().T)
    sq = np.sqrt(alphabet.probs)
    ref = (alphabet.basis.conj().T @ mat).T / sq[None, :]
    layout = SystemLayout(((copy_label(a_label, n), da ** n), (copy_label(r_label, n), dr ** n)))
    return TypeDecomposition(alphabet, ref, n, layout)


def type_projector(t: TypeClass, basis) -> np.ndarray:
    """Projector onto ``span{|x_1 ... x_n>}`` for the sequences of ``t``.

    ``basis`` is either a :class:`SpectralAlphabet` or a matrix whose
    columns are the letter vectors.
    """
    if isinstance(basis, SpectralAlphabet):
        vecs = basis.basis
    else:
        vecs = np.asarray(basis, dtype=complex)
    cols = []
    for seq in t.sequences:
        v = vecs[:, seq[0]]
        for x in seq[1:]:
            v = np.kron(v, vecs[:, x])
        cols.append(v)
    b = np.array(cols).T
    return b @ b.conj().T


@dataclass(frozen=True)
class TypicalProjection:
    projector: np.ndarray
    probability: float
    rank: int
    typical_types: tuple[tuple[int, ...], ...]


def typical_types(probs, n: int, delta: float):
    """Type classes whose sequences are entropy-typical.

    All sequences of a type share the eigenvalue ``prod p^counts``, so
    typicality is decided per type.
    """
    if delta <= 0:
        raise ConfigError("delta must be positive")
    probs = np.asarray(probs, dtype=float)
    h = entropy_of_spectrum(probs)
    logp = np.log2(probs)
    out = []
    for t in enumerate_types(n, len(probs)):
        rate = -float(np.dot(t.counts, logp)) / n
        if abs(rate - h) <= delta + 1e-12:
            out.append(t)
    return out


def typical_projector(rho: DensityMatrix, n: int, delta: float) -> TypicalProjection:
    """Entropy-typical projector of ``rho^{(x) n}`` in the original basis."""
    alphabet = SpectralAlphabet.of(rho)
    config.check_density_dim(alphabet.dim ** n)
    types = typical_types(alphabet.probs, n, delta)
    d = alphabet.dim
    mask = np.zeros(d ** n)
    prob = 0.0
    for t in types:
        idx = [sequence_index(s, alphabet.letters, d) for s in t.sequences]
        mask[idx] = 1.0
        prob += t.probability(alphabet.probs)
    w = alphabet.full_basis
    wn = w
    for _ in range(n - 1):
        wn = np.kron(wn, w)
    proj = (wn * mask[None, :]) @ wn.conj().T
    return TypicalProjection(proj, prob, int(mask.sum()), tuple(t.counts for t in types))


@dataclass(frozen=True)
class CompressionResult:
    state: PureState
    fidelity: float
    qubit_count: float
    rank: int
    encoder: np.ndarray     # rank x dim(A^n): typical subspace -> register


def schumacher_compress(psi: PureState, rho_a: DensityMatrix, n: int, delta: float,
                        system=None, out_label: str = "A'") -> CompressionResult:
    """Project the ``A^n`` part of ``psi`` onto the typical subspace.

    ``system`` names the ``A^n`` factor (default: the grouped copy label of
    ``rho_a``'s factor), or lists the ``n`` single-copy factors (which must
    be adjacent).  The projected, renormalised state is
    re-expressed on a register ``out_label`` of dimension ``rank``.  The
    fidelity is ``||(Pi x I) psi||^2``, which equals ``Tr(Pi rho_A^{(x) n})``
    whenever the ``A^n`` marginal of ``psi`` is ``rho_A^{(x) n}``.
    """
    if system is None:
        system = copy_label(rho_a.layout.labels[0], n)
    labels = as_labels(system)
    if len(labels) > 1:
        psi = merge(psi, labels, "__An__")
        labels = ("__An__",)
    label = labels[0]
    d_an = psi.layout.dim_of(label)
    if d_an != rho_a.dim ** n:
        raise ConfigError(f"factor {label!r} has dimension {d_an}, expected {rho_a.dim}^{n}")
    proj = typical_projector(rho_a, n, delta)
    if proj.rank == 0:
        raise DegenerateProjection("typical subspace is empty")
    lam, vecs = np.linalg.eigh(proj.projector)
    enc = vecs[:, lam > 0.5].conj().T
    rest = [lab for lab in psi.layout.labels if lab != label]
    ordered = permute(psi, [label] + rest)
    mat = ordered.data.reshape(d_an, -1)
    compressed = enc @ mat
    fid = float(np.vdot(compressed, compressed).real)
    if fid <= EIG_CUTOFF:
        raise DegenerateProjection("state has no weight on the typical subspace")
    layout = SystemLayout(((out_label, proj.rank),) + ordered.layout.factors[1:])
    state = PureState(layout, compressed.reshape(-1) / math.sqrt(fid), check=False)
    return CompressionResult(state, fid, math.log2(proj.rank), proj.rank, enc)


def schumacher_decompress(result: CompressionResult, label: str, out_label: str = "A'") -> PureState:
    """Map the register back into ``A^n`` (the first factor of the result)."""
    st = result.state
    rest = [lab for lab in st.layout.labels if lab != out_label]
    ordered = permute(st, [out_label] + rest)
    mat = result.encoder.conj().T @ ordered.data.reshape(result.rank, -1)
    layout = SystemLayout(((label, result.encoder.shape[1]),) + ordered.layout.factors[1:])
    return PureState(layout, mat.reshape(-1), check=False)

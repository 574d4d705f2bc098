"""Encoded states, the adversary's view and the key-averaged state.

Everything is computed in the spectral frame of ``rho_A`` where the
encoders are monomial; results handed back to callers are rotated to the
original basis.  Trace distances and decoding probabilities are invariant
under the fixed frame rotation, so the protocol engine never rotates back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import config, kernels
from ..errors import ConfigError
from ..qcore import (DensityMatrix, Labels, SystemLayout, apply_local, as_labels, copy_label,
                     partial_trace, permute, tensor_power, trace_distance_arrays)
from ..typesys import TypeDecomposition, typical_types
from .encoding import Code, Encoder, decompose_marginal

FLAG = "flag"


class ProtocolFrame:
    """Spectral-frame view of ``rho^{(x) n}`` shared by encoder, decoder and adversary.

    With ``compress_delta`` set, ``A^n`` is replaced by the register ``A'``:
    the entropy-typical subspace of ``rho_A^{(x) n}`` plus one flag level
    that absorbs the atypical weight.  The encoders act on the typical
    blocks only, so compression commutes with encoding.
    """

    def __init__(self, rho: DensityMatrix, n: int, a_label: str = "A",
                 decomp: TypeDecomposition | None = None, compress_delta: float | None = None):
        if a_label not in rho.layout:
            raise ConfigError(f"state has no {a_label!r} factor")
        order = [a_label] + [lab for lab in rho.layout.labels if lab != a_label]
        self.rho = permute(rho, order)
        self.n = int(n)
        self.a_label = a_label
        self.others = tuple(order[1:])
        config.check_density_dim(self.rho.dim ** self.n)
        self.decomp = decomp or decompose_marginal(partial_trace(self.rho, a_label), self.n)
        w = self.decomp.alphabet.full_basis
        self.rho_frame = apply_local(self.rho, w.conj().T, a_label)
        self.d_an = w.shape[0] ** self.n
        blocks = self.decomp.indices
        self.compress_delta = compress_delta
        if compress_delta is None:
            self.keep = None
            self.a_dim = self.d_an
            self.encoder = Encoder(self.d_an, blocks)
            self.type_positions = list(range(len(blocks)))
        else:
            typ = {t.counts for t in typical_types(self.decomp.alphabet.probs, self.n,
                                                    compress_delta)}
            chosen = [i for i, t in enumerate(self.decomp.types) if t.counts in typ]
            keep = np.sort(np.concatenate([blocks[i] for i in chosen])) if chosen \
                else np.zeros(0, dtype=np.int64)
            self.keep = keep
            self.has_flag = len(keep) < self.d_an
            self.a_dim = len(keep) + int(self.has_flag)
            pos = np.full(self.d_an, -1, dtype=np.int64)
            pos[keep] = np.arange(len(keep))
            self.encoder = Encoder(self.a_dim, [pos[blocks[i]] for i in chosen])
            self.type_positions = chosen
        covered = np.zeros(self.a_dim, dtype=bool)
        for idx in self.encoder.blocks:
            covered[idx] = True
        self.fixed = np.flatnonzero(~covered)
        self._cache: dict = {}

    @property
    def a_register(self) -> str:
        return copy_label(self.a_label, self.n) if self.keep is None else "A'"

    def subset_key(self, labels: Labels | None) -> tuple[str, ...]:
        if labels is None:
            return self.others
        labels = tuple(lab for lab in as_labels(labels) if lab != self.a_label)
        for lab in labels:
            if lab not in self.others:
                raise ConfigError(f"unknown subset label {lab!r}; state has {self.others}")
        return tuple(lab for lab in self.others if lab in labels)

    def power(self, labels: Labels | None = None) -> tuple[np.ndarray, int, SystemLayout]:
        """Frame ``rho^{(x) n}`` reduced to ``A`` and ``labels``: (array, rest dim, layout)."""
        key = self.subset_key(labels)
        if key not in self._cache:
            reduced = partial_trace(self.rho_frame, (self.a_label,) + key)
            pw = tensor_power(reduced, self.n)
            rest = pw.dim // self.d_an
            arr = pw.data
            if self.keep is not None:
                arr = self.compress(arr, rest)
            layout = SystemLayout(((self.a_register, self.a_dim),) + pw.layout.factors[1:])
            self._cache[key] = (np.ascontiguousarray(arr), rest, layout)
        return self._cache[key]

    def compress(self, arr: np.ndarray, rest: int) -> np.ndarray:
        """Typical projection with the atypical weight moved to the flag level."""
        x = arr.reshape(self.d_an, rest, self.d_an, rest)
        out = np.zeros((self.a_dim, rest, self.a_dim, rest), dtype=complex)
        k = len(self.keep)
        out[:k, :, :k, :] = x[np.ix_(self.keep, range(rest), self.keep, range(rest))]
        if self.has_flag:
            drop = np.setdiff1d(np.arange(self.d_an), self.keep)
            out[k, :, k, :] = np.einsum("jajb->ab", x[np.ix_(drop, range(rest), drop, range(rest))])
        return out.reshape(self.a_dim * rest, self.a_dim * rest)

    def average(self, labels: Labels | None = None) -> np.ndarray:
        """Closed form of the average over all encoders, in the frame.

        Uniform ``(x_t, z_t)`` twirls each type block to ``pi_t (x) gamma_t``
        and the independent signs ``b_t`` remove coherences between blocks.
        """
        key = ("avg",) + self.subset_key(labels)
        if key not in self._cache:
            arr, rest, _ = self.power(labels)
            x = arr.reshape(self.a_dim, rest, self.a_dim, rest)
            out = np.zeros_like(x)
            for idx in self.encoder.blocks:
                gamma = np.einsum("jajb->ab", x[np.ix_(idx, range(rest), idx, range(rest))])
                out[idx, :, idx, :] = gamma / len(idx)
            f = self.fixed
            if len(f):
                out[np.ix_(f, range(rest), f, range(rest))] = \
                    x[np.ix_(f, range(rest), f, range(rest))]
            self._cache[key] = out.reshape(arr.shape)
        return self._cache[key]

    def to_original(self, arr: np.ndarray, rest: int) -> np.ndarray:
        """Rotate a frame operator on ``A^n (x) rest`` back to the input basis."""
        if self.keep is not None:
            return arr
        wn = self.decomp.frame_unitary()
        u = np.kron(wn, np.eye(rest))
        return u @ arr @ u.conj().T

    def monomials(self, code: Code) -> tuple[np.ndarray, np.ndarray]:
        """Monomial form of every ``s(m, k)``; rows in ``(m, k)`` row-major order."""
        b, x, z = code.flat()
        if self.keep is not None:
            b, x, z = (a[:, self.type_positions] for a in (b, x, z))
        if b.shape[1] != self.encoder.num_types:
            raise ConfigError(f"code has {b.shape[1]} types, decomposition has "
                              f"{self.encoder.num_types}")
        return self.encoder.monomials(b, x, z)

    def adversary(self, code: Code, m: int, labels: Labels | None = None) -> np.ndarray:
        """Key-averaged frame state of message ``m`` on ``A^n`` and ``labels``."""
        arr, rest, _ = self.power(labels)
        b, x, z = code.b[m], code.x[m], code.z[m]
        sub = Code(b[None], x[None], z[None], code.key_shape)
        perms, phases = self.monomials(sub)
        out = np.zeros_like(arr)
        kernels.accumulate(out, arr, perms, phases, rest)
        return out / code.K


def subset_name(labels, a_label: str = "A") -> str:
    return a_label + "".join(lab for lab in labels if lab != a_label)


def _frame(rho, n, a_label, decomp) -> ProtocolFrame:
    return ProtocolFrame(rho, n, a_label=a_label, decomp=decomp)


def _layout_for(frame: ProtocolFrame, labels) -> SystemLayout:
    return frame.power(labels)[2]


def code_states(code: Code, rho: DensityMatrix, n: int, a_label: str = "A",
                decomp: TypeDecomposition | None = None) -> list[list[DensityMatrix]]:
    """``omega^{m,k} = U(s(m,k)) rho^{(x) n} U(s(m,k))^dagger`` for every entry."""
    frame = _frame(rho, n, a_label, decomp)
    arr, rest, layout = frame.power()
    perms, phases = frame.monomials(code)
    out = []
    for m in range(code.M):
        row = []
        for k in range(code.K):
            i = m * code.K + k
            w = kernels.conjugate(arr, perms[i], phases[i], rest)
            row.append(DensityMatrix(layout, frame.to_original(w, rest), check=False))
        out.append(row)
    return out


def adversary_state(code: Code, m: int, rho: DensityMatrix, n: int, subset: Labels | None = None,
                    a_label: str = "A", decomp: TypeDecomposition | None = None) -> DensityMatrix:
    """``tau^m = (1/K) sum_k U(s(m,k)) rho^{(x) n} U^dagger`` on ``A^n`` and ``subset``.

    ``subset`` defaults to every non-``A`` factor of ``rho`` (pass ``rho_AE``
    for the eavesdropper of the basic protocol).
    """
    frame = _frame(rho, n, a_label, decomp)
    _, rest, layout = frame.power(subset)
    tau = frame.adversary(code, m, subset)
    return DensityMatrix(layout, frame.to_original(tau, rest), check=False)


def average_state(rho: DensityMatrix, n: int, decomp: TypeDecomposition | None = None,
                  a_label: str = "A", subset: Labels | None = None) -> DensityMatrix:
    """Average of ``U(s) rho^{(x) n} U(s)^dagger`` over uniform ``s``, in closed form."""
    frame = _frame(rho, n, a_label, decomp)
    _, rest, layout = frame.power(subset)
    return DensityMatrix(layout, frame.to_original(frame.average(subset), rest), check=False)


def security_metrics(code: Code, rho: DensityMatrix, n: int, subset: Labels | None = None,
                     a_label: str = "A", decomp: TypeDecomposition | None = None,
                     frame: ProtocolFrame | None = None) -> np.ndarray:
    """``delta_m = || tau^m - tau_bar ||_1 / 2`` on ``A^n`` plus ``subset``, per message."""
    frame = frame or _frame(rho, n, a_label, decomp)
    avg = frame.average(subset)
    return np.array([trace_distance_arrays(frame.adversary(code, m, subset), avg)
                     for m in range(code.M)])


@dataclass(frozen=True)
class CoveringBound:
    value: float
    raw: float
    distance: float     # trace-norm radius delta + 4 sqrt(delta) + 24 delta^(1/4)


def covering_bound(K: float, n: int, i_ae_bits: float, delta: float, delta_prime: float,
                   D: float) -> CoveringBound:
    """Lower bound ``1 - 2D exp(-delta^3 K 2^{-n(I(A;E) + delta')} / (4 ln 2))``.

    The probability is over random codes that ``||tau^m - tau_bar||_1`` is at
    most ``distance``.  ``value`` is clamped to ``[0, 1]``; ``raw`` is not.
    """
    for name, v in (("K", K), ("n", n), ("delta", delta), ("delta_prime", delta_prime), ("D", D)):
        if not v > 0:
            raise ConfigError(f"{name} must be positive, got {v}")
    if math.isinf(K):
        exponent = math.inf
    else:
        exponent = delta ** 3 * K * 2.0 ** (-n * (i_ae_bits + delta_prime)) / (4.0 * math.log(2))
    raw = 1.0 - 2.0 * D * math.exp(-exponent)
    radius = delta + 4.0 * math.sqrt(delta) + 24.0 * delta ** 0.25
    return CoveringBound(min(max(raw, 0.0), 1.0), raw, radius)

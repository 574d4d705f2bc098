"""Dense multipartite linear algebra.

States carry a :class:`SystemLayout` naming their tensor factors, so reduced
states are requested by label rather than by axis index.  Factor order is
big-endian: the first factor is the most significant index of the flattened
Hilbert space.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.linalg import null_space

from . import config
from .errors import (ConfigError, InvalidState, LabelClash, MarginalMismatch,
                     NotHermitian, UnknownLabel)

STATE_TOL = 1e-10
EIG_CUTOFF = 1e-12

Labels = Union[str, Iterable[str]]


def as_labels(labels: Labels) -> tuple[str, ...]:
    """Normalise a label or iterable of labels into a tuple.

    A bare string is a single label, never a sequence of characters.
    """
    if isinstance(labels, str):
        return (labels,)
    return tuple(labels)


@dataclass(frozen=True)
class SystemLayout:
    """Ordered tensor factors ``((label, dim), ...)``."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(lab), int(d)) for lab, d in self.factors)
        object.__setattr__(self, "factors", factors)
        labels = [lab for lab, _ in factors]
        if len(set(labels)) != len(labels):
            raise LabelClash(f"duplicate labels in layout {labels}")
        for lab, d in factors:
            if d < 1:
                raise ConfigError(f"factor {lab!r} has non-positive dimension {d}")

    @classmethod
    def of(cls, *factors) -> "SystemLayout":
        """``SystemLayout.of(("A", 2), ("B", 3))``."""
        return cls(tuple(factors))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.factors else 1

    def __len__(self):
        return len(self.factors)

    def __contains__(self, label):
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"unknown label {label!r}; layout has {self.labels}") from None

    def dim_of(self, labels: Labels) -> int:
        return int(np.prod([self.factors[self.index(lab)][1] for lab in as_labels(labels)],
                           dtype=np.int64))

    def subset(self, labels: Labels) -> "SystemLayout":
        """Sub-layout keeping the original factor order."""
        wanted = set(as_labels(labels))
        for lab in wanted:
            self.index(lab)
        return SystemLayout(tuple(f for f in self.factors if f[0] in wanted))

    def concat(self, other: "SystemLayout") -> "SystemLayout":
        clash = set(self.labels) & set(other.labels)
        if clash:
            raise LabelClash(f"labels {sorted(clash)} appear in both layouts")
        return SystemLayout(self.factors + other.factors)

    def rename(self, mapping: dict) -> "SystemLayout":
        return SystemLayout(tuple((mapping.get(lab, lab), d) for lab, d in self.factors))


def _layout(layout) -> SystemLayout:
    if isinstance(layout, SystemLayout):
        return layout
    if isinstance(layout, (int, np.integer)):
        return SystemLayout((("S", int(layout)),))
    return SystemLayout(tuple(layout))


class DensityMatrix:
    """Immutable density operator on a labelled tensor-product space."""

    __slots__ = ("layout", "data")
    kind = "density"

    def __init__(self, layout, data, check: bool = True):
        layout = _layout(layout)
        data = np.array(data, dtype=complex)
        if data.shape != (layout.dim, layout.dim):
            raise InvalidState(f"entries have shape {data.shape}, layout needs "
                               f"{(layout.dim, layout.dim)}")
        config.check_density_dim(layout.dim)
        if check:
            _check_density(data)
        data.setflags(write=False)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "data", data)

    def __setattr__(self, key, value):
        raise AttributeError("DensityMatrix is immutable")

    def __repr__(self):
        return f"DensityMatrix({self.layout.factors})"

    @property
    def dim(self) -> int:
        return self.layout.dim

    def to_density(self) -> "DensityMatrix":
        return self

    def relabel(self, mapping: dict) -> "DensityMatrix":
        return DensityMatrix(self.layout.rename(mapping), self.data, check=False)


class PureState:
    """Immutable normalised state vector on a labelled tensor-product space."""

    __slots__ = ("layout", "data")
    kind = "pure"

    def __init__(self, layout, data, check: bool = True):
        layout = _layout(layout)
        data = np.array(data, dtype=complex).reshape(-1)
        if data.shape != (layout.dim,):
            raise InvalidState(f"amplitudes have length {data.size}, layout needs {layout.dim}")
        config.check_pure_dim(layout.dim)
        if check:
            norm = np.linalg.norm(data)
            if abs(norm - 1.0) > STATE_TOL:
                raise InvalidState(f"state vector has norm {norm}")
        data.setflags(write=False)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "data", data)

    def __setattr__(self, key, value):
        raise AttributeError("PureState is immutable")

    def __repr__(self):
        return f"PureState({self.layout.factors})"

    @property
    def dim(self) -> int:
        return self.layout.dim

    def to_density(self) -> DensityMatrix:
        return DensityMatrix(self.layout, np.outer(self.data, self.data.conj()), check=False)

    def relabel(self, mapping: dict) -> "PureState":
        return PureState(self.layout.rename(mapping), self.data, check=False)


MultipartiteState = Union[DensityMatrix, PureState]


@dataclass(frozen=True)
class Isometry:
    """Linear map ``V`` with ``V^dagger V = I`` on the input space."""

    input_layout: SystemLayout
    output_layout: SystemLayout
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (self.output_layout.dim, self.input_layout.dim):
            raise ConfigError(f"isometry matrix has shape {m.shape}")
        gram = m.conj().T @ m
        if np.max(np.abs(gram - np.eye(m.shape[1]))) > STATE_TOL:
            raise InvalidState("columns are not orthonormal")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def _check_density(data: np.ndarray, tol: float = STATE_TOL) -> None:
    herm = np.max(np.abs(data - data.conj().T)) if data.size else 0.0
    if herm > tol:
        raise InvalidState(f"matrix is not Hermitian (deviation {herm:.3g})")
    tr = np.trace(data).real
    if abs(tr - 1.0) > tol:
        raise InvalidState(f"trace {tr} differs from 1")
    lam_min = np.linalg.eigvalsh(data).min()
    if lam_min < -tol:
        raise InvalidState(f"negative eigenvalue {lam_min:.3g}")


# -- structure ---------------------------------------------------------------

def tensor(a: MultipartiteState, b: MultipartiteState) -> MultipartiteState:
    """Tensor product; pure if both inputs are pure."""
    layout = a.layout.concat(b.layout)
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(layout, np.kron(a.data, b.data), check=False)
    a, b = a.to_density(), b.to_density()
    return DensityMatrix(layout, np.kron(a.data, b.data), check=False)


def _trace_keep(op: np.ndarray, dims: Sequence[int], keep_idx: Sequence[int]) -> np.ndarray:
    n = len(dims)
    keep_idx = sorted(keep_idx)
    drop_idx = [i for i in range(n) if i not in keep_idx]
    dk = int(np.prod([dims[i] for i in keep_idx], dtype=np.int64))
    dd = int(np.prod([dims[i] for i in drop_idx], dtype=np.int64))
    t = op.reshape(tuple(dims) * 2)
    perm = keep_idx + drop_idx
    t = t.transpose(perm + [n + i for i in perm]).reshape(dk, dd, dk, dd)
    return np.einsum("ijkj->ik", t)


def partial_trace(rho: MultipartiteState, keep: Labels) -> DensityMatrix:
    """Reduced state on the factors in ``keep`` (factor order preserved)."""
    keep = as_labels(keep)
    layout = rho.layout
    keep_idx = [layout.index(lab) for lab in keep]
    sub = layout.subset(keep)
    if isinstance(rho, PureState):
        if sub.dim > config.max_density_dim():
            config.check_density_dim(sub.dim)
        n = len(layout)
        keep_sorted = sorted(keep_idx)
        drop = [i for i in range(n) if i not in keep_sorted]
        psi = rho.data.reshape(layout.dims).transpose(keep_sorted + drop)
        psi = psi.reshape(sub.dim, -1)
        return DensityMatrix(sub, psi @ psi.conj().T, check=False)
    if len(keep_idx) == len(layout):
        return rho
    return DensityMatrix(sub, _trace_keep(rho.data, layout.dims, keep_idx), check=False)


def trace_out(rho: MultipartiteState, labels: Labels) -> DensityMatrix:
    drop = set(as_labels(labels))
    for lab in drop:
        rho.layout.index(lab)
    return partial_trace(rho, [lab for lab in rho.layout.labels if lab not in drop])


def permute(rho: MultipartiteState, order: Labels) -> MultipartiteState:
    """Reorder tensor factors to ``order`` (must list every label once)."""
    order = as_labels(order)
    layout = rho.layout
    if sorted(order) != sorted(layout.labels):
        raise ConfigError(f"order {order} is not a permutation of {layout.labels}")
    idx = [layout.index(lab) for lab in order]
    new = SystemLayout(tuple(layout.factors[i] for i in idx))
    n = len(layout)
    if isinstance(rho, PureState):
        data = rho.data.reshape(layout.dims).transpose(idx).reshape(-1)
        return PureState(new, data, check=False)
    data = rho.data.reshape(layout.dims * 2).transpose(idx + [n + i for i in idx])
    return DensityMatrix(new, data.reshape(new.dim, new.dim), check=False)


def merge(rho: MultipartiteState, labels: Labels, new_label: str) -> MultipartiteState:
    """Fuse adjacent factors ``labels`` into one factor called ``new_label``."""
    labels = as_labels(labels)
    layout = rho.layout
    idx = [layout.index(lab) for lab in labels]
    if idx != list(range(idx[0], idx[0] + len(idx))):
        raise ConfigError("only adjacent factors in layout order can be merged")
    d = layout.dim_of(labels)
    factors = layout.factors[:idx[0]] + ((new_label, d),) + layout.factors[idx[-1] + 1:]
    new = SystemLayout(factors)
    return type(rho)(new, rho.data, check=False)


def copy_label(label: str, n: int) -> str:
    """Label of the grouped factor holding ``n`` copies of ``label``."""
    return f"{label}^{n}"


def tensor_power(rho: MultipartiteState, n: int) -> MultipartiteState:
    """``rho`` to the ``n``-th tensor power with copies grouped per system.

    The result has one factor ``X^n`` per original factor ``X``; inside it
    copy 1 is the most significant digit.
    """
    if n < 1:
        raise ConfigError("n must be at least 1")
    layout = rho.layout
    k = len(layout)
    total = layout.dim ** n
    if isinstance(rho, PureState):
        config.check_pure_dim(total)
    else:
        config.check_density_dim(total)
    out = rho.data
    for _ in range(n - 1):
        out = np.kron(out, rho.data)
    # axes are (copy, factor) in copy-major order; regroup factor-major
    axes = [c * k + f for f in range(k) for c in range(n)]
    new = SystemLayout(tuple((copy_label(lab, n), d ** n) for lab, d in layout.factors))
    if isinstance(rho, PureState):
        data = out.reshape(layout.dims * n).transpose(axes).reshape(-1)
        return PureState(new, data, check=False)
    m = n * k
    data = out.reshape(layout.dims * n * 2).transpose(axes + [m + a for a in axes])
    return DensityMatrix(new, data.reshape(total, total), check=False)


def apply_local(rho: MultipartiteState, op: np.ndarray, label: str,
                out_label: str | None = None, out_dim: int | None = None) -> MultipartiteState:
    """Apply a linear map ``op`` (out_dim x in_dim) to one factor."""
    layout = rho.layout
    i = layout.index(label)
    op = np.asarray(op, dtype=complex)
    d_in = layout.dims[i]
    d_out = op.shape[0] if out_dim is None else out_dim
    if op.shape != (d_out, d_in):
        raise ConfigError(f"operator shape {op.shape} incompatible with factor dim {d_in}")
    factors = list(layout.factors)
    factors[i] = (out_label or label, d_out)
    new = SystemLayout(tuple(factors))
    left = int(np.prod(layout.dims[:i], dtype=np.int64))
    right = int(np.prod(layout.dims[i + 1:], dtype=np.int64))
    if isinstance(rho, PureState):
        v = rho.data.reshape(left, d_in, right)
        v = np.einsum("ab,ibj->iaj", op, v)
        return PureState(new, v.reshape(-1), check=False)
    r = rho.data.reshape(left, d_in, right, left, d_in, right)
    r = np.einsum("ab,ibjkcl,dc->iajkdl", op, r, op.conj())
    return DensityMatrix(new, r.reshape(new.dim, new.dim), check=False)


# -- spectra and distances -----------------------------------------------------

def eigh(h) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and unitary eigenvectors of a Hermitian matrix."""
    h = h.data if isinstance(h, DensityMatrix) else np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {h.shape}")
    if h.size and np.max(np.abs(h - h.conj().T)) > 1e-8:
        raise NotHermitian("matrix is not Hermitian to 1e-8")
    return np.linalg.eigh(h)


def trace_distance(rho: MultipartiteState, sigma: MultipartiteState) -> float:
    """Normalised trace distance ``||rho - sigma||_1 / 2``."""
    if rho.layout.dims != sigma.layout.dims:
        raise ConfigError(f"dimension mismatch: {rho.layout.dims} vs {sigma.layout.dims}")
    return trace_distance_arrays(rho.to_density().data, sigma.to_density().data)


def trace_distance_arrays(a: np.ndarray, b: np.ndarray) -> float:
    diff = a - b
    diff = 0.5 * (diff + diff.conj().T)
    val = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
    return min(max(val, 0.0), 1.0)


def fidelity_pure(phi: PureState, psi: PureState) -> float:
    """``|<phi|psi>|``; used for equality up to global phase."""
    return float(abs(np.vdot(phi.data, psi.data)))


# -- purifications ------------------------------------------------------------

def purify(rho: DensityMatrix, ref_label: str = "R") -> PureState:
    """Purification with a reference factor of the same dimension as ``rho``.

    ``|psi> = sum_i sqrt(l_i) |v_i> |i>_ref`` over the eigenpairs of ``rho``
    in descending order, so a pure ``|v><v|`` purifies to ``|v>|0>``.
    """
    lam, vecs = np.linalg.eigh(rho.data)
    lam, vecs = lam[::-1], vecs[:, ::-1]
    lam = np.clip(lam, 0.0, None)
    d = rho.dim
    mat = vecs * np.sqrt(lam)[None, :]   # [system, ref]
    layout = rho.layout.concat(SystemLayout(((ref_label, d),)))
    v = mat.reshape(-1)
    return PureState(layout, v / np.linalg.norm(v), check=False)


def _split(state: PureState, ref: Sequence[str]) -> tuple[np.ndarray, SystemLayout, SystemLayout]:
    layout = state.layout
    ref = list(ref)
    sys = [lab for lab in layout.labels if lab not in ref]
    perm = permute(state, sys + ref)
    s_layout, r_layout = layout.subset(sys), SystemLayout(tuple(layout.factors[layout.index(r)]
                                                               for r in ref))
    return perm.data.reshape(s_layout.dim, r_layout.dim), s_layout, r_layout


def purification_isometry(phi: PureState, psi: PureState, tol: float = 1e-8) -> Isometry:
    """Isometry ``V`` from the purifying factors of ``phi`` to those of ``psi``.

    The shared labels of the two states form the purified system ``S``;
    ``(I_S x V)|phi> = |psi>``.  Columns on the kernel of the marginal are
    completed arbitrarily (but deterministically).
    """
    common = [lab for lab in phi.layout.labels if lab in psi.layout]
    if not common:
        raise ConfigError("states share no system to purify")
    r_labels = [lab for lab in phi.layout.labels if lab not in common]
    t_labels = [lab for lab in psi.layout.labels if lab not in common]
    if [phi.layout.dims[phi.layout.index(c)] for c in common] != \
            [psi.layout.dims[psi.layout.index(c)] for c in common]:
        raise MarginalMismatch("shared systems have different dimensions")
    # bring psi's shared factors into phi's order
    psi_order = common + t_labels
    Phi, _, r_layout = _split(phi, r_labels)
    Psi, _, t_layout = _split(permute(psi, psi_order), t_labels)
    rho_phi = Phi @ Phi.conj().T
    rho_psi = Psi @ Psi.conj().T
    gap = np.max(np.abs(rho_phi - rho_psi))
    if gap > tol:
        raise MarginalMismatch(f"marginals on {common} differ by {gap:.3g}")
    dr, dt = r_layout.dim, t_layout.dim
    lam, e = np.linalg.eigh(rho_phi)
    support = lam > EIG_CUTOFF
    if support.sum() > dt:
        raise MarginalMismatch("target purifying system is too small")
    if dt < dr:
        raise ConfigError(f"an isometry from dimension {dr} into {dt} does not exist")
    e = e[:, support]
    sq = np.sqrt(lam[support])
    f = (e.conj().T @ Phi) / sq[:, None]     # rows: phi-side Schmidt vectors
    g = (e.conj().T @ Psi) / sq[:, None]     # rows: psi-side Schmidt vectors
    V = g.T @ f.conj()
    k = f.shape[0]
    if k < dr:
        f_perp = null_space(f.conj()) if k else np.eye(dr, dtype=complex)
        g_perp = null_space(g.conj()) if k else np.eye(dt, dtype=complex)
        V = V + g_perp[:, :dr - k] @ f_perp.conj().T
    return Isometry(r_layout, t_layout, V)


def apply_isometry(state: PureState, iso: Isometry) -> PureState:
    """Apply ``iso`` to its input factors; output factors are appended last."""
    r_labels = list(iso.input_layout.labels)
    mat, s_layout, _ = _split(state, r_labels)
    out = mat @ iso.matrix.T
    return PureState(s_layout.concat(iso.output_layout), out.reshape(-1), check=False)


# -- random states --------------------------------------------------------------

def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary: QR of a complex Ginibre matrix with phase-fixed R."""
    rng = _rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))[None, :]


def random_isometry(d_in: int, d_out: int, seed=None) -> np.ndarray:
    if d_out < d_in:
        raise ConfigError("isometry output dimension smaller than input")
    return random_unitary(d_out, seed)[:, :d_in]


def random_density(dim, rank: int | None = None, seed=None) -> DensityMatrix:
    """Random mixed state ``G G^dagger / Tr`` from a ``dim x rank`` Ginibre matrix."""
    layout = _layout(dim)
    d = layout.dim
    rank = d if rank is None else int(rank)
    if rank < 1 or rank > d:
        raise ConfigError(f"rank {rank} must lie in [1, {d}]")
    rng = _rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return DensityMatrix(layout, 0.5 * (rho + rho.conj().T))


def random_pure(layout, seed=None) -> PureState:
    layout = _layout(layout)
    rng = _rng(seed)
    v = rng.standard_normal(layout.dim) + 1j * rng.standard_normal(layout.dim)
    return PureState(layout, v / np.linalg.norm(v))


def basis_state(layout, index) -> PureState:
    layout = _layout(layout)
    if not isinstance(index, (int, np.integer)):
        index = int(np.ravel_multi_index(tuple(index), layout.dims))
    v = np.zeros(layout.dim, dtype=complex)
    v[index] = 1.0
    return PureState(layout, v)


def maximally_mixed(layout) -> DensityMatrix:
    layout = _layout(layout)
    return DensityMatrix(layout, np.eye(layout.dim) / layout.dim, check=False)


# -- state file format ------------------------------------------------------------

def state_to_dict(state: MultipartiteState) -> dict:
    flat = state.data.reshape(-1)
    return {
        "factors": [[lab, d] for lab, d in state.layout.factors],
        "kind": state.kind,
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }


def state_from_dict(doc: dict) -> MultipartiteState:
    try:
        layout = SystemLayout(tuple((lab, d) for lab, d in doc["factors"]))
        kind = doc["kind"]
        entries = np.array([complex(re, im) for re, im in doc["entries"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed state document: {exc}") from exc
    if kind == "pure":
        return PureState(layout, entries)
    if kind == "density":
        if entries.size != layout.dim ** 2:
            raise ConfigError(f"density entries: expected {layout.dim ** 2}, got {entries.size}")
        return DensityMatrix(layout, entries.reshape(layout.dim, layout.dim))
    raise ConfigError(f"unknown state kind {kind!r}")


def save_state(state: MultipartiteState, path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(state)) + "\n", encoding="utf-8")


def load_state(path) -> MultipartiteState:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"state file {path} does not exist")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"state file {path} is not valid JSON: {exc}") from exc
    return state_from_dict(doc)

"""End-to-end simulation of the conditional one-time pad at small blocklength."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..entropic import ConverseResult, converse_check, cqmi, entropy
from ..errors import ConfigError
from ..qcore import DensityMatrix, as_labels
from .decoding import pgm_success_monomial
from .encoding import Code, build_code, full_key_code
from ..seeding import trial_seeds
from .states import ProtocolFrame, security_metrics, subset_name

DECODERS = ("pgm_exact", "pgm_typical")


@dataclass(frozen=True)
class ProtocolConfig:
    """Parameters of one simulation.

    ``keys`` holds ``K`` (one key) or ``K_1 .. K_p``; with ``full_key`` the
    key set of every message is the full list of encoding vectors and
    ``keys`` is ignored.  ``security_subsets`` name the systems the
    adversary holds besides ``A^n`` (``A`` may be listed or not).
    """

    n: int
    M: int
    keys: tuple[int, ...] = (1,)
    trials: int = 1
    seed: int = 0
    decoder: str = "pgm_exact"
    typical_delta: float = 0.2
    security_subsets: tuple[tuple[str, ...], ...] = (("E",),)
    a_label: str = "A"
    full_key: bool = False
    compress_delta: float | None = None
    workers: int = 1

    def __post_init__(self):
        keys = tuple(int(k) for k in np.atleast_1d(self.keys))
        object.__setattr__(self, "keys", keys)
        subsets = tuple(tuple(lab for lab in as_labels(s) if lab != self.a_label)
                        for s in self.security_subsets)
        object.__setattr__(self, "security_subsets", subsets)
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if self.M < 1 or not keys or any(k < 1 for k in keys):
            raise ConfigError("M and every key count must be at least 1")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.decoder not in DECODERS:
            raise ConfigError(f"decoder must be one of {DECODERS}")
        if not subsets or any(not s for s in subsets):
            raise ConfigError("need at least one non-empty security subset")
        if len(set(subsets)) != len(subsets):
            raise ConfigError("security subsets must be distinct")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    @property
    def K(self) -> int:
        return math.prod(self.keys)


@dataclass(frozen=True)
class ExpurgationResult:
    kept: tuple[int, ...]
    eps: float
    delta: float
    converse: dict


@dataclass(frozen=True)
class TrialResult:
    trial: int
    seed: int | None
    success: np.ndarray                 # (M, K)
    deltas: dict                        # subset name -> (M,) array
    converse: dict                      # subset name -> ConverseResult
    expurgation: ExpurgationResult | None = None

    @property
    def eps_worst(self) -> float:
        return float(1.0 - self.success.min())

    @property
    def eps_avg(self) -> float:
        return float(1.0 - self.success.mean())

    @property
    def delta(self) -> float:
        return float(max(d.max() for d in self.deltas.values()))

    @property
    def converse_satisfied(self) -> bool:
        ok = all(c.satisfied for c in self.converse.values())
        if self.expurgation is not None:
            ok = ok and all(c.satisfied for c in self.expurgation.converse.values())
        return ok

    def binding_converse(self) -> ConverseResult:
        """The subset whose inequality has the smallest margin."""
        return min(self.converse.values(), key=lambda c: c.margin)


@dataclass(frozen=True)
class ProtocolReport:
    config: ProtocolConfig
    K: int
    trials: list
    cqmi: dict              # subset name -> I(A; rest | subset) of one copy
    entropy_abe: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def rate_bits(self) -> float:
        return math.log2(self.config.M) / self.config.n

    @property
    def key_rate_bits(self) -> float:
        return math.log2(self.K) / self.config.n

    @property
    def key_rates(self) -> tuple[float, ...]:
        keys = (self.K,) if self.config.full_key else self.config.keys
        return tuple(math.log2(k) / self.config.n for k in keys)

    @property
    def eps(self) -> np.ndarray:
        return np.array([t.eps_worst for t in self.trials])

    @property
    def eps_avg(self) -> np.ndarray:
        return np.array([t.eps_avg for t in self.trials])

    @property
    def delta(self) -> np.ndarray:
        return np.array([t.delta for t in self.trials])

    @property
    def converse_satisfied(self) -> bool:
        return all(t.converse_satisfied for t in self.trials)

    def summary(self) -> dict:
        out = {}
        for name, arr in (("eps", self.eps), ("delta", self.delta)):
            out[f"{name}_median"] = float(np.median(arr))
            out[f"{name}_min"] = float(arr.min())
            out[f"{name}_max"] = float(arr.max())
        return out


def expurgation_order(success: np.ndarray) -> np.ndarray:
    """Messages sorted best-first by worst-key success; ties keep lower index."""
    worst = np.asarray(success).min(axis=1)
    return np.argsort(-worst, kind="stable")


def expurgate(trial: TrialResult, code: Code, n: int | None = None,
              cqmi_values: dict | None = None) -> tuple[Code, ExpurgationResult]:
    """Keep the better half (``M // 2``) of the messages.

    ``eps`` of the subcode is the largest failure probability over its
    ``(m, k)`` pairs under the original decoder; ``delta`` the largest
    adversary distance over kept messages.
    """
    M = trial.success.shape[0]
    if M < 2:
        raise ConfigError("expurgation needs at least two messages")
    kept = tuple(sorted(int(m) for m in expurgation_order(trial.success)[:M // 2]))
    eps = float(1.0 - trial.success[list(kept)].min())
    per_subset = {name: float(d[list(kept)].max()) for name, d in trial.deltas.items()}
    delta = max(per_subset.values())
    converse = {}
    if n is not None and cqmi_values is not None:
        converse = {name: converse_check(n, len(kept), min(eps, 1.0), per_subset[name],
                                         cqmi_values[name])
                    for name in trial.deltas}
    return code.rows(kept), ExpurgationResult(kept, eps, delta, converse)


class _Context:
    def __init__(self, config: ProtocolConfig, rho: DensityMatrix):
        self.config = config
        self.frame = ProtocolFrame(rho, config.n, a_label=config.a_label,
                                   compress_delta=config.compress_delta)
        others = self.frame.others
        self.subsets = [self.frame.subset_key(s) for s in config.security_subsets]
        self.names = [subset_name(s, config.a_label) for s in self.subsets]
        self.cqmi = {}
        for name, sub in zip(self.names, self.subsets):
            rest = tuple(lab for lab in others if lab not in sub)
            self.cqmi[name] = cqmi(self.frame.rho, config.a_label, rest, sub) if rest else 0.0
        self.entropy = entropy(self.frame.rho)
        self.projector = None
        if config.decoder == "pgm_typical":
            self.projector = self._typical_projector()

    def _typical_projector(self) -> np.ndarray:
        arr, _, _ = self.frame.power()
        lam, vecs = np.linalg.eigh(arr)
        n = self.config.n
        with np.errstate(divide="ignore"):
            rate = -np.log2(np.clip(lam, 0.0, None)) / n
        mask = np.abs(rate - self.entropy) <= self.config.typical_delta + 1e-12
        v = vecs[:, mask]
        return v @ v.conj().T

    def run(self, code: Code, trial: int, seed) -> TrialResult:
        cfg = self.config
        arr, rest, _ = self.frame.power()
        perms, phases = self.frame.monomials(code)
        success = pgm_success_monomial(arr, perms, phases, rest, self.projector)
        success = success.reshape(code.M, code.K)
        deltas = {name: security_metrics(code, None, cfg.n, sub, frame=self.frame)
                  for name, sub in zip(self.names, self.subsets)}
        eps = float(1.0 - success.min())
        converse = {name: converse_check(cfg.n, code.M, eps, float(deltas[name].max()),
                                         self.cqmi[name])
                    for name in self.names}
        result = TrialResult(trial, seed, success, deltas, converse)
        if code.M >= 2:
            _, exp = expurgate(result, code, cfg.n, self.cqmi)
            result = replace(result, expurgation=exp)
        return result


def _validate_state(config: ProtocolConfig, rho: DensityMatrix) -> None:
    if config.a_label not in rho.layout:
        raise ConfigError(f"state has no {config.a_label!r} factor")
    for sub in config.security_subsets:
        for lab in sub:
            if lab not in rho.layout:
                raise ConfigError(f"security subset label {lab!r} not in state {rho.layout.labels}")


def simulate(config: ProtocolConfig, rho: DensityMatrix) -> ProtocolReport:
    """Run ``config.trials`` random codes through encoder, PGM decoder and adversary.

    Trial ``i`` draws its code from a generator seeded with the ``i``-th
    SplitMix64 derivative of ``config.seed``, so results do not depend on
    how trials are scheduled across ``config.workers`` threads.  A full-key
    code is deterministic and is evaluated once for all trials.
    """
    _validate_state(config, rho)
    ctx = _Context(config, rho)
    seeds = trial_seeds(config.seed, config.trials)
    if config.full_key:
        code = full_key_code(config.M, ctx.frame.decomp)
        first = ctx.run(code, 0, None)
        trials = [replace(first, trial=i) for i in range(config.trials)]
        return ProtocolReport(config, code.K, trials, ctx.cqmi, ctx.entropy)

    def one(i):
        rng = np.random.default_rng(seeds[i])
        code = build_code(config.M, config.keys, ctx.frame.decomp, rng, seed=seeds[i])
        return ctx.run(code, i, seeds[i])

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            trials = list(pool.map(one, range(config.trials)))
    else:
        trials = [one(i) for i in range(config.trials)]
    return ProtocolReport(config, config.K, trials, ctx.cqmi, ctx.entropy)


def simulate_multikey(config: ProtocolConfig, rho: DensityMatrix) -> ProtocolReport:
    """Several local keys ``k_1 .. k_p``, one per protected subset.

    Every protected subset sees the state averaged over all key tuples; the
    decoder targets the message together with the whole key tuple.
    """
    if len(config.keys) != len(config.security_subsets):
        raise ConfigError(f"{len(config.keys)} key counts for "
                          f"{len(config.security_subsets)} protected subsets")
    return simulate(config, rho)

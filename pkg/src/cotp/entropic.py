"""Entropic functionals (all in bits) and the converse-inequality checker."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .qcore import (EIG_CUTOFF, Labels, MultipartiteState, PureState,
                    as_labels, partial_trace)

CONVERSE_TOL = 1e-9


def entropy_of_spectrum(lam) -> float:
    lam = np.asarray(lam, dtype=float)
    lam = lam[lam > EIG_CUTOFF]
    return float(max(-np.sum(lam * np.log2(lam)), 0.0))


def entropy(rho: MultipartiteState) -> float:
    """von Neumann entropy ``-Tr rho log2 rho``."""
    if isinstance(rho, PureState):
        return 0.0
    return entropy_of_spectrum(np.linalg.eigvalsh(rho.data))


def subsystem_entropy(rho: MultipartiteState, labels: Labels) -> float:
    labels = as_labels(labels)
    if not labels:
        return 0.0
    if isinstance(rho, PureState):
        # H(X) = H(complement) for pure states; trace the smaller side
        rest = [lab for lab in rho.layout.labels if lab not in labels]
        if rho.layout.dim_of(rest) < rho.layout.dim_of(labels):
            return entropy(partial_trace(rho, rest)) if rest else 0.0
    return entropy(partial_trace(rho, labels))


def _disjoint(*groups):
    seen = set()
    for g in groups:
        if not g:
            raise ConfigError("empty label set")
        if seen & set(g):
            raise ConfigError(f"label sets overlap on {sorted(seen & set(g))}")
        seen |= set(g)


def mutual_information(rho: MultipartiteState, f: Labels, g: Labels) -> float:
    """``I(F;G) = H(F) + H(G) - H(FG)``."""
    f, g = as_labels(f), as_labels(g)
    _disjoint(f, g)
    return (subsystem_entropy(rho, f) + subsystem_entropy(rho, g)
            - subsystem_entropy(rho, f + g))


def cqmi(rho: MultipartiteState, a: Labels, b: Labels, e: Labels) -> float:
    """Conditional mutual information ``I(A;B|E) = I(A;BE) - I(A;E)``."""
    a, b, e = as_labels(a), as_labels(b), as_labels(e)
    _disjoint(a, b, e)
    return mutual_information(rho, a, b + e) - mutual_information(rho, a, e)


def neg_interaction_information(rho: MultipartiteState, a: Labels, b: Labels, e: Labels) -> float:
    """``-I_3(A;B;E) = I(A;BE) - I(A;B) - I(A;E)``; may be negative."""
    a, b, e = as_labels(a), as_labels(b), as_labels(e)
    _disjoint(a, b, e)
    return (mutual_information(rho, a, b + e) - mutual_information(rho, a, b)
            - mutual_information(rho, a, e))


def rate_quantum_message(cqmi_value: float) -> float:
    """Optimal secure rate for a quantum message: half the CQMI."""
    return cqmi_value / 2.0


@dataclass(frozen=True)
class RateReport:
    i_a_be: float
    i_a_b: float
    i_a_e: float
    cqmi: float
    neg_i3: float
    entropies: dict = field(default_factory=dict)

    @property
    def quantum_message_rate(self) -> float:
        return rate_quantum_message(self.cqmi)


def rate_report(rho: MultipartiteState, a: Labels, b: Labels, e: Labels) -> RateReport:
    """All rate quantities for one tripartition, from seven subsystem entropies."""
    a, b, e = as_labels(a), as_labels(b), as_labels(e)
    _disjoint(a, b, e)
    groups = {"A": a, "B": b, "E": e, "AB": a + b, "AE": a + e, "BE": b + e, "ABE": a + b + e}
    h = {k: subsystem_entropy(rho, v) for k, v in groups.items()}
    i_a_be = h["A"] + h["BE"] - h["ABE"]
    i_a_b = h["A"] + h["B"] - h["AB"]
    i_a_e = h["A"] + h["E"] - h["AE"]
    return RateReport(i_a_be=i_a_be, i_a_b=i_a_b, i_a_e=i_a_e, cqmi=i_a_be - i_a_e,
                      neg_i3=i_a_be - i_a_b - i_a_e, entropies=h)


def g_bound(eps: float) -> float:
    """Continuity correction ``(1+eps) log2(1+eps) - eps log2 eps``; ``g(0) = 0``."""
    eps = float(eps)
    if eps < 0.0 and eps > -1e-12:
        eps = 0.0
    if eps > 1.0 and eps < 1.0 + 1e-12:
        eps = 1.0
    if not 0.0 <= eps <= 1.0:
        raise ConfigError(f"g_bound needs eps in [0, 1], got {eps}")
    if eps == 0.0:
        return 0.0
    return (eps + 1.0) * math.log2(eps + 1.0) - eps * math.log2(eps)


@dataclass(frozen=True)
class ConverseResult:
    satisfied: bool
    lhs: float
    rhs: float
    vacuous: bool = False

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def converse_check(n: int, M: int, eps: float, delta: float, cqmi_value: float) -> ConverseResult:
    """Evaluate ``(1-eps-delta) log2(M) / n <= I(A;B|E) + (g(eps) + g(delta)) / n``.

    When ``eps + delta >= 1`` the left side is non-positive and the bound says
    nothing; the result is flagged ``vacuous`` (and trivially satisfied).
    """
    if n < 1 or M < 1:
        raise ConfigError("need n >= 1 and M >= 1")
    lhs = (1.0 - eps - delta) / n * math.log2(M)
    rhs = cqmi_value + (g_bound(eps) + g_bound(delta)) / n
    return ConverseResult(satisfied=lhs <= rhs + CONVERSE_TOL, lhs=lhs, rhs=rhs,
                          vacuous=eps + delta >= 1.0)

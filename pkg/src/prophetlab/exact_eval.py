"""Exact expected values on Bernoulli instances.

``opt_value`` is the prophet benchmark E[max].  ``tal`` is the plain
threshold rule (stop at the first reward meeting the threshold) and
``tal_alpha`` its prediction-augmented variant, where the effective threshold
is the max of the base threshold and ``alpha`` times the realized maximum.

The exact TAL_alpha computation conditions on the largest realized index j:
that event has probability p_j * prod_{i>j}(1 - p_i), fixes the realized
maximum at v_j (the instance must be value-sorted), and leaves the variables
before j independent with their original probabilities.  A forward scan then
yields the stopped value in O(n) per j, O(n^2) overall -- no 2^n enumeration.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .core import BernoulliInstance, sort_instance


@dataclass(frozen=True)
class EvalReport:
    """OPT, algorithm value, their ratio, and how they were computed."""

    opt: float
    alg: float
    ratio: float
    method: str  # "exact" | "enumerated" | "montecarlo"
    ci_halfwidth: Optional[float] = None  # 95% CI on the ratio, Monte Carlo only
    alg_se: Optional[float] = None  # standard error of the alg mean, Monte Carlo only

    @classmethod
    def build(cls, opt: float, alg: float, method: str,
              ci_halfwidth: float | None = None, alg_se: float | None = None) -> "EvalReport":
        # ratio at OPT = 0 is defined as 1 (vacuous instance).
        ratio = alg / opt if opt > 0 else 1.0
        return cls(opt, alg, ratio, method, ci_halfwidth, alg_se)

    def to_json_dict(self) -> dict:
        out = {"opt": self.opt, "alg": self.alg, "ratio": self.ratio, "method": self.method}
        if self.ci_halfwidth is not None:
            out["ci_halfwidth"] = self.ci_halfwidth
        return out


def tal_realized(values: Sequence[float], threshold: float) -> float:
    """Value stopped at by the threshold rule on one realization.

    Accepts the first value >= threshold (a zero draw clears a zero
    threshold), returns 0 when nothing clears.
    """
    for v in values:
        if v >= threshold:
            return v
    return 0.0


def _require_sorted(inst: BernoulliInstance) -> None:
    if not inst.is_sorted:
        raise ValueError("operation requires a value-sorted instance")


def opt_value(inst: BernoulliInstance) -> float:
    """E[max], via the sorted recursion OPT_k = v_k p_k + (1 - p_k) OPT_{k-1}."""
    srt = inst if inst.is_sorted else sort_instance(inst)
    acc = 0.0
    for x in srt.vars:
        acc = x.v * x.p + (1.0 - x.p) * acc
    return acc


def tal(inst: BernoulliInstance, tau: float) -> float:
    """Expected value of the plain threshold rule with base threshold ``tau``.

    A threshold in the segment (v_{r-1}, v_r] behaves like posting v_r, so the
    value folds from the top: T_r = p_r v_r + (1 - p_r) T_{r+1}.
    """
    _require_sorted(inst)
    vs, ps = inst.values, inst.probs
    if not vs:
        return 0.0
    if tau <= 0.0:
        # Everything clears a zero threshold, so the rule stops at the first
        # variable whatever it draws.
        return ps[0] * vs[0]
    r = bisect_left(vs, tau)
    acc = 0.0
    for i in range(len(vs) - 1, r - 1, -1):
        acc = ps[i] * vs[i] + (1.0 - ps[i]) * acc
    return acc


def tal_alpha(inst: BernoulliInstance, tau: float, alpha: float) -> float:
    """Exact E[TAL(R, max(tau, alpha * max(R)))] by top-index conditioning."""
    _require_sorted(inst)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha == 0.0:
        # The effective threshold degenerates to tau on every realization.
        return tal(inst, tau)
    vs, ps = inst.values, inst.probs
    n = len(vs)
    if n == 0:
        return 0.0
    # after[j] = prob that no variable with index > j realizes
    after = [1.0] * n
    for j in range(n - 2, -1, -1):
        after[j] = after[j + 1] * (1.0 - ps[j + 1])
    terms = []
    for j in range(n):
        if ps[j] == 0.0:
            continue
        top_prob = ps[j] * after[j]
        zeta = max(tau, alpha * vs[j])
        if zeta <= 0.0:
            # Degenerate corner (zero value atoms): the rule accepts the very
            # first draw, realized or not.
            val = vs[j] if j == 0 else ps[0] * vs[0]
        else:
            lo = bisect_left(vs, zeta, 0, j)
            reach = 1.0
            val = 0.0
            for i in range(lo, j):
                val += reach * ps[i] * vs[i]
                reach *= 1.0 - ps[i]
            if vs[j] >= zeta:
                val += reach * vs[j]
        terms.append(top_prob * val)
    return math.fsum(terms)


def uniform_step_average(fn: Callable[[float], float], lo: float, hi: float,
                         breakpoints: Sequence[float]) -> float:
    """Average fn(t) over t ~ U(lo, hi] when fn is a left-continuous step function.

    ``breakpoints`` lists every point where fn may jump; on each piece the
    value at the right endpoint (which the piece contains) represents it.
    """
    if hi <= lo:
        raise ValueError("need hi > lo")
    cuts = [lo] + sorted({float(b) for b in breakpoints if lo < b < hi}) + [hi]
    width = hi - lo
    return math.fsum((b - a) * fn(b) for a, b in zip(cuts, cuts[1:])) / width


def tal_alpha_randomized(inst: BernoulliInstance, tau: float, delta: float,
                         alpha: float) -> float:
    """Exact value of the randomized rule with base threshold tau + U[0, delta].

    TAL_alpha is constant in the base threshold between instance values, so
    the average over the uniform offset is a finite weighted sum of exact
    evaluations, one per piece.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    return uniform_step_average(lambda t: tal_alpha(inst, t, alpha),
                                tau, tau + delta, inst.values)


def max_tail(inst: BernoulliInstance, t: float) -> tuple[float, float]:
    """(Pr[M >= t], E[M 1[M >= t]]) for the realized maximum M, exactly."""
    srt = inst if inst.is_sorted else sort_instance(inst)
    vs, ps = srt.values, srt.probs
    n = len(vs)
    after = [1.0] * (n + 1)
    for j in range(n - 1, -1, -1):
        after[j] = after[j + 1] * (1.0 - ps[j])
    # after[j+1] = prob nothing beyond j realizes; top index j has prob p_j * after[j+1]
    probs = []
    masses = []
    for j in range(n):
        if vs[j] >= t and ps[j] > 0.0:
            q = ps[j] * after[j + 1]
            probs.append(q)
            masses.append(q * vs[j])
    prob = 1.0 if t <= 0.0 else math.fsum(probs)
    return prob, math.fsum(masses)

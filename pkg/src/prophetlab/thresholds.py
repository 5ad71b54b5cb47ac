"""Threshold constructions.

Three families:

* ``sc_threshold``: the self-consistent threshold eta(I), the largest tau for
  which the plain threshold rule still earns at least tau in expectation.
* ``tau_star``: the known-quality base threshold -- the self-consistent
  threshold of the largest prefix whose eta clears alpha times the prefix top
  value.
* ``tail_threshold``: the quality-oblivious base threshold T(c), pinned by
  requiring the maximum's upper tail to carry exactly a ``c`` fraction of
  E[max].  On continuous instances a deterministic threshold exists and is
  found by bisection; on discrete instances point masses can make exact tail
  equality unattainable, so the base threshold is randomized by a uniform
  offset on [0, delta] and the equality holds in expectation over the offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy import integrate

from .core import BernoulliInstance, GeneralInstance, Instance, max_law, prefix
from .exact_eval import max_tail, tal_alpha, tal_alpha_randomized, uniform_step_average


@dataclass(frozen=True)
class ThresholdPolicy:
    """Base threshold, optional uniform randomization width, and the
    prediction quality used to form the effective threshold."""

    base: float
    randomized_delta: Optional[float] = None
    alpha: float = 0.0

    def with_alpha(self, alpha: float) -> "ThresholdPolicy":
        return ThresholdPolicy(self.base, self.randomized_delta, alpha)

    def to_json_dict(self) -> dict:
        return {"base": self.base, "delta": self.randomized_delta, "alpha": self.alpha}

    @classmethod
    def from_json_dict(cls, data: dict) -> "ThresholdPolicy":
        return cls(float(data["base"]),
                   None if data.get("delta") is None else float(data["delta"]),
                   float(data.get("alpha", 0.0)))


def effective_threshold(policy: ThresholdPolicy, m: float, eps: float = 0.0) -> float:
    """max(base + offset, alpha * m); ``eps`` is the realized random offset."""
    if m < 0:
        raise ValueError("realized maximum must be non-negative")
    return max(policy.base + eps, policy.alpha * m)


def sc_threshold(inst: BernoulliInstance) -> float:
    """sup{tau >= 0 : TAL(I, tau) >= tau}, exactly.

    TAL is constant on each value segment (v_{r-1}, v_r], so per segment the
    feasible supremum is v_r when TAL(I, v_r) >= v_r, else TAL(I, v_r) itself
    when that still exceeds the segment's lower edge.  Equal values are merged
    into one segment.
    """
    if not inst.is_sorted:
        raise ValueError("sc_threshold requires a value-sorted instance")
    vs, ps = inst.values, inst.probs
    best = 0.0
    acc = 0.0  # TAL(I, v) for the value group being folded
    i = len(vs) - 1
    while i >= 0:
        j = i
        while j >= 0 and vs[j] == vs[i]:
            acc = ps[j] * vs[j] + (1.0 - ps[j]) * acc
            j -= 1
        v_seg = vs[i]
        lower = vs[j] if j >= 0 else 0.0
        if v_seg > 0.0:
            if acc >= v_seg:
                cand = v_seg
            elif acc > lower:
                cand = acc
            else:
                cand = None
            if cand is not None and cand > best:
                best = cand
        i = j
    return best


def tau_star(inst: BernoulliInstance, alpha: float) -> tuple[float, int]:
    """Known-quality base threshold and its witnessing prefix length.

    Scans prefixes from the full instance down and returns the
    self-consistent threshold of the largest prefix I^(k) with
    eta(I^(k)) >= alpha * v_k.  Returns (0.0, 0) when no prefix qualifies;
    with a zero base the effective threshold is alpha times the realized
    maximum, a corner reported separately by the check suites.
    """
    if not inst.is_sorted:
        raise ValueError("tau_star requires a value-sorted instance")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    vs = inst.values
    for k in range(len(vs), 0, -1):
        eta = sc_threshold(prefix(inst, k))
        if eta >= alpha * vs[k - 1]:
            return eta, k
    return 0.0, 0


# ---------------------------------------------------------------------------
# Tail-mass threshold
# ---------------------------------------------------------------------------

#: fraction of E[max] that must sit above a tail-threshold segment for the
#: deterministic shortcut, and the relative residual the construction targets
_EXACT_REL_TOL = 1e-12


def _discrete_tail_threshold(inst: Instance, c: float, alpha: float) -> ThresholdPolicy:
    atoms, _ = max_law(inst)
    if not atoms:
        raise ValueError("tail threshold requires OPT > 0")
    vals = [v for v, _ in atoms]
    # G[k] = E[M 1[M >= t]] for t in the segment ending at vals[k]
    tail = 0.0
    g = [0.0] * len(vals)
    for k in range(len(vals) - 1, -1, -1):
        tail += vals[k] * atoms[k][1]
        g[k] = tail
    opt = g[0]
    target = c * opt
    for k, gk in enumerate(g):
        if abs(gk - target) <= _EXACT_REL_TOL * opt:
            return ThresholdPolicy(vals[k], None, alpha)
    # Mix two adjacent segments with a uniform offset straddling vals[k].
    k = max(idx for idx, gk in enumerate(g) if gk > target)
    g_next = g[k + 1] if k + 1 < len(g) else 0.0
    lam = (target - g_next) / (g[k] - g_next)
    min_gap = min((b - a for a, b in zip(vals, vals[1:])), default=math.inf)
    delta = min(min_gap / 2.0, 1e-3 * vals[-1], vals[0])
    return ThresholdPolicy(vals[k] - lam * delta, delta, alpha)


def _continuous_max_sf(inst: GeneralInstance, x: float) -> float:
    prod = 1.0
    for d in inst.vars:
        prod *= float(d.cdf(x))
    return 1.0 - prod


def continuous_excess(inst: GeneralInstance, t: float) -> float:
    """E[(M - t)+] for a continuous instance, integrating the max's survival function."""
    if t < 0.0:
        return continuous_excess(inst, 0.0) - t
    uppers = [d.upper for d in inst.vars]
    scale = max(1.0, sum(d.tail_integral(0.0) for d in inst.vars))
    if all(math.isfinite(u) for u in uppers):
        hi = max(uppers)
    else:
        # Truncate the improper integral where the union-bound tail is negligible.
        hi = max([1.0, t] + [u for u in uppers if math.isfinite(u)])
        while sum(d.tail_integral(hi) for d in inst.vars) > 1e-14 * scale:
            hi *= 2.0
    if t >= hi:
        return 0.0
    kinks = sorted({p for d in inst.vars
                    for p in (getattr(d, "lo", None), d.upper)
                    if p is not None and math.isfinite(p) and t < p < hi})
    integral, _ = integrate.quad(lambda x: _continuous_max_sf(inst, x), t, hi,
                                 points=kinks or None, limit=300,
                                 epsabs=1e-13 * scale, epsrel=1e-11)
    return integral


def continuous_tail_mass(inst: GeneralInstance, t: float) -> float:
    """E[M 1[M >= t]] for a continuous instance: t Pr[M >= t] + E[(M - t)+]."""
    if t <= 0.0:
        return continuous_excess(inst, 0.0)
    return t * _continuous_max_sf(inst, t) + continuous_excess(inst, t)


def _continuous_tail_threshold(inst: GeneralInstance, c: float, alpha: float) -> ThresholdPolicy:
    opt = continuous_tail_mass(inst, 0.0)
    if opt <= 0.0:
        raise ValueError("tail threshold requires OPT > 0")
    target = c * opt
    hi = max(opt, 1.0)
    for _ in range(200):
        if continuous_tail_mass(inst, hi) < target:
            break
        hi *= 2.0
    else:
        raise ArithmeticError("failed to bracket the tail threshold")
    lo = 0.0
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if continuous_tail_mass(inst, mid) >= target:
            lo = mid
        else:
            hi = mid
    return ThresholdPolicy(0.5 * (lo + hi), None, alpha)


def tail_threshold(inst: Instance, c: float, alpha: float = 0.0) -> ThresholdPolicy:
    """Base threshold T(c) with E[M 1[M >= T]] = c * E[max].

    Continuous instances get a deterministic threshold from bisection on the
    nonincreasing tail map.  Discrete instances get either an exactly
    achieving deterministic threshold (when a segment hits c * OPT) or the
    randomized uniform-offset construction; delta is half the smallest gap
    between distinct values, capped at 1e-3 times the top value.
    """
    if not 0.0 < c < 1.0:
        raise ValueError("c must lie in (0, 1)")
    if isinstance(inst, BernoulliInstance) or (isinstance(inst, GeneralInstance) and inst.is_discrete):
        return _discrete_tail_threshold(inst, c, alpha)
    if isinstance(inst, GeneralInstance) and inst.is_continuous:
        return _continuous_tail_threshold(inst, c, alpha)
    raise ValueError("tail_threshold supports fully discrete or fully continuous instances")


# ---------------------------------------------------------------------------
# Policy evaluation helpers
# ---------------------------------------------------------------------------


def policy_value(inst: BernoulliInstance, policy: ThresholdPolicy) -> float:
    """Exact expected value of the rule defined by ``policy`` on a Bernoulli instance."""
    if policy.randomized_delta is None:
        return tal_alpha(inst, policy.base, policy.alpha)
    return tal_alpha_randomized(inst, policy.base, policy.randomized_delta, policy.alpha)


def expected_tail_at(inst: BernoulliInstance, policy: ThresholdPolicy,
                     divisor: float = 1.0) -> tuple[float, float]:
    """(Pr[M >= t], E[M 1[M >= t]]) at t = (base + offset) / divisor, averaged
    over the policy's randomization."""
    if policy.randomized_delta is None:
        return max_tail(inst, policy.base / divisor)
    lo, hi = policy.base, policy.base + policy.randomized_delta
    bps = [v * divisor for v in inst.values]
    prob = uniform_step_average(lambda b: max_tail(inst, b / divisor)[0], lo, hi, bps)
    mass = uniform_step_average(lambda b: max_tail(inst, b / divisor)[1], lo, hi, bps)
    return prob, mass

"""Ground-truth engines.

Everything here is brute force on purpose: exhaustive enumeration of the
outcome space, exhaustive search over candidate thresholds, and the classical
backward-induction optimal online policy.  These are the references the fast
evaluators are tested against, so they share no code with them.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .core import BernoulliInstance, GeneralInstance, Instance, PointMass
from .exact_eval import tal_alpha, tal_realized

MAX_ENUM_VARS = 24
_BLOCK = 1 << 16


def _check_enum_size(n: int) -> None:
    if n > MAX_ENUM_VARS:
        raise ValueError(f"enumeration limited to {MAX_ENUM_VARS} variables, got {n}")


def bernoulli_outcome_table(inst: BernoulliInstance) -> tuple[np.ndarray, np.ndarray]:
    """All 2^n realizations of a Bernoulli instance: (values matrix, probabilities)."""
    n = len(inst)
    _check_enum_size(n)
    if n > 20:
        raise ValueError("outcome table too large to materialize; use the streaming paths")
    vs = np.array(inst.values)
    ps = np.array(inst.probs)
    masks = (np.arange(1 << n)[:, None] >> np.arange(n)) & 1 == 1
    vals = np.where(masks, vs, 0.0)
    probs = np.prod(np.where(masks, ps, 1.0 - ps), axis=1)
    return vals, probs


def _enumerate_bernoulli(inst: BernoulliInstance, outcome_value) -> float:
    """fsum over 2^n outcomes of prob * outcome_value(vals_block) (vectorized per block)."""
    n = len(inst)
    _check_enum_size(n)
    vs = np.array(inst.values)
    ps = np.array(inst.probs)
    block_sums = []
    for base in range(0, 1 << n, _BLOCK):
        idx = np.arange(base, min(base + _BLOCK, 1 << n))
        masks = (idx[:, None] >> np.arange(n)) & 1 == 1
        vals = np.where(masks, vs, 0.0)
        probs = np.prod(np.where(masks, ps, 1.0 - ps), axis=1)
        block_sums.append(math.fsum((probs * outcome_value(vals)).tolist()))
    return math.fsum(block_sums)


def _stopped_values(vals: np.ndarray, tau: float, alpha: float) -> np.ndarray:
    """Value taken by the augmented rule on each realization row."""
    m = vals.max(axis=1)
    zeta = np.maximum(tau, alpha * m)
    cleared = vals >= zeta[:, None]
    rows = np.arange(vals.shape[0])
    picked = vals[rows, cleared.argmax(axis=1)]
    return np.where(cleared.any(axis=1), picked, 0.0)


def _discrete_outcome_lists(inst: GeneralInstance) -> list[list[tuple[float, float]]]:
    lists = []
    for d in inst.vars:
        if not isinstance(d, PointMass):
            raise ValueError("enumeration over general instances needs point-mass variables")
        outcomes = [(v, p) for v, p in d.atoms if p > 0]
        if d.zero_mass > 0:
            outcomes.insert(0, (0.0, d.zero_mass))
        lists.append(outcomes)
    total = 1
    for lst in lists:
        total *= max(1, len(lst))
        if total > 1 << 22:
            raise ValueError("discrete outcome space too large to enumerate")
    return lists


def _enumerate_discrete(inst: GeneralInstance, outcome_value) -> float:
    terms = []
    for combo in itertools.product(*_discrete_outcome_lists(inst)):
        prob = 1.0
        for _, p in combo:
            prob *= p
        if prob == 0.0:
            continue
        terms.append(prob * outcome_value([v for v, _ in combo]))
    return math.fsum(terms)


def enumerate_tal_alpha(inst: Instance, tau: float, alpha: float) -> float:
    """E[TAL_alpha] by summing every outcome of the instance; the reference
    the exact O(n^2) evaluator is checked against."""
    if isinstance(inst, BernoulliInstance):
        return _enumerate_bernoulli(inst, lambda vals: _stopped_values(vals, tau, alpha))

    def value(values: list[float]) -> float:
        zeta = max(tau, alpha * max(values))
        return tal_realized(values, zeta)

    return _enumerate_discrete(inst, value)


def enumerate_opt(inst: Instance) -> float:
    """E[max] by exhaustive enumeration."""
    if isinstance(inst, BernoulliInstance):
        return _enumerate_bernoulli(inst, lambda vals: vals.max(axis=1))
    return _enumerate_discrete(inst, max)


def best_threshold(inst: BernoulliInstance, alpha: float) -> tuple[float, float]:
    """Exhaustive search for an optimal base threshold.

    TAL_alpha is piecewise constant in the base threshold with breakpoints
    only at instance values, so {0} + values + segment midpoints is an
    exhaustive candidate set; midpoints are kept to probe the half-open
    segment convention.
    """
    _check_enum_size(len(inst))
    if not inst.is_sorted:
        raise ValueError("best_threshold requires a value-sorted instance")
    distinct = sorted(set(inst.values))
    candidates = [0.0] + distinct + [0.5 * (a + b) for a, b in zip(distinct, distinct[1:])]
    best_tau, best_val = 0.0, -math.inf
    for tau in sorted(candidates):
        val = tal_alpha(inst, tau, alpha)
        if val > best_val:
            best_tau, best_val = tau, val
    return best_tau, best_val


def dp_optimal_online(inst: Instance) -> float:
    """Optimal no-prediction online value by backward induction:
    V_{n+1} = 0 and V_i = E[max(X_i, V_{i+1})]."""
    value = 0.0
    for d in reversed(list(inst)):
        if isinstance(d, PointMass):
            atoms, residual = list(d.atoms), d.zero_mass
        else:  # BernoulliVar
            atoms, residual = [(d.v, d.p)], 1.0 - d.p
        value = sum(p * max(v, value) for v, p in atoms) + residual * value
    return value

"""Pessimistic instance transforms.

``discretize`` maps a general instance onto a finite geometric value grid:
truncate where the maximum's excess drops below ``delta`` times E[max], round
every draw down to the nearest grid point (draws under the grid floor become
zero), and carry the prediction quality through as ``alpha / (1 + delta)``.
``bernoullify`` expands each finitely supported variable into one scaled
Bernoulli copy per support point, chosen so the running maximum of the
copies reproduces the variable's law exactly.  ``full_reduction`` chains
discretize, bernoullify, and a stable sort.

None of these transforms can raise the augmented threshold rule's expected
value (for the discretization this holds realization by realization at any
grid threshold: a rounded draw clears a grid threshold only if the original
did, the transformed maximum never exceeds the original one, and the
adjusted quality keeps every original acceptance above the transformed
effective threshold).  That is exactly what the dominance checks in the
verification suites assert.  Rounding down costs at most a (1 + delta)
factor plus the truncation and floor budgets, so the transformed E[max]
retains at least a (1 - 2 delta) / (1 + delta) fraction of the original.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

from .core import (
    BernoulliInstance,
    BernoulliVar,
    GeneralInstance,
    Instance,
    PointMass,
    max_law,
    sort_instance,
    to_general,
)
from .thresholds import continuous_excess


@dataclass(frozen=True)
class DiscretizationConfig:
    """Derived quantities of one discretization: grid ratio ``delta``,
    E[max] of the input, the truncation level, and the value grid."""

    delta: float
    expected_max: float
    truncation_level: float
    grid: tuple[float, ...]
    vanished_vars: tuple[int, ...] = ()  # support entirely under the grid floor; maps to zero

    @property
    def alpha_factor(self) -> float:
        return 1.0 / (1.0 + self.delta)


def _discrete_excess_inverse(atoms: list[tuple[float, float]], target: float) -> float:
    """Smallest v >= 0 with E[(M - v)+] <= target when M has the given atoms.

    The excess is piecewise linear and decreasing, so walk segments from the
    top and solve the linear piece that brackets the target.
    """
    vals = [v for v, _ in atoms]
    sw = 0.0
    sm = 0.0
    for j in range(len(atoms) - 1, -1, -1):
        v, p = atoms[j]
        sw += p
        sm += p * v
        lower = vals[j - 1] if j > 0 else 0.0
        cand = (sm - target) / sw
        if cand >= lower:
            return max(cand, 0.0)
    return 0.0


def _continuous_excess_inverse(inst: GeneralInstance, target: float, scale: float) -> float:
    if continuous_excess(inst, 0.0) <= target:
        return 0.0
    hi = max(1.0, scale)
    for _ in range(200):
        if continuous_excess(inst, hi) <= target:
            break
        hi *= 2.0
    else:
        raise ArithmeticError("failed to bracket the truncation level")
    lo = 0.0
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if continuous_excess(inst, mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi  # the >= side; overshoot only enlarges the grid


def plan_discretization(inst: GeneralInstance, delta: float) -> DiscretizationConfig:
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if inst.is_discrete:
        atoms, _ = max_law(inst)
        if not atoms:
            raise ValueError("discretization requires E[max] > 0")
        m = math.fsum(v * p for v, p in atoms)
        m_prime = _discrete_excess_inverse(atoms, delta * m)
    elif inst.is_continuous:
        m = continuous_excess(inst, 0.0)
        if m <= 0.0:
            raise ValueError("discretization requires E[max] > 0")
        m_prime = _continuous_excess_inverse(inst, delta * m, m)
    else:
        raise ValueError("mixed continuous/discrete instances are not supported")
    floor = delta * m
    if m_prime <= floor:
        k_top = 0
    else:
        k_top = max(0, math.ceil(math.log(m_prime / floor, 1.0 + delta)))
    while floor * (1.0 + delta) ** k_top < m_prime:  # guard against log round-off
        k_top += 1
    grid = tuple(floor * (1.0 + delta) ** k for k in range(k_top + 1))
    vanished = tuple(i for i, d in enumerate(inst.vars) if d.upper < grid[0])
    return DiscretizationConfig(delta, m, m_prime, grid, vanished)


def _floor_to_grid(grid: tuple[float, ...], u: float) -> float | None:
    """Largest grid point <= u, or None below the grid floor."""
    i = bisect_right(grid, u)
    return grid[i - 1] if i > 0 else None


def discretize(inst: Instance, delta: float) -> tuple[GeneralInstance, DiscretizationConfig]:
    """Truncate at the excess level, then round each draw down onto the grid.

    Draws below the grid floor become zero; the returned config carries the
    quality adjustment factor 1 / (1 + delta).
    """
    gen = to_general(inst) if isinstance(inst, BernoulliInstance) else inst
    cfg = plan_discretization(gen, delta)
    grid = cfg.grid
    new_vars = []
    for d in gen.vars:
        if isinstance(d, PointMass):
            acc: dict[float, float] = {}
            for v, p in d.atoms:
                u = _floor_to_grid(grid, min(v, cfg.truncation_level))
                if u is not None:
                    acc[u] = acc.get(u, 0.0) + p
            atoms = tuple(sorted(acc.items()))
        else:
            # P[X' = g_k] = P[min(X, M') in [g_k, g_{k+1})]; the bucket holding
            # the truncation level absorbs all mass above it.
            atoms_list = []
            for k, g in enumerate(grid):
                if g > cfg.truncation_level:
                    break
                nxt = grid[k + 1] if k + 1 < len(grid) else math.inf
                hi_cdf = 1.0 if nxt > cfg.truncation_level else float(d.cdf(nxt))
                p = max(0.0, hi_cdf - float(d.cdf(g)))
                if p > 0.0:
                    atoms_list.append((g, p))
            atoms = tuple(atoms_list)
        new_vars.append(PointMass(atoms))
    return GeneralInstance(tuple(new_vars)), cfg


def bernoullify(inst: Instance) -> BernoulliInstance:
    """Expand each finitely supported variable into scaled Bernoulli copies.

    Copy j keeps value v_j with probability P[X = v_j] / P[X <= v_j]; the max
    of a variable's copies is then distributed exactly as the variable.
    Copies are emitted in increasing value order within each variable.
    """
    gen = to_general(inst) if isinstance(inst, BernoulliInstance) else inst
    copies: list[BernoulliVar] = []
    for d in gen.vars:
        if not isinstance(d, PointMass):
            raise ValueError("bernoullify needs finitely supported variables")
        var_copies = []
        above = 0.0  # probability of strictly larger support points
        for v, p in reversed(d.atoms):
            at_most = 1.0 - above
            q = p / at_most if at_most > 0.0 else 0.0
            if q > 0.0:
                var_copies.append(BernoulliVar(v, min(q, 1.0)))
            above += p
        copies.extend(reversed(var_copies))
    return BernoulliInstance(tuple(copies))


def full_reduction(inst: Instance, delta: float, alpha: float) -> tuple[BernoulliInstance, float]:
    """discretize, bernoullify, sort; returns the sorted scaled Bernoulli
    instance and the adjusted prediction quality alpha / (1 + delta)."""
    disc, cfg = discretize(inst, delta)
    bern = bernoullify(disc)
    return sort_instance(bern), alpha * cfg.alpha_factor

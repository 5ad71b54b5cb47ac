"""Closed-form guarantee curves and the numeric searches that cross-check them.

Everything is a pure function of its arguments.  Grid resolutions and
tolerances used by the verification suites live in one ``CheckConfig`` record
so every check cites the same constants.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class CheckConfig:
    curve_grid: int = 1001          # alpha grids for curve comparisons
    monotone_grid: int = 10_000     # c grid for the decreasing-ratio check
    search_resolution: int = 2000   # boundary grid for the 3-Bernoulli search
    random_search_samples: int = 1_000_000
    optimization_tol: float = 1e-3  # grid/random search vs closed form


DEFAULT_CHECKS = CheckConfig()


@dataclass(frozen=True)
class BoundCurve:
    """A named guarantee curve alpha -> value on [0, 1]."""

    name: str
    evaluator: Callable[[float], float]

    def sample(self, alphas: Sequence[float]) -> list[tuple[float, float]]:
        return [(float(a), float(self.evaluator(a))) for a in alphas]

    def write_csv(self, path: str | Path, alphas: Sequence[float]) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["alpha", "value"])
            for a, v in self.sample(alphas):
                w.writerow([repr(a), repr(v)])


def bound_known(alpha: float) -> float:
    """Tight competitive ratio when the prediction quality is known."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return 1.0 / (2.0 - alpha)


def bound_oblivious(alpha: float) -> tuple[float, float]:
    """(lower, upper) competitive-ratio bounds for the quality-oblivious rule."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return 0.5 + alpha ** 3 / 4.0, 0.5 + alpha / 4.0


def g_robust(p: float) -> float:
    """No-prediction ratio of the tail-mass rule as a function of
    p = Pr[max >= threshold]; convex with minimum 1/2 at p = 1/2."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    return (4.0 * p * p - 6.0 * p + 3.0) / (4.0 * (1.0 - p))


def smallvalues_ratio(c: float, alpha: float, conditional: bool = False) -> float:
    """Guarantee of the tail-mass rule when no value can trigger the prediction.

    ``conditional=True`` returns the ratio against the tail mass itself
    (the inner fraction); otherwise against full E[max].
    """
    if not 0.0 <= c <= 1.0:
        raise ValueError("c must lie in [0, 1]")
    root = math.sqrt(1.0 - c)
    inner = (2.0 + (alpha - 2.0) * c + 2.0 * root) / (2.0 - c + 2.0 * root)
    return inner if conditional else c * inner


def smallvalues_monotone_check(alpha: float, grid_points: int = DEFAULT_CHECKS.monotone_grid) -> bool:
    """Numerically confirm the conditional ratio is nonincreasing in c."""
    cs = np.linspace(0.0, 1.0, grid_points)
    vals = [smallvalues_ratio(float(c), alpha, conditional=True) for c in cs]
    return all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# Three-Bernoulli optimization (worst bounded instance of the tail-mass rule)
# ---------------------------------------------------------------------------


def _three_bernoulli_objective(x0, x1, x2, k):
    num = x1 + k * x2 * (1.0 - x1)
    den = k * x2 + (1.0 - x2) * (1.0 - (1.0 - x1) * (1.0 - x0))
    return num / den


def three_bernoulli_min(k: float, t: float) -> float:
    """Closed-form minimum of the constrained three-Bernoulli ratio."""
    if k <= 1.0 or t <= 0.0:
        raise ValueError("need k > 1 and t > 0")
    root = math.sqrt(t + 1.0)
    return (t / (t + 1.0)) * ((2.0 * k + t + 2.0 * k * root) / (k * (2.0 + t + 2.0 * root)))


def three_bernoulli_grid_min(k: float, t: float,
                             resolution: int = DEFAULT_CHECKS.search_resolution) -> float:
    """Independent check of the closed form: grid search on the binding
    boundary x0 = 1, where x1 is pinned by the tail constraint."""
    if resolution < 100:
        raise ValueError("resolution too coarse")
    x2 = np.linspace(0.0, t / (k + t), resolution + 1)[1:]
    x1 = (t - (k + t) * x2) / ((t + 1.0) * (1.0 - x2))
    ok = (x1 >= 0.0) & (x1 <= 1.0) & (x2 < 1.0)
    vals = _three_bernoulli_objective(1.0, x1[ok], x2[ok], k)
    return float(vals.min())


def three_bernoulli_random_min(k: float, t: float,
                               samples: int = DEFAULT_CHECKS.random_search_samples,
                               seed: int = 0) -> float:
    """Random interior search over the full constraint surface; cross-checks
    that nothing beats the x0 = 1 boundary."""
    rng = np.random.default_rng(seed)
    x1 = rng.random(samples)
    x2 = rng.random(samples)
    denom = t * (1.0 - x1) * (1.0 - x2)
    with np.errstate(divide="ignore", invalid="ignore"):
        x0 = (k * x2 + (1.0 - x2) * x1) / denom
        ok = (denom > 0.0) & (x0 >= 0.0) & (x0 <= 1.0)
        vals = _three_bernoulli_objective(x0[ok], x1[ok], x2[ok], k)
    return float(vals.min()) if vals.size else math.inf


# ---------------------------------------------------------------------------
# Prediction-regime helpers
# ---------------------------------------------------------------------------


def tail_g(alpha: float) -> float:
    """Upper bound on Pr[max >= base threshold / alpha] for the tail-mass rule."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    return 1.0 / (1.0 / (3.0 * alpha) + 1.0)


def early_stop_g(alpha: float) -> float:
    """Bound on the chance a competing value stops the rule before the maximum."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    return 1.0 / (1.0 / (3.0 * alpha * alpha) + 1.0)


def combined(alpha: float) -> float:
    """Prediction-regime conditional ratio (1 - g) + alpha * g."""
    g = early_stop_g(alpha)
    return (1.0 - g) + alpha * g


def cr_frontier(r: float) -> tuple[float, float]:
    """Achievable (consistency, mixing probability) for target robustness r
    under unrestricted predictions: C = 1 - r via p = 1 - 2r."""
    if not 0.0 <= r <= 0.5:
        raise ValueError("r must lie in [0, 1/2]")
    return 1.0 - r, 1.0 - 2.0 * r


KNOWN_CURVE = BoundCurve("known", bound_known)
OBLIVIOUS_LOWER_CURVE = BoundCurve("oblivious_lower", lambda a: bound_oblivious(a)[0])
OBLIVIOUS_UPPER_CURVE = BoundCurve("oblivious_upper", lambda a: bound_oblivious(a)[1])

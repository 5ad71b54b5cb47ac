"""Named instance constructors and random instance generators.

The named families are the small hard instances that drive the tightness and
impossibility experiments; the random generators produce the corpora the
property suites sweep over.  Values in the random corpus are log-uniform so
both regimes that matter show up: a rare high value against a safe low one.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    BernoulliInstance,
    Exponential,
    GeneralInstance,
    PointMass,
    TruncatedExponential,
    Uniform,
    instance,
    sort_instance,
)


def known_lb(alpha: float) -> BernoulliInstance:
    """Two variables certifying the known-quality ceiling: a sure 1 and a
    1/alpha long shot of probability alpha."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    return instance([(1.0, 1.0), (1.0 / alpha, alpha)])


def oblivious_lb(eps: float) -> BernoulliInstance:
    """Two variables on which no quality-oblivious rule can be simultaneously
    1/2-robust and better than 3/4-consistent."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    return instance([(1.0, 1.0), (1.0 / eps + 1.0 / math.sqrt(eps), eps)])


def tight_oblivious(alpha: float, eps: float = 0.0) -> BernoulliInstance:
    """Instance family meeting the oblivious rule's upper bound 1/2 + alpha/4
    up to an eps term; at alpha = 1 the two-variable tight instance."""
    if alpha == 1.0:
        return instance([(1.0, 2.0 / 3.0), (2.0, 0.5)])
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if eps <= 0.0 or 1.0 + eps >= 1.0 / alpha:
        raise ValueError("need eps > 0 with 1 + eps < 1/alpha")
    return instance([
        (1.0, (1.0 + eps) / (1.0 + 2.0 * eps)),
        (1.0 + eps, 1.0 / (2.0 * (1.0 + eps))),
        (1.0 / alpha, alpha / (alpha + 1.0)),
    ])


def motivating(p2: float, p3: float) -> BernoulliInstance:
    """Three-value instance (1 sure, 2 w.p. p2, 4 w.p. p3) whose best base
    threshold flips with the parameters even at fixed prediction quality."""
    return instance([(1.0, 1.0), (2.0, p2), (4.0, p3)])


def cr_tradeoff(eps: float) -> BernoulliInstance:
    """Classic two-variable instance forcing consistency + robustness <= 1
    under unrestricted predictions."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    return instance([(1.0, 1.0), (1.0 / eps, eps)])


# ---------------------------------------------------------------------------
# Random corpora
# ---------------------------------------------------------------------------


def random_corpus_instance(rng: np.random.Generator,
                           min_vars: int = 2, max_vars: int = 10) -> BernoulliInstance:
    """Sorted Bernoulli instance: n ~ U{min..max}, values log-uniform in
    [1, 1000], probabilities uniform on (0, 1]."""
    n = int(rng.integers(min_vars, max_vars + 1))
    values = np.exp(rng.uniform(0.0, math.log(1000.0), n))
    probs = 1.0 - rng.random(n)
    return sort_instance(instance(zip(values, probs)))


def random_discrete_general(rng: np.random.Generator,
                            max_vars: int = 4, max_atoms: int = 3) -> GeneralInstance:
    """Small point-mass instance for enumeration-based checks; atom
    probabilities leave residual mass at zero."""
    n = int(rng.integers(2, max_vars + 1))
    dists = []
    for _ in range(n):
        k = int(rng.integers(1, max_atoms + 1))
        vals = np.sort(np.exp(rng.uniform(math.log(0.1), math.log(10.0), k)))
        while len(set(vals.tolist())) < k:  # regenerate on (measure-zero) ties
            vals = np.sort(np.exp(rng.uniform(math.log(0.1), math.log(10.0), k)))
        raw = rng.random(k)
        probs = raw / raw.sum() * rng.uniform(0.3, 0.95)
        dists.append(PointMass(tuple(zip(vals.tolist(), probs.tolist()))))
    return GeneralInstance(tuple(dists))


def random_continuous_instance(rng: np.random.Generator,
                               max_vars: int = 6) -> GeneralInstance:
    """Mix of uniform, exponential, and truncated-exponential variables."""
    n = int(rng.integers(2, max_vars + 1))
    dists = []
    for _ in range(n):
        kind = int(rng.integers(0, 3))
        if kind == 0:
            lo = rng.uniform(0.0, 5.0)
            dists.append(Uniform(lo, lo + rng.uniform(0.5, 10.0)))
        elif kind == 1:
            dists.append(Exponential(math.exp(rng.uniform(math.log(0.1), math.log(2.0)))))
        else:
            dists.append(TruncatedExponential(
                math.exp(rng.uniform(math.log(0.1), math.log(2.0))),
                rng.uniform(1.0, 10.0)))
    return GeneralInstance(tuple(dists))

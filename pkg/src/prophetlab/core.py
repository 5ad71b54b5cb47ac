"""Domain types and instance algebra for threshold-stopping experiments.

Two instance classes are supported: scaled Bernoulli instances (every reward
is ``v_i`` with probability ``p_i`` and 0 otherwise) and general instances
built from a small set of distribution families.  Bernoulli instances are the
canonical worst-case class; everything downstream assumes values are
non-negative and variables are independent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Union

import numpy as np


class InstanceFormatError(ValueError):
    """Raised when an instance file is malformed or breaks an invariant."""


# ---------------------------------------------------------------------------
# Bernoulli instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BernoulliVar:
    """Reward worth ``v`` with probability ``p`` and 0 otherwise."""

    v: float
    p: float


@dataclass(frozen=True)
class BernoulliInstance:
    """Ordered sequence of independent scaled Bernoulli rewards."""

    vars: tuple[BernoulliVar, ...]

    def __len__(self) -> int:
        return len(self.vars)

    def __iter__(self) -> Iterator[BernoulliVar]:
        return iter(self.vars)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(x.v for x in self.vars)

    @property
    def probs(self) -> tuple[float, ...]:
        return tuple(x.p for x in self.vars)

    @property
    def is_sorted(self) -> bool:
        vs = self.values
        return all(a <= b for a, b in zip(vs, vs[1:]))

    @property
    def has_ties(self) -> bool:
        """True when two variables share a value (tie-sensitive analyses flag these)."""
        vs = self.values
        return len(set(vs)) < len(vs)


def instance(pairs: Iterable[tuple[float, float]]) -> BernoulliInstance:
    """Build a Bernoulli instance from ``(value, probability)`` pairs."""
    return BernoulliInstance(tuple(BernoulliVar(float(v), float(p)) for v, p in pairs))


# ---------------------------------------------------------------------------
# General instances: distribution families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    is_continuous = True

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def tail_integral(self, t: float) -> float:
        """E[(X - t)+] in closed form."""
        if t >= self.hi:
            return 0.0
        if t <= self.lo:
            return 0.5 * (self.lo + self.hi) - t
        return (self.hi - t) ** 2 / (2.0 * (self.hi - self.lo))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * rng.random(size)

    @property
    def upper(self) -> float:
        return self.hi


@dataclass(frozen=True)
class Exponential:
    rate: float

    is_continuous = True

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0.0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def tail_integral(self, t: float) -> float:
        if t <= 0.0:
            return 1.0 / self.rate - t
        return math.exp(-self.rate * t) / self.rate

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.exponential(1.0 / self.rate, size)

    @property
    def upper(self) -> float:
        return math.inf


@dataclass(frozen=True)
class TruncatedExponential:
    """Exponential clipped at ``cap``: min(Exp(rate), cap).  Bounded-support variant."""

    rate: float
    cap: float

    is_continuous = True

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        base = np.where(x > 0.0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)
        return np.where(x >= self.cap, 1.0, base)

    def tail_integral(self, t: float) -> float:
        mean = -math.expm1(-self.rate * self.cap) / self.rate
        if t <= 0.0:
            return mean - t
        if t >= self.cap:
            return 0.0
        return (math.exp(-self.rate * t) - math.exp(-self.rate * self.cap)) / self.rate

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.minimum(rng.exponential(1.0 / self.rate, size), self.cap)

    @property
    def upper(self) -> float:
        return self.cap


@dataclass(frozen=True)
class PointMass:
    """Finite support on positive atoms; any missing probability sits at 0."""

    atoms: tuple[tuple[float, float], ...]  # (value, prob), ascending values

    is_continuous = False

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        vals = np.array([v for v, _ in self.atoms])
        cum = np.concatenate(([self.zero_mass], self.zero_mass + np.cumsum([p for _, p in self.atoms])))
        idx = np.searchsorted(vals, x, side="right")
        return np.where(x < 0.0, 0.0, cum[idx])

    @property
    def zero_mass(self) -> float:
        return max(0.0, 1.0 - sum(p for _, p in self.atoms))

    def tail_integral(self, t: float) -> float:
        out = sum(p * (v - t) for v, p in self.atoms if v > t)
        if t < 0.0:
            out += self.zero_mass * (-t)
        return out

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        cum = np.cumsum([p for _, p in self.atoms])
        vals = np.array([v for v, _ in self.atoms])
        idx = np.searchsorted(cum, u, side="left")
        out = np.where(idx < len(vals), vals[np.minimum(idx, len(vals) - 1)], 0.0)
        return out

    @property
    def upper(self) -> float:
        return self.atoms[-1][0] if self.atoms else 0.0


DistSpec = Union[Uniform, Exponential, TruncatedExponential, PointMass]


@dataclass(frozen=True)
class GeneralInstance:
    """Ordered sequence of independent non-negative rewards from named families."""

    vars: tuple[DistSpec, ...]

    def __len__(self) -> int:
        return len(self.vars)

    def __iter__(self) -> Iterator[DistSpec]:
        return iter(self.vars)

    @property
    def is_continuous(self) -> bool:
        return all(d.is_continuous for d in self.vars)

    @property
    def is_discrete(self) -> bool:
        return all(isinstance(d, PointMass) for d in self.vars)


Instance = Union[BernoulliInstance, GeneralInstance]


@dataclass(frozen=True)
class Realization:
    """One drawn value per variable, with the running maximum cached."""

    values: tuple[float, ...]
    max: float

    @classmethod
    def of(cls, values: Iterable[float]) -> "Realization":
        vals = tuple(float(v) for v in values)
        return cls(vals, max(vals))


def to_general(inst: BernoulliInstance) -> GeneralInstance:
    """View a Bernoulli instance as a general instance of one-atom point masses."""
    return GeneralInstance(tuple(PointMass(((x.v, x.p),)) for x in inst.vars))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _validate_bernoulli(inst: BernoulliInstance) -> list[str]:
    errors = []
    if len(inst) == 0:
        errors.append("empty instance")
    for i, x in enumerate(inst):
        if not math.isfinite(x.v) or not math.isfinite(x.p):
            errors.append(f"var {i}: non-finite parameter")
            continue
        if x.v < 0:
            errors.append(f"var {i}: negative value {x.v}")
        if x.p < 0:
            errors.append(f"var {i}: probability < 0")
        if x.p > 1:
            errors.append(f"var {i}: probability > 1")
        if x.p > 0 and x.v <= 0:
            errors.append(f"var {i}: zero value with positive probability (drop the atom instead)")
    return errors


def _validate_dist(i: int, d: DistSpec) -> list[str]:
    errors = []
    if isinstance(d, Uniform):
        if not (math.isfinite(d.lo) and math.isfinite(d.hi)) or d.lo < 0 or d.hi <= d.lo:
            errors.append(f"var {i}: uniform requires 0 <= lo < hi")
    elif isinstance(d, Exponential):
        if not math.isfinite(d.rate) or d.rate <= 0:
            errors.append(f"var {i}: exponential requires rate > 0")
    elif isinstance(d, TruncatedExponential):
        if not (math.isfinite(d.rate) and math.isfinite(d.cap)) or d.rate <= 0 or d.cap <= 0:
            errors.append(f"var {i}: truncexp requires rate > 0 and cap > 0")
    elif isinstance(d, PointMass):
        total = 0.0
        prev = 0.0
        for v, p in d.atoms:
            if not (math.isfinite(v) and math.isfinite(p)):
                errors.append(f"var {i}: non-finite atom")
                break
            if v <= prev:
                errors.append(f"var {i}: atoms must have strictly increasing positive values")
                break
            if p < 0 or p > 1:
                errors.append(f"var {i}: atom probability outside [0,1]")
                break
            prev = v
            total += p
        else:
            if total > 1.0 + 1e-12:
                errors.append(f"var {i}: atom probabilities sum to {total} > 1")
    else:
        errors.append(f"var {i}: unknown distribution {d!r}")
    return errors


def validate(inst: Instance) -> list[str]:
    """Return every invariant violation; an empty list means the instance is valid."""
    if isinstance(inst, BernoulliInstance):
        return _validate_bernoulli(inst)
    errors = []
    if len(inst) == 0:
        errors.append("empty instance")
    for i, d in enumerate(inst):
        errors.extend(_validate_dist(i, d))
    return errors


# ---------------------------------------------------------------------------
# Instance algebra
# ---------------------------------------------------------------------------


def sort_instance(inst: BernoulliInstance) -> BernoulliInstance:
    """Permute variables so values are nondecreasing; ties keep their order."""
    return BernoulliInstance(tuple(sorted(inst.vars, key=lambda x: x.v)))


def prefix(inst: BernoulliInstance, k: int) -> BernoulliInstance:
    """Sub-instance of the first ``k`` variables (1-based count)."""
    if not 1 <= k <= len(inst):
        raise ValueError(f"prefix index {k} out of range 1..{len(inst)}")
    return BernoulliInstance(inst.vars[:k])


def max_law(inst: Instance) -> tuple[list[tuple[float, float]], float]:
    """Distribution of the realized maximum of a discrete instance.

    Returns ``(atoms, zero_mass)`` where atoms is an ascending list of
    ``(value, prob)`` over the positive support of the maximum.
    """
    if isinstance(inst, BernoulliInstance):
        per_var = [[(x.v, x.p)] if x.p > 0 else [] for x in inst.vars]
    elif isinstance(inst, GeneralInstance) and inst.is_discrete:
        per_var = [[(v, p) for v, p in d.atoms if p > 0] for d in inst.vars]
    else:
        raise ValueError("max_law requires a discrete instance")

    union = sorted({v for atoms in per_var for v, _ in atoms if v > 0})
    # P[X_i <= u] at each union point, then multiply across variables.
    below = np.ones(len(union) + 1)  # index 0 is P[M <= 0]
    for atoms in per_var:
        vals = [v for v, _ in atoms]
        cums = np.concatenate(([0.0], np.cumsum([p for _, p in atoms])))
        residual = 1.0 - (cums[-1] if len(cums) else 0.0)
        idx = np.searchsorted(vals, np.array([0.0] + union), side="right")
        below *= residual + cums[idx]
    zero_mass = float(below[0])
    atoms_out = []
    for k, u in enumerate(union):
        p = float(below[k + 1] - below[k])
        if p > 0.0:
            atoms_out.append((u, p))
    return atoms_out, zero_mass


# ---------------------------------------------------------------------------
# JSON instance format
# ---------------------------------------------------------------------------

_FAMILY_TAGS = {
    Uniform: "uniform",
    Exponential: "exponential",
    TruncatedExponential: "truncexp",
    PointMass: "pointmass",
}


def instance_to_dict(inst: Instance) -> dict:
    if isinstance(inst, BernoulliInstance):
        return {
            "type": "bernoulli",
            "sorted": inst.is_sorted,
            "vars": [{"v": x.v, "p": x.p} for x in inst.vars],
        }
    out = []
    for d in inst.vars:
        if isinstance(d, Uniform):
            out.append({"family": "uniform", "lo": d.lo, "hi": d.hi})
        elif isinstance(d, Exponential):
            out.append({"family": "exponential", "rate": d.rate})
        elif isinstance(d, TruncatedExponential):
            out.append({"family": "truncexp", "rate": d.rate, "cap": d.cap})
        elif isinstance(d, PointMass):
            out.append({"family": "pointmass", "atoms": [{"v": v, "p": p} for v, p in d.atoms]})
        else:
            raise InstanceFormatError(f"unknown family {d!r}")
    return {"type": "general", "vars": out}


def _pointmass_from_atoms(raw_atoms) -> PointMass:
    # Zero-probability atoms are dropped; zero-valued atoms fold into the
    # residual mass at 0 either way.
    atoms = sorted((float(a["v"]), float(a["p"])) for a in raw_atoms)
    atoms = [(v, p) for v, p in atoms if p > 0 and v > 0]
    merged: list[tuple[float, float]] = []
    for v, p in atoms:
        if merged and merged[-1][0] == v:
            merged[-1] = (v, merged[-1][1] + p)
        else:
            merged.append((v, p))
    return PointMass(tuple(merged))


def instance_from_dict(data: dict) -> Instance:
    try:
        kind = data["type"]
        raw_vars = data["vars"]
    except (KeyError, TypeError) as exc:
        raise InstanceFormatError(f"missing field: {exc}") from exc

    if kind == "bernoulli":
        pairs = []
        for i, rv in enumerate(raw_vars):
            try:
                v, p = float(rv["v"]), float(rv["p"])
            except (KeyError, TypeError, ValueError) as exc:
                raise InstanceFormatError(f"var {i}: expected fields v, p") from exc
            if p > 0:  # drop observationally null atoms
                pairs.append((v, p))
        inst: Instance = instance(pairs)
        if data.get("sorted") and not inst.is_sorted:
            raise InstanceFormatError("flagged sorted but values are not nondecreasing")
    elif kind == "general":
        dists: list[DistSpec] = []
        for i, rv in enumerate(raw_vars):
            fam = rv.get("family")
            try:
                if fam == "uniform":
                    dists.append(Uniform(float(rv["lo"]), float(rv["hi"])))
                elif fam == "exponential":
                    dists.append(Exponential(float(rv["rate"])))
                elif fam == "truncexp":
                    dists.append(TruncatedExponential(float(rv["rate"]), float(rv["cap"])))
                elif fam == "pointmass":
                    dists.append(_pointmass_from_atoms(rv["atoms"]))
                else:
                    raise InstanceFormatError(f"var {i}: unknown family {fam!r}")
            except (KeyError, TypeError, ValueError) as exc:
                if isinstance(exc, InstanceFormatError):
                    raise
                raise InstanceFormatError(f"var {i}: bad parameters for family {fam!r}") from exc
        inst = GeneralInstance(tuple(dists))
    else:
        raise InstanceFormatError(f"unknown instance type {kind!r}")

    errors = validate(inst)
    if errors:
        raise InstanceFormatError("; ".join(errors))
    return inst


def dumps_instance(inst: Instance) -> str:
    """Canonical JSON: sorted fields, compact separators, shortest float repr."""
    return json.dumps(instance_to_dict(inst), sort_keys=True, separators=(",", ":"))


def loads_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"parse error at line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    return instance_from_dict(data)


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(inst) + "\n", encoding="utf-8")


def load_instance(path: str | Path) -> Instance:
    return loads_instance(Path(path).read_text(encoding="utf-8"))

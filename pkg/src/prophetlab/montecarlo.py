"""Seeded Monte Carlo evaluation of threshold policies.

Sampling is organized in chunks with per-chunk counter-based streams keyed by
(seed, chunk index), so a parallel run over chunks is bit-identical to the
serial run and adding threads never changes the estimate.  OPT and the
algorithm value are estimated from the same realizations (common random
numbers), and the ratio confidence interval uses the delta method on the
paired means.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import bound_oblivious
from .core import BernoulliInstance, GeneralInstance, Instance, to_general
from .exact_eval import EvalReport
from .thresholds import ThresholdPolicy, tail_threshold

PREDICTION_MODES = ("worst_case", "uniform_feasible")


@dataclass(frozen=True)
class McConfig:
    samples: int
    seed: int
    prediction_mode: str = "worst_case"
    chunks: int = 1

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.chunks < 1:
            raise ValueError("chunks must be >= 1")
        if self.prediction_mode not in PREDICTION_MODES:
            raise ValueError(f"prediction_mode must be one of {PREDICTION_MODES}")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PROPHETLAB_THREADS", "1")))
    except ValueError:
        return 1


def _chunk_sizes(samples: int, chunks: int) -> list[int]:
    base, rem = divmod(samples, chunks)
    return [base + 1 if i < rem else base for i in range(chunks)]


def _simulate_chunk(inst: GeneralInstance, policy: ThresholdPolicy, cfg: McConfig,
                    chunk: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(algorithm values, realized maxima) for one chunk.

    Draw order is fixed -- variables, then prediction uniforms, then the
    policy offset -- and the prediction uniforms are drawn in every mode so
    the two modes stay coupled on identical realizations.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((cfg.seed, chunk))))
    vals = np.empty((len(inst), k))
    for i, d in enumerate(inst.vars):
        vals[i] = d.sample(rng, k)
    pred_u = rng.random(k)
    if policy.randomized_delta is not None:
        eps = rng.random(k) * policy.randomized_delta
    else:
        eps = np.zeros(k)
    m = vals.max(axis=0)
    vtilde = policy.alpha * m
    if cfg.prediction_mode == "uniform_feasible":
        vtilde = vtilde + pred_u * (m - vtilde)
    zeta = np.maximum(policy.base + eps, vtilde)
    cleared = vals >= zeta[None, :]
    alg = np.where(cleared.any(axis=0),
                   vals[cleared.argmax(axis=0), np.arange(k)], 0.0)
    return alg, m


def sample_values(inst: Instance, policy: ThresholdPolicy,
                  cfg: McConfig) -> tuple[np.ndarray, np.ndarray]:
    """All per-sample (algorithm value, realized max) pairs, chunk order preserved."""
    gen = to_general(inst) if isinstance(inst, BernoulliInstance) else inst
    parts = [_simulate_chunk(gen, policy, cfg, i, k)
             for i, k in enumerate(_chunk_sizes(cfg.samples, cfg.chunks))]
    return (np.concatenate([a for a, _ in parts]),
            np.concatenate([m for _, m in parts]))


def mc_evaluate(inst: Instance, policy: ThresholdPolicy, cfg: McConfig) -> EvalReport:
    """Monte Carlo estimate of the policy value, OPT, their ratio, and a 95%
    delta-method CI half-width on the ratio."""
    gen = to_general(inst) if isinstance(inst, BernoulliInstance) else inst
    sizes = _chunk_sizes(cfg.samples, cfg.chunks)

    def run(chunk: int) -> tuple[float, float, float, float, float]:
        alg, m = _simulate_chunk(gen, policy, cfg, chunk, sizes[chunk])
        return (float(alg.sum()), float((alg * alg).sum()),
                float(m.sum()), float((m * m).sum()), float((alg * m).sum()))

    threads = min(_threads(), cfg.chunks)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(cfg.chunks)))
    else:
        parts = [run(i) for i in range(cfg.chunks)]

    n = cfg.samples
    sa, saa, sm, smm, sam = (math.fsum(p[i] for p in parts) for i in range(5))
    mean_a, mean_m = sa / n, sm / n
    ratio = mean_a / mean_m if mean_m > 0 else 1.0
    ci = None
    alg_se = None
    if n > 1:
        var_a = max(0.0, (saa - n * mean_a * mean_a) / (n - 1))
        var_m = max(0.0, (smm - n * mean_m * mean_m) / (n - 1))
        cov = (sam - n * mean_a * mean_m) / (n - 1)
        alg_se = math.sqrt(var_a / n)
        if mean_m > 0:
            var_ratio = max(0.0, var_a - 2.0 * ratio * cov + ratio * ratio * var_m)
            ci = 1.96 * math.sqrt(var_ratio / n) / mean_m
        else:
            ci = 0.0
    return EvalReport.build(mean_m, mean_a, "montecarlo", ci, alg_se)


# ---------------------------------------------------------------------------
# Ratio sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    ratio: float
    ci: float | None
    lower_bound: float
    upper_bound: float
    method: str


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    def write_csv(self, f) -> None:
        f.write("alpha,ratio,ci,lower_bound,upper_bound,method\n")
        for r in self.rows:
            ci = "" if r.ci is None else repr(r.ci)
            f.write(f"{r.alpha!r},{r.ratio!r},{ci},{r.lower_bound!r},{r.upper_bound!r},{r.method}\n")


def mc_ratio_sweep(inst: Instance, c: float, alphas: Sequence[float],
                   cfg: McConfig) -> SweepResult:
    """Build the tail threshold T(c) once, then estimate the ratio at every
    prediction quality on the grid, with the oblivious bound columns."""
    policy = tail_threshold(inst, c)
    rows = []
    for a in alphas:
        rep = mc_evaluate(inst, policy.with_alpha(float(a)), cfg)
        lo, up = bound_oblivious(float(a))
        rows.append(SweepRow(float(a), rep.ratio, rep.ci_halfwidth, lo, up, "montecarlo"))
    return SweepResult(tuple(rows))

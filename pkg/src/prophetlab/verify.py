"""Check suites: oracle equivalence, bound verification, transform dominance,
monotonicity properties, and the impossibility sweeps.

Each check returns a dict with the case count, a capped list of failure
messages, and summary stats; suites bundle related checks for the CLI.  The
acceptance tests call the same functions with their own case counts, so the
numbers asserted there and the numbers reported by ``prophetlab verify`` come
from one implementation.
"""

from __future__ import annotations

import math

import numpy as np

from . import bounds, families, oracle, reductions
from .core import BernoulliInstance, GeneralInstance, max_law, prefix, sort_instance
from .exact_eval import max_tail, opt_value, tal, tal_alpha
from .thresholds import expected_tail_at, sc_threshold, tail_threshold, tau_star

_MAX_FAILURES = 10


def _report(name: str, cases: int, failures: list[str], **stats) -> dict:
    return {
        "name": name,
        "cases": cases,
        "ok": not failures,
        "failures": failures[:_MAX_FAILURES],
        "failure_count": len(failures),
        "stats": stats,
    }


def _random_tau(rng: np.random.Generator, inst: BernoulliInstance) -> float:
    vmax = max(inst.values)
    u = rng.random()
    if u < 0.15:
        return 0.0
    if u < 0.45:  # exactly at a value, probing the half-open segment boundary
        return float(rng.choice(inst.values))
    return float(rng.uniform(0.0, 1.1 * vmax))


def _random_alpha(rng: np.random.Generator) -> float:
    u = rng.random()
    if u < 0.1:
        return 0.0
    if u < 0.2:
        return 1.0
    return float(rng.random())


# ---------------------------------------------------------------------------
# Oracle suite
# ---------------------------------------------------------------------------


def check_oracle_equivalence(seed: int = 0, n_cases: int = 500, tol: float = 1e-10) -> dict:
    rng = np.random.default_rng(seed)
    failures = []
    worst = 0.0
    for case in range(n_cases):
        inst = families.random_corpus_instance(rng)
        tau = _random_tau(rng, inst)
        alpha = _random_alpha(rng)
        fast = tal_alpha(inst, tau, alpha)
        slow = oracle.enumerate_tal_alpha(inst, tau, alpha)
        diff = abs(fast - slow)
        worst = max(worst, diff)
        if diff > tol:
            failures.append(f"case {case}: |exact - enumerated| = {diff:.3e}")
    return _report("oracle_equivalence", n_cases, failures, max_diff=worst)


def check_opt_equivalence(seed: int = 1, n_cases: int = 200, tol: float = 1e-12) -> dict:
    rng = np.random.default_rng(seed)
    failures = []
    worst = 0.0
    for case in range(n_cases):
        inst = families.random_corpus_instance(rng)
        diff = abs(opt_value(inst) - oracle.enumerate_opt(inst))
        worst = max(worst, diff / max(1.0, opt_value(inst)))
        if diff > tol * max(1.0, opt_value(inst)):
            failures.append(f"case {case}: OPT mismatch {diff:.3e}")
    return _report("opt_equivalence", n_cases, failures, max_rel_diff=worst)


def check_best_threshold_dominates(seed: int = 2, n_cases: int = 200) -> dict:
    """The searched optimum is never beaten by the constructed threshold."""
    rng = np.random.default_rng(seed)
    failures = []
    fallbacks = 0
    for case in range(n_cases):
        inst = families.random_corpus_instance(rng)
        alpha = float(rng.uniform(0.05, 0.95))
        tau, s = tau_star(inst, alpha)
        if s == 0:
            fallbacks += 1
        constructed = tal_alpha(inst, tau, alpha)
        _, best_val = oracle.best_threshold(inst, alpha)
        if best_val < constructed - 1e-12 * max(1.0, constructed):
            failures.append(f"case {case}: search {best_val} below constructed {constructed}")
    return _report("best_threshold_dominates", n_cases, failures, fallbacks=fallbacks)


def check_dp_dominates_thresholds(seed: int = 3, n_cases: int = 200) -> dict:
    """The optimal online policy dominates every fixed threshold at alpha = 0."""
    rng = np.random.default_rng(seed)
    failures = []
    for case in range(n_cases):
        inst = families.random_corpus_instance(rng)
        dp = oracle.dp_optimal_online(inst)
        for tau in list(inst.values) + [_random_tau(rng, inst)]:
            val = tal(inst, tau)
            if dp < val - 1e-12 * max(1.0, val):
                failures.append(f"case {case}: dp {dp} < tal(tau={tau}) {val}")
    return _report("dp_dominates_thresholds", n_cases, failures)


def suite_oracle(seed: int = 0, n_cases: int = 500) -> dict:
    checks = [
        check_oracle_equivalence(seed, n_cases),
        check_opt_equivalence(seed + 1, max(50, n_cases // 2)),
        check_best_threshold_dominates(seed + 2, max(50, n_cases // 2)),
        check_dp_dominates_thresholds(seed + 3, max(50, n_cases // 2)),
    ]
    return {"suite": "oracle", "ok": all(c["ok"] for c in checks), "checks": checks}


# ---------------------------------------------------------------------------
# Bounds suite
# ---------------------------------------------------------------------------

THREE_BERNOULLI_CASES = ((2.0, 3.0), (4.0, 3.0), (10.0, 1.0), (1.25, 3.0))


def check_three_bernoulli(cfg: bounds.CheckConfig = bounds.DEFAULT_CHECKS) -> dict:
    failures = []
    worst_grid = 0.0
    for k, t in THREE_BERNOULLI_CASES:
        closed = bounds.three_bernoulli_min(k, t)
        grid = bounds.three_bernoulli_grid_min(k, t, cfg.search_resolution)
        rand = bounds.three_bernoulli_random_min(k, t, cfg.random_search_samples, seed=17)
        worst_grid = max(worst_grid, abs(closed - grid))
        if abs(closed - grid) > cfg.optimization_tol:
            failures.append(f"(k={k}, t={t}): |closed - grid| = {abs(closed - grid):.3e}")
        if closed > rand + cfg.optimization_tol:
            failures.append(f"(k={k}, t={t}): closed form {closed} beats random search {rand}")
    return _report("three_bernoulli_optimization", len(THREE_BERNOULLI_CASES), failures,
                   max_grid_gap=worst_grid)


def check_bound_curves(cfg: bounds.CheckConfig = bounds.DEFAULT_CHECKS) -> dict:
    failures = []
    alphas = np.linspace(0.0, 1.0, cfg.curve_grid)
    for a in alphas:
        lo, up = bounds.bound_oblivious(float(a))
        if lo > up + 1e-15:
            failures.append(f"alpha={a}: lower bound above upper")
        if a in (0.0, 1.0) and lo != up:
            failures.append(f"alpha={a}: endpoints should coincide")
        g = bounds.combined(float(a)) if a > 0 else 1.0
        if g < (2.0 + float(a) ** 3) / 3.0 - 1e-12:
            failures.append(f"alpha={a}: prediction-regime ratio below (2+a^3)/3")
    for p in np.linspace(0.001, 0.999, cfg.curve_grid):
        if bounds.g_robust(float(p)) < 0.5 - 1e-12:
            failures.append(f"p={p}: robustness ratio below 1/2")
    if bounds.g_robust(0.5) != 0.5:
        failures.append("g_robust(1/2) != 1/2")
    for a in (0.1, 0.3, 0.5, 0.9, 0.99):
        if not bounds.smallvalues_monotone_check(a, cfg.monotone_grid):
            failures.append(f"alpha={a}: bounded-regime ratio not decreasing in c")
    return _report("bound_curves", cfg.curve_grid, failures)


def check_conditional_identity(cfg: bounds.CheckConfig = bounds.DEFAULT_CHECKS) -> dict:
    """At c = 3/4 the conditional bounded-regime ratio collapses to (2 + alpha)/3."""
    failures = []
    worst = 0.0
    for a in np.linspace(0.0, 1.0, cfg.curve_grid):
        got = bounds.smallvalues_ratio(0.75, float(a), conditional=True)
        want = (2.0 + float(a)) / 3.0
        worst = max(worst, abs(got - want))
        if abs(got - want) > 1e-12:
            failures.append(f"alpha={a}: conditional ratio off by {abs(got - want):.3e}")
    return _report("conditional_identity", cfg.curve_grid, failures, max_diff=worst)


def check_tail_probability_bound(seed: int = 5, n_cases: int = 1000) -> dict:
    """Pr[M >= threshold/alpha] under the c = 3/4 tail policy stays below
    1/(1/(3 alpha) + 1), averaged over the policy's randomization."""
    rng = np.random.default_rng(seed)
    failures = []
    worst_margin = -math.inf
    for case in range(n_cases):
        inst = families.random_corpus_instance(rng)
        policy = tail_threshold(inst, 0.75)
        alpha = float(rng.uniform(0.05, 1.0))
        prob, _ = expected_tail_at(inst, policy, divisor=alpha)
        bound = bounds.tail_g(alpha)
        worst_margin = max(worst_margin, prob - bound)
        if prob > bound + 1e-12:
            failures.append(f"case {case}: tail prob {prob} exceeds bound {bound}")
    return _report("tail_probability_bound", n_cases, failures, worst_margin=worst_margin)


def check_order_statistics_bound(seed: int = 6, n_cases: int = 1000) -> dict:
    """Pr[second max > L2 | max > L1] <= Pr[max > L2] for L1 > L2, by enumeration."""
    rng = np.random.default_rng(seed)
    failures = []
    skipped = 0
    for case in range(n_cases):
        inst = families.random_corpus_instance(rng, max_vars=8)
        vals, probs = oracle.bernoulli_outcome_table(inst)
        vmax = max(inst.values)
        l2, l1 = sorted(rng.uniform(0.0, 1.05 * vmax, 2))
        if l1 == l2:
            skipped += 1
            continue
        m1 = vals.max(axis=1)
        m2 = np.sort(vals, axis=1)[:, -2]
        p_a = float(probs[m1 > l1].sum())
        if p_a <= 0.0:
            skipped += 1
            continue
        lhs = float(probs[(m1 > l1) & (m2 > l2)].sum()) / p_a
        rhs = float(probs[m1 > l2].sum())
        if lhs > rhs + 1e-12:
            failures.append(f"case {case}: conditional {lhs} exceeds {rhs}")
    return _report("order_statistics_bound", n_cases, failures, skipped=skipped)


def suite_bounds(seed: int = 0, n_cases: int = 1000,
                 cfg: bounds.CheckConfig = bounds.DEFAULT_CHECKS) -> dict:
    checks = [
        check_three_bernoulli(cfg),
        check_bound_curves(cfg),
        check_conditional_identity(cfg),
        check_tail_probability_bound(seed + 5, n_cases),
        check_order_statistics_bound(seed + 6, n_cases),
    ]
    return {"suite": "bounds", "ok": all(c["ok"] for c in checks), "checks": checks}


# ---------------------------------------------------------------------------
# Reductions suite
# ---------------------------------------------------------------------------


def check_sort_dominance(seed: int = 7, n_cases: int = 1000, tol: float = 1e-10) -> dict:
    rng = np.random.default_rng(seed)
    failures = []
    for case in range(n_cases):
        srt = families.random_corpus_instance(rng, max_vars=7)
        perm = rng.permutation(len(srt))
        orig = BernoulliInstance(tuple(srt.vars[i] for i in perm))
        tau = _random_tau(rng, orig)
        alpha = _random_alpha(rng)
        lhs = oracle.enumerate_tal_alpha(orig, tau, alpha)
        rhs = oracle.enumerate_tal_alpha(sort_instance(orig), tau, alpha)
        if lhs < rhs - tol:
            failures.append(f"case {case}: sorted instance gained {rhs - lhs:.3e}")
    return _report("sort_dominance", n_cases, failures)


def check_bernoullify(seed: int = 8, n_cases: int = 1000, tol: float = 1e-10) -> dict:
    rng = np.random.default_rng(seed)
    failures = []
    for case in range(n_cases):
        orig = families.random_discrete_general(rng)
        expanded = reductions.bernoullify(orig)
        # exact preservation of each variable's max law
        for i, d in enumerate(orig.vars):
            copies = reductions.bernoullify(GeneralInstance((d,)))
            got, _ = max_law(copies)
            want = [(v, p) for v, p in d.atoms if p > 0]
            if len(got) != len(want) or any(
                    gv != wv or abs(gp - wp) > 1e-12 for (gv, gp), (wv, wp) in zip(got, want)):
                failures.append(f"case {case}: var {i} max law not preserved")
        tau = float(rng.uniform(0.0, 11.0))
        alpha = _random_alpha(rng)
        lhs = oracle.enumerate_tal_alpha(orig, tau, alpha)
        rhs = oracle.enumerate_tal_alpha(expanded, tau, alpha)
        if lhs < rhs - tol:
            failures.append(f"case {case}: expansion gained {rhs - lhs:.3e}")
    return _report("bernoullify_dominance", n_cases, failures)


def check_discretize(seed: int = 9, n_cases: int = 1000, tol: float = 1e-10) -> dict:
    """Dominance with the adjusted quality, thresholds taken on the value grid
    (off-grid thresholds are outside the transform's guarantee), plus the
    provable retention of E[max] under truncation + down-rounding."""
    rng = np.random.default_rng(seed)
    failures = []
    for case in range(n_cases):
        orig = families.random_discrete_general(rng, max_vars=3, max_atoms=2)
        delta = float(rng.uniform(0.2, 0.7))
        disc, cfg = reductions.discretize(orig, delta)
        alpha = float(rng.random())
        tau = float(rng.choice(cfg.grid))
        lhs = oracle.enumerate_tal_alpha(orig, tau, alpha)
        rhs = oracle.enumerate_tal_alpha(disc, tau, alpha * cfg.alpha_factor)
        if lhs < rhs - tol:
            failures.append(f"case {case}: discretization gained {rhs - lhs:.3e}")
        atoms, _ = max_law(disc)
        e_max = math.fsum(v * p for v, p in atoms)
        retain = (1.0 - 2.0 * delta) / (1.0 + delta)
        if e_max < retain * cfg.expected_max - 1e-12:
            failures.append(f"case {case}: E[max'] {e_max} below retention bound")
    return _report("discretize_dominance", n_cases, failures)


def suite_reductions(seed: int = 0, n_cases: int = 300) -> dict:
    checks = [
        check_sort_dominance(seed + 7, n_cases),
        check_bernoullify(seed + 8, n_cases),
        check_discretize(seed + 9, n_cases),
    ]
    return {"suite": "reductions", "ok": all(c["ok"] for c in checks), "checks": checks}


# ---------------------------------------------------------------------------
# Monotonicity suite
# ---------------------------------------------------------------------------


def check_sc_self_consistency(seed: int = 10, n_cases: int = 500) -> dict:
    """TAL(I, eta) >= eta, and any slightly larger threshold earns less than itself."""
    rng = np.random.default_rng(seed)
    failures = []
    for case in range(n_cases):
        inst = families.random_corpus_instance(rng)
        eta = sc_threshold(inst)
        if tal(inst, eta) < eta - 1e-9 * max(1.0, eta):
            failures.append(f"case {case}: TAL at eta below eta")
        bump = eta + 1e-6 * max(1.0, eta)
        if tal(inst, bump) >= bump:
            failures.append(f"case {case}: threshold above eta still self-consistent")
    return _report("sc_self_consistency", n_cases, failures)


def check_monotone_above_eta(seed: int = 11, n_cases: int = 500) -> dict:
    rng = np.random.default_rng(seed)
    failures = []
    for case in range(n_cases):
        inst = families.random_corpus_instance(rng)
        eta = sc_threshold(inst)
        vs = inst.values
        for k in range(len(vs) - 1):
            if vs[k] > eta:
                a, b = tal(inst, vs[k]), tal(inst, vs[k + 1])
                if a < b - 1e-12 * max(1.0, b):
                    failures.append(f"case {case}: TAL increased above eta at k={k}")
    return _report("monotone_above_eta", n_cases, failures)


def check_monotone_above_tau_star(seed: int = 12, n_cases: int = 500) -> dict:
    rng = np.random.default_rng(seed)
    failures = []
    fallbacks = 0
    for case in range(n_cases):
        inst = families.random_corpus_instance(rng)
        alpha = float(rng.uniform(0.05, 0.95))
        tau, s = tau_star(inst, alpha)
        if s == 0:
            fallbacks += 1
            continue
        vs = inst.values
        for k in range(len(vs) - 1):
            if vs[k] > tau:
                a = tal_alpha(inst, vs[k], alpha)
                b = tal_alpha(inst, vs[k + 1], alpha)
                if a < b - 1e-12 * max(1.0, b):
                    failures.append(f"case {case}: TAL_alpha increased above tau* at k={k}")
    return _report("monotone_above_tau_star", n_cases, failures, fallbacks=fallbacks)


def check_eta_prefix_monotone(seed: int = 13, n_cases: int = 500) -> dict:
    rng = np.random.default_rng(seed)
    failures = []
    for case in range(n_cases):
        inst = families.random_corpus_instance(rng)
        etas = [sc_threshold(prefix(inst, k)) for k in range(1, len(inst) + 1)]
        if any(b < a - 1e-12 * max(1.0, a) for a, b in zip(etas, etas[1:])):
            failures.append(f"case {case}: eta decreased on a longer prefix")
    return _report("eta_prefix_monotone", n_cases, failures)


def check_tail_threshold_monotone_in_c(seed: int = 14, n_cases: int = 300) -> dict:
    """Larger required tail mass pushes the threshold down."""
    rng = np.random.default_rng(seed)
    failures = []
    for case in range(n_cases):
        inst = families.random_corpus_instance(rng)
        c1, c2 = sorted(rng.uniform(0.05, 0.95, 2))
        if c2 - c1 < 1e-6:
            continue
        p1 = tail_threshold(inst, float(c1))
        p2 = tail_threshold(inst, float(c2))
        slack = (p1.randomized_delta or 0.0) + (p2.randomized_delta or 0.0)
        if p2.base > p1.base + slack + 1e-12:
            failures.append(f"case {case}: T({c2}) above T({c1})")
    return _report("tail_threshold_monotone_in_c", n_cases, failures)


def check_sc_bound(seed: int = 15, n_cases: int = 10_000) -> dict:
    """Rescaled self-consistent guarantee: OPT/v_n <= 2 theta - theta^2 with
    theta = TAL(I, eta)/v_n."""
    rng = np.random.default_rng(seed)
    failures = []
    worst = -math.inf
    for case in range(n_cases):
        inst = families.random_corpus_instance(rng)
        vn = max(inst.values)
        theta = tal(inst, sc_threshold(inst)) / vn
        lhs = opt_value(inst) / vn
        rhs = 2.0 * theta - theta * theta
        worst = max(worst, lhs - rhs)
        if lhs > rhs + 1e-10:
            failures.append(f"case {case}: SC bound violated by {lhs - rhs:.3e}")
    return _report("sc_bound", n_cases, failures, worst_margin=worst)


def check_max_tail_consistency(seed: int = 16, n_cases: int = 300) -> dict:
    """max_tail at 0 recovers OPT; the partial expectation is nonincreasing in t."""
    rng = np.random.default_rng(seed)
    failures = []
    for case in range(n_cases):
        inst = families.random_corpus_instance(rng)
        prob0, mass0 = max_tail(inst, 0.0)
        if prob0 != 1.0 or abs(mass0 - opt_value(inst)) > 1e-10 * max(1.0, mass0):
            failures.append(f"case {case}: max_tail at 0 inconsistent with OPT")
        t1, t2 = sorted(rng.uniform(0.0, 1.2 * max(inst.values), 2))
        if max_tail(inst, t2)[1] > max_tail(inst, t1)[1] + 1e-12:
            failures.append(f"case {case}: tail mass increased in t")
    return _report("max_tail_consistency", n_cases, failures)


def suite_monotonicity(seed: int = 0, n_cases: int = 500) -> dict:
    checks = [
        check_sc_self_consistency(seed + 10, n_cases),
        check_monotone_above_eta(seed + 11, n_cases),
        check_monotone_above_tau_star(seed + 12, n_cases),
        check_eta_prefix_monotone(seed + 13, n_cases),
        check_tail_threshold_monotone_in_c(seed + 14, max(100, n_cases // 2)),
        check_sc_bound(seed + 15, n_cases),
        check_max_tail_consistency(seed + 16, max(100, n_cases // 2)),
    ]
    return {"suite": "monotonicity", "ok": all(c["ok"] for c in checks), "checks": checks}


# ---------------------------------------------------------------------------
# Impossibility suite
# ---------------------------------------------------------------------------


def check_two_scenario(eps: float = 1e-4, grid_points: int = 10_000) -> dict:
    """No acceptance probability for the safe value wins both scenarios: either
    the no-signal ratio is at most 1/2 or the full-signal ratio is at most
    3/4 + sqrt(eps).  Closed forms from the two-variable construction."""
    s = math.sqrt(eps)
    opt = 2.0 + s - eps
    failures = []
    for p in np.linspace(0.0, 1.0, grid_points):
        alg0 = p + (1.0 - p) * (1.0 + s)
        alg1 = 1.0 + s + (1.0 - eps) * p
        ok = (alg0 / opt <= 0.5 + 1e-12) or (alg1 / opt <= 0.75 + s + 1e-12)
        if not ok:
            failures.append(f"p={p}: both scenarios beat their caps")
    return _report("two_scenario_impossibility", grid_points, failures, eps=eps)


def check_interpolation_cap(eps: float = 1e-3, grid_points: int = 101) -> dict:
    """Under unrestricted predictions consistency + robustness never exceeds
    2/(2 - eps) on the two-variable instance, over all (p, q) policies."""
    cap = 2.0 / (2.0 - eps)
    failures = []
    worst = -math.inf
    for p in np.linspace(0.0, 1.0, grid_points):
        for q in np.linspace(0.0, 1.0, grid_points):
            reward = p + q + eps * (1.0 - p - q)
            c = reward / (2.0 - eps)
            r = (2.0 - reward) / (2.0 - eps)
            worst = max(worst, c + r - cap)
            if c + r > cap + 1e-12:
                failures.append(f"(p={p}, q={q}): C+R = {c + r} exceeds {cap}")
    return _report("interpolation_cap", grid_points * grid_points, failures,
                   worst_margin=worst, cap=cap)


def check_frontier(grid_points: int = 1001) -> dict:
    """The mixing strategy hits C + R = 1 exactly along the frontier."""
    failures = []
    for r in np.linspace(0.0, 0.5, grid_points):
        c, p = bounds.cr_frontier(float(r))
        if c + float(r) != 1.0:
            failures.append(f"r={r}: C+R != 1 exactly")
        if not 0.0 <= p <= 1.0:
            failures.append(f"r={r}: mixing probability {p} out of range")
    return _report("frontier_achievability", grid_points, failures)


def suite_impossibility(seed: int = 0, n_cases: int = 10_000) -> dict:
    del seed  # closed-form sweeps; deterministic
    checks = [
        check_two_scenario(1e-4, n_cases),
        check_interpolation_cap(1e-3, 101),
        check_frontier(1001),
    ]
    return {"suite": "impossibility", "ok": all(c["ok"] for c in checks), "checks": checks}


SUITES = {
    "oracle": suite_oracle,
    "bounds": suite_bounds,
    "reductions": suite_reductions,
    "monotonicity": suite_monotonicity,
    "impossibility": suite_impossibility,
}


def run_suite(name: str, seed: int = 0, n_cases: int | None = None) -> dict:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    kwargs = {"seed": seed}
    if n_cases is not None:
        kwargs["n_cases"] = n_cases
    return SUITES[name](**kwargs)

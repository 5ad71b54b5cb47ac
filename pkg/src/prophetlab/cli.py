"""Batch experiment runner.

Subcommands: ``eval`` (one threshold on one instance), ``threshold`` (build a
threshold), ``sweep`` (ratio curves over an instance directory), ``verify``
(check suites), ``gen`` (write named or random instances).  Stdout carries
data only; logs go to stderr.  Exit codes: 0 success, 1 check failure,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import families, verify
from .bounds import (
    KNOWN_CURVE,
    OBLIVIOUS_LOWER_CURVE,
    OBLIVIOUS_UPPER_CURVE,
    bound_known,
    bound_oblivious,
)
from .core import (
    BernoulliInstance,
    GeneralInstance,
    InstanceFormatError,
    load_instance,
    save_instance,
    sort_instance,
)
from .exact_eval import EvalReport, opt_value, tal_alpha
from .montecarlo import McConfig, SweepResult, SweepRow, mc_evaluate
from .oracle import MAX_ENUM_VARS, enumerate_opt, enumerate_tal_alpha
from .thresholds import ThresholdPolicy, policy_value, sc_threshold, tail_threshold, tau_star

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(data: dict) -> None:
    print(json.dumps(data, sort_keys=True))


def _mc_config(args, samples: int) -> McConfig:
    return McConfig(samples=samples, seed=args.seed,
                    prediction_mode=args.prediction_mode, chunks=args.chunks)


def cmd_eval(args) -> int:
    inst = load_instance(args.instance)
    policy = ThresholdPolicy(args.tau, None, args.alpha)
    if args.mc is not None:
        report = mc_evaluate(inst, policy, _mc_config(args, args.mc))
    elif isinstance(inst, BernoulliInstance):
        if inst.is_sorted:
            report = EvalReport.build(opt_value(inst), tal_alpha(inst, args.tau, args.alpha), "exact")
        elif len(inst) <= MAX_ENUM_VARS:
            report = EvalReport.build(enumerate_opt(inst),
                                      enumerate_tal_alpha(inst, args.tau, args.alpha),
                                      "enumerated")
        else:
            raise ValueError("unsorted instance too large for enumeration; sort it or use --mc")
    else:
        raise ValueError("exact evaluation needs a Bernoulli instance; use --mc N")
    _emit(report.to_json_dict())
    return EXIT_OK


def cmd_threshold(args) -> int:
    inst = load_instance(args.instance)
    if args.tail is not None:
        policy = tail_threshold(inst, args.tail)
        _emit(policy.to_json_dict())
        return EXIT_OK
    if not isinstance(inst, BernoulliInstance):
        raise ValueError("this threshold needs a Bernoulli instance")
    srt = inst if inst.is_sorted else sort_instance(inst)
    if args.sc:
        _emit({"sc_threshold": sc_threshold(srt)})
    else:
        tau, s = tau_star(srt, args.tau_star)
        _emit({"base": tau, "prefix_index": s})
    return EXIT_OK


def _sweep_known(inst: BernoulliInstance, alphas: list[float]) -> list[SweepRow]:
    srt = inst if inst.is_sorted else sort_instance(inst)
    opt = opt_value(srt)
    rows = []
    for a in alphas:
        tau, _ = tau_star(srt, a)
        ratio = tal_alpha(srt, tau, a) / opt if opt > 0 else 1.0
        bound = bound_known(a)
        rows.append(SweepRow(a, ratio, None, bound, bound, "exact"))
    return rows


def _sweep_oblivious(inst, alphas: list[float], args) -> list[SweepRow]:
    policy = tail_threshold(inst, args.c)
    rows = []
    for a in alphas:
        lo, up = bound_oblivious(a)
        if isinstance(inst, BernoulliInstance):
            srt = inst if inst.is_sorted else sort_instance(inst)
            opt = opt_value(srt)
            ratio = policy_value(srt, policy.with_alpha(a)) / opt if opt > 0 else 1.0
            rows.append(SweepRow(a, ratio, None, lo, up, "exact"))
        else:
            if args.mc is None:
                raise ValueError("continuous instances need --mc N in a sweep")
            rep = mc_evaluate(inst, policy.with_alpha(a), _mc_config(args, args.mc))
            rows.append(SweepRow(a, rep.ratio, rep.ci_halfwidth, lo, up, "montecarlo"))
    return rows


def cmd_sweep(args) -> int:
    alphas = [float(a) for a in args.alphas.split(",") if a.strip() != ""]
    if not alphas:
        raise ValueError("empty --alphas grid")
    paths = sorted(Path(args.instances).glob("*.json"))
    if not paths:
        raise ValueError(f"no instance files in {args.instances}")
    rows: list[SweepRow] = []
    for path in paths:
        inst = load_instance(path)
        if args.mode == "known":
            if not isinstance(inst, BernoulliInstance):
                raise ValueError(f"{path.name}: known-quality sweep needs Bernoulli instances")
            rows.extend(_sweep_known(inst, alphas))
        else:
            rows.extend(_sweep_oblivious(inst, alphas, args))
        _log(f"swept {path.name}")
    out = Path(args.out)
    with open(out, "w", encoding="utf-8") as f:
        SweepResult(tuple(rows)).write_csv(f)
    curves = [KNOWN_CURVE] if args.mode == "known" else [OBLIVIOUS_LOWER_CURVE, OBLIVIOUS_UPPER_CURVE]
    for curve in curves:
        curve_path = out.with_name(f"{out.stem}_bound_{curve.name}.csv")
        curve.write_csv(curve_path, alphas)
        _log(f"wrote bound curve {curve_path}")
    _log(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify.run_suite(args.suite, seed=args.seed, n_cases=args.n_cases)
    _emit(report)
    return EXIT_OK if report["ok"] else EXIT_CHECK


_GEN_ARITY = {
    "known-lb": 1,
    "oblivious-lb": 1,
    "tight-oblivious": 2,
    "motivating": 2,
    "cr-tradeoff": 1,
    "random": 2,
}


def cmd_gen(args) -> int:
    name, *params = args.family
    if name not in _GEN_ARITY:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(_GEN_ARITY)}")
    if len(params) != _GEN_ARITY[name]:
        raise ValueError(f"family {name} takes {_GEN_ARITY[name]} parameter(s)")
    if name == "random":
        count, seed = int(params[0]), int(params[1])
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        rng = np.random.default_rng(seed)
        for i in range(count):
            save_instance(families.random_corpus_instance(rng), out_dir / f"instance_{i:03d}.json")
        _log(f"wrote {count} instances to {out_dir}")
        return EXIT_OK
    builders = {
        "known-lb": lambda p: families.known_lb(float(p[0])),
        "oblivious-lb": lambda p: families.oblivious_lb(float(p[0])),
        "tight-oblivious": lambda p: families.tight_oblivious(float(p[0]), float(p[1])),
        "motivating": lambda p: families.motivating(float(p[0]), float(p[1])),
        "cr-tradeoff": lambda p: families.cr_tradeoff(float(p[0])),
    }
    inst = builders[name](params)
    save_instance(inst, args.out)
    _log(f"wrote {name} instance to {args.out}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prophetlab",
                                     description="threshold-stopping experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate a base threshold on one instance")
    p_eval.add_argument("--instance", required=True)
    p_eval.add_argument("--tau", type=float, required=True)
    p_eval.add_argument("--alpha", type=float, required=True)
    p_eval.add_argument("--exact", action="store_true", help="exact evaluation (default)")
    p_eval.add_argument("--mc", type=int, default=None, metavar="N", help="Monte Carlo with N samples")
    p_eval.set_defaults(func=cmd_eval)

    p_thr = sub.add_parser("threshold", help="construct a threshold for an instance")
    p_thr.add_argument("--instance", required=True)
    group = p_thr.add_mutually_exclusive_group(required=True)
    group.add_argument("--sc", action="store_true", help="self-consistent threshold")
    group.add_argument("--tau-star", type=float, metavar="A", help="known-quality threshold at alpha=A")
    group.add_argument("--tail", type=float, metavar="C", help="tail-mass threshold T(C)")
    p_thr.set_defaults(func=cmd_threshold)

    p_sweep = sub.add_parser("sweep", help="ratio curves over an instance directory")
    p_sweep.add_argument("--mode", choices=("known", "oblivious"), required=True)
    p_sweep.add_argument("--instances", required=True, metavar="DIR")
    p_sweep.add_argument("--alphas", required=True, help="comma-separated alpha grid")
    p_sweep.add_argument("--out", required=True, metavar="CSV")
    p_sweep.add_argument("--c", type=float, default=0.75, help="tail fraction for oblivious mode")
    p_sweep.add_argument("--mc", type=int, default=None, metavar="N")
    p_sweep.set_defaults(func=cmd_sweep)

    p_ver = sub.add_parser("verify", help="run a check suite")
    p_ver.add_argument("--suite", choices=sorted(verify.SUITES), required=True)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--n-cases", type=int, default=None)
    p_ver.set_defaults(func=cmd_verify)

    p_gen = sub.add_parser("gen", help="write a named instance (or a random corpus)")
    p_gen.add_argument("--family", nargs="+", required=True,
                       metavar="NAME ARG",
                       help="known-lb A | oblivious-lb EPS | tight-oblivious A EPS | "
                            "motivating P2 P3 | cr-tradeoff EPS | random N SEED")
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_gen)

    for p in (p_eval, p_sweep):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--chunks", type=int, default=1)
        p.add_argument("--prediction-mode", choices=("worst_case", "uniform_feasible"),
                       default="worst_case")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InstanceFormatError, FileNotFoundError, NotADirectoryError, ValueError, OSError) as exc:
        _log(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

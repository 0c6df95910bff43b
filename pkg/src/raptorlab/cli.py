"""Command-line frontend: reproducible design/analysis/simulation jobs.

Subcommands: design, asymptotic, capacity, simulate, ber, bounds.
Exit codes: 0 completed, 2 usage error, 3 infeasible design,
4 numerical-range error.  SNR is taken in dB on the command line and
converted to linear gamma internally.  Every run is a pure function of
its arguments (plus RAPTOR_SEED as the default seed): re-running
produces byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import asymptotic, channel_sim, degree_design
from .degree_design import DesignResult
from .numerics import NumericalRangeError, Snr, bi_awgn_capacity

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4


def _default_seed() -> int:
    return int(os.environ.get("RAPTOR_SEED", "1"))


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _write(path: str | None, text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_design(args) -> int:
    modes = (args.mu_o is not None, args.eta is not None,
             args.search_mu_o, args.search_eta)
    fixed_mu, fixed_eta, s_mu, s_eta = modes
    if s_mu and s_eta:
        raise UsageError("choose one search direction, not both")
    if s_eta and not fixed_mu:
        raise UsageError("--search-eta requires --mu-o")
    if s_mu and not fixed_eta and args.epsilon > 0:
        raise UsageError("--search-mu-o requires --eta (or epsilon 0)")
    if not s_mu and not s_eta and not fixed_mu:
        raise UsageError("provide --mu-o (and optionally --eta), or a search flag")

    if s_eta:
        result = degree_design.search_max_eta(args.D, args.mu_o, args.epsilon,
                                              eta_resolution=5e-4,
                                              point_count=args.N)
    elif s_mu:
        candidates = np.arange(1.0, args.mu_o_max + 1e-9, 0.01)
        result = degree_design.search_max_mu(args.D, candidates,
                                             point_count=args.N,
                                             epsilon=args.epsilon,
                                             eta=args.eta if fixed_eta else 1.0)
    else:
        result = degree_design.design_practical(args.D, args.mu_o, args.epsilon,
                                                args.eta if fixed_eta else 1.0,
                                                point_count=args.N)
    if not result.feasible:
        where = ("" if result.binding_point is None
                 else f" (binding grid point mu = {_fmt(result.binding_point)})")
        print(f"infeasible{where}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print("D      beta     eta      mu_o    delta0")
    eta = result.achieved_eta if math.isfinite(result.achieved_eta) else 1.0
    print(f"{result.distribution.max_degree:<6d} {_fmt(result.beta):<8s} "
          f"{_fmt(eta):<8s} {_fmt(result.achieved_mu_o):<7s} {_fmt(result.delta0)}")
    _write(args.out, result.to_json())
    return EXIT_OK


def cmd_asymptotic(args) -> int:
    lines = []
    if args.mode == "small-degrees":
        for d, v in sorted(asymptotic.small_degree_fractions().items()):
            lines.append(f"{d},{_fmt(v)}")
        header = "degree,fraction"
    elif args.mode == "closed-form":
        xs = ([args.x] if args.x is not None
              else list(np.linspace(0.0, 1.0, args.samples)))
        for x in xs:
            lines.append(f"{_fmt(x)},{_fmt(asymptotic.omega_infinity(float(x)))}")
        header = "x,omega_infinity"
    else:  # hilbert
        fractions = asymptotic.hilbert_moment_distribution(args.order)
        for d, v in sorted(fractions.items()):
            lines.append(f"{d},{_fmt(v)}")
        header = "degree,fraction"
    text = "\n".join([header] + lines) + "\n"
    print(text, end="")
    _write(args.out, text)
    return EXIT_OK


def cmd_capacity(args) -> int:
    lines = ["snr_db,gamma,capacity"]
    for db in args.snr_db:
        snr = Snr.from_db(db)
        lines.append(f"{_fmt(db)},{_fmt(snr.gamma)},{_fmt(bi_awgn_capacity(snr))}")
    text = "\n".join(lines) + "\n"
    print(text, end="")
    _write(args.out, text)
    return EXIT_OK


def _load_distribution(path: str) -> DesignResult:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed distribution file {path}: "
                         f"line {exc.lineno} column {exc.colno}: {exc.msg}")
    for key in ("D", "mu_o", "epsilon", "eta", "beta", "omega"):
        if key not in doc:
            raise UsageError(f"distribution file {path} is missing field '{key}'")
    return DesignResult.from_json_dict(doc)


def cmd_simulate(args) -> int:
    if args.trials < 1:
        raise UsageError("trials must be positive")
    design = _load_distribution(args.dist_file)
    cfg = channel_sim.TrialConfig(
        k=args.k, snr=Snr.from_db(args.snr_db), dist=design.distribution,
        seed=args.seed, spa_iters=args.T, dtype=np.float32)
    records = []
    est = channel_sim.measure_efficiency(cfg, args.trials, collect=records.append)
    print(f"eta_hat {_fmt(est.eta_hat)} +/- {_fmt(est.halfwidth)} "
          f"(success-only {_fmt(est.eta_hat_success_only)}, "
          f"success rate {_fmt(est.success_rate)})")
    if args.out:
        channel_sim.write_trials_csv(args.out + ".csv", records)
        channel_sim.write_summary_json(
            args.out + ".json", est,
            {"k": args.k, "snr_db": args.snr_db, "trials": args.trials,
             "T": args.T, "seed": args.seed, "dist_file": args.dist_file})
    return EXIT_OK


def cmd_ber(args) -> int:
    if args.trials < 1:
        raise UsageError("trials must be positive")
    design = _load_distribution(args.dist_file)
    cfg = channel_sim.TrialConfig(
        k=args.k, snr=Snr.from_db(args.snr_db), dist=design.distribution,
        seed=args.seed, spa_iters=args.T, dtype=np.float32)
    curve = channel_sim.ber_vs_overhead(cfg, args.overheads, args.trials)
    lines = ["overhead,ber"] + [f"{_fmt(ov)},{_fmt(ber)}"
                                for ov, ber in sorted(curve.items())]
    text = "\n".join(lines) + "\n"
    print(text, end="")
    _write(args.out, text)
    return EXIT_OK


def cmd_bounds(args) -> int:
    lo = degree_design.avg_degree_lower_bound(args.eta, args.mu_o, args.epsilon)
    hi = degree_design.max_eta_upper_bound(args.epsilon)
    iters = ("unbounded" if args.epsilon == 0
             else _fmt(degree_design.iteration_upper_bound(args.mu_o, args.epsilon)))
    print("avg_degree_lower_bound,max_eta_upper_bound,iteration_upper_bound")
    text = f"{_fmt(lo)},{_fmt(hi)},{iters}\n"
    print(text, end="")
    _write(args.out, "avg_degree_lower_bound,max_eta_upper_bound,"
                     f"iteration_upper_bound\n{text}")
    return EXIT_OK


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="raptorlab",
                                description="Raptor-code design and simulation "
                                            "for the low-SNR BI-AWGN channel")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="solve a degree-distribution program")
    d.add_argument("--D", type=int, required=True)
    d.add_argument("--epsilon", type=float, default=0.0)
    d.add_argument("--mu-o", dest="mu_o", type=float)
    d.add_argument("--eta", type=float)
    d.add_argument("--search-eta", action="store_true")
    d.add_argument("--search-mu-o", action="store_true")
    d.add_argument("--mu-o-max", dest="mu_o_max", type=float, default=40.0)
    d.add_argument("--N", type=int, default=500)
    d.add_argument("--out")
    d.set_defaults(func=cmd_design)

    a = sub.add_parser("asymptotic", help="limiting-distribution tables")
    a.add_argument("--mode", choices=["closed-form", "small-degrees", "hilbert"],
                   required=True)
    a.add_argument("--x", type=float)
    a.add_argument("--samples", type=int, default=21)
    a.add_argument("--order", type=int, default=5)
    a.add_argument("--out")
    a.set_defaults(func=cmd_asymptotic)

    c = sub.add_parser("capacity", help="BI-AWGN capacity table")
    c.add_argument("--snr-db", dest="snr_db", type=_float_list, required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_capacity)

    s = sub.add_parser("simulate", help="measure realized rate efficiency")
    s.add_argument("--dist-file", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--snr-db", dest="snr_db", type=float, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--T", type=int, default=1000)
    s.add_argument("--seed", type=int, default=_default_seed())
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("ber", help="BER versus overhead curve")
    b.add_argument("--dist-file", required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--snr-db", dest="snr_db", type=float, required=True)
    b.add_argument("--overheads", type=_float_list, required=True)
    b.add_argument("--trials", type=int, required=True)
    b.add_argument("--T", type=int, default=600)
    b.add_argument("--seed", type=int, default=_default_seed())
    b.add_argument("--out")
    b.set_defaults(func=cmd_ber)

    bo = sub.add_parser("bounds", help="closed-form design bounds")
    bo.add_argument("--mu-o", dest="mu_o", type=float, required=True)
    bo.add_argument("--epsilon", type=float, required=True)
    bo.add_argument("--eta", type=float, default=1.0)
    bo.add_argument("--out")
    bo.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalRangeError as exc:
        print(f"numerical range error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"numerical range error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

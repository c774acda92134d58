"""Batch command-line front end.

Subcommands: ``solve`` (one drop, joint rate problem), ``ee`` (one drop,
energy-efficiency loop), ``sweep`` (Monte Carlo tables to CSV). All
randomness comes from explicit seeds, never the clock, so any command
rerun with the same config and seed is byte-identical.

Exit codes: 0 success, 1 usage/config error, 2 infeasible model.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .channel import build_link_coefficients, sample_scenario
from .config import ConfigError, load_config
from .dinkelbach import ee_value, maximize_ee
from .experiments import (
    Scheme,
    SweepKind,
    SweepSpec,
    run_ee_suite,
    run_priority_sweep,
    run_qos_sweep,
    run_rcs_power_sweep,
    write_sweep_csv,
    write_trace_csv,
)
from .objective import qos_slacks, stream_rates
from .solver import Instance, SolveStatus, solve_sum_mi_rate
from .units import watts_to_dbm

SWEEP_NAMES = ("qos", "priority", "rcs_power", "ee", "trace")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semi-isac",
        description="Joint spectrum partitioning and power allocation for a "
                    "three-service semi-ISaC downlink.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=None,
                        help="JSON config; omitted keys use the built-in defaults")
    common.add_argument("--seed", type=int, default=1,
                        help="RNG seed (scenario drop or sweep base seed)")
    common.add_argument("--quiet", action="store_true",
                        help="suppress informational output")

    p_solve = sub.add_parser("solve", parents=[common],
                             help="sample one drop and solve the weighted "
                                  "MI/rate maximization")
    p_solve.set_defaults(func=cmd_solve)

    p_ee = sub.add_parser("ee", parents=[common],
                          help="sample one drop and maximize energy efficiency")
    p_ee.add_argument("--out", metavar="PATH", default=None,
                      help="write the Dinkelbach trace CSV here")
    p_ee.set_defaults(func=cmd_ee)

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="run a Monte Carlo sweep and write a CSV table")
    p_sweep.add_argument("name", choices=SWEEP_NAMES, metavar="NAME",
                         help=f"one of: {', '.join(SWEEP_NAMES)}")
    p_sweep.add_argument("--out", metavar="PATH", default=None,
                         help="output CSV path (default: <name>_sweep.csv)")
    p_sweep.add_argument("--trials", type=int, default=None,
                         help="override trials per sweep point")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def _print_allocation(alloc, rates, out=sys.stdout):
    t1, t2, t3 = alloc.tau
    p1, p2, p3 = alloc.power
    print(f"spectrum fractions: tau1={t1:.6g} tau2={t2:.6g} tau3={t3:.6g}", file=out)
    print(f"powers [W]:         P1={p1:.6g} P2={p2:.6g} P3={p3:.6g} "
          f"(sum {p1 + p2 + p3:.6g})", file=out)
    print(f"rates [bits/s]:     sensing={rates.mi_sensing:.6g} "
          f"isac_down={rates.mi_isac_down:.6g} isac_up={rates.mi_isac_up:.6g} "
          f"comm={rates.rate_comm:.6g}", file=out)


def _make_instance(cfg, seed: int) -> Instance:
    scn = sample_scenario(cfg.params, seed)
    return Instance(build_link_coefficients(scn, cfg.params), cfg.params)


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    inst = _make_instance(cfg, args.seed)
    rep = solve_sum_mi_rate(inst, cfg.solver)
    if rep.status is SolveStatus.INFEASIBLE:
        print("infeasible: QoS floors cannot be met on this drop "
              f"(max-min slack < 0, seed {args.seed})", file=sys.stderr)
        return 2
    rates = stream_rates(rep.allocation, inst.coeffs, inst.params)
    print(f"status: {rep.status.value} (kkt residual {rep.kkt_residual:.3e}, "
          f"{rep.iterations} Newton steps)")
    _print_allocation(rep.allocation, rates)
    print(f"objective [bits/s]: {rep.objective_value:.9g}")
    if not args.quiet:
        slacks = qos_slacks(rep.allocation, inst.coeffs, inst.params)
        print(f"qos slacks [bits/s]: {' '.join(f'{s:.4g}' for s in slacks)}")
    return 0


def cmd_ee(args) -> int:
    cfg = load_config(args.config)
    inst = _make_instance(cfg, args.seed)
    rep, eta_star, trace = maximize_ee(inst, cfg.ee, cfg.solver)
    if rep.status is SolveStatus.INFEASIBLE:
        print("infeasible: QoS floors cannot be met on this drop "
              f"(seed {args.seed})", file=sys.stderr)
        return 2
    rates = stream_rates(rep.allocation, inst.coeffs, inst.params)
    print(f"status: {rep.status.value} ({len(trace)} outer iterations)")
    _print_allocation(rep.allocation, rates)
    print(f"weighted rate sum [bits/s]: {rep.objective_value:.9g}")
    print(f"energy efficiency [bits/s/W]: {eta_star:.9g}")
    print(f"consumed power [W]: {float(np.sum(rep.allocation.power)) + inst.params.circuit_power_omega:.6g} "
          f"(budget {inst.params.p_max:.6g} W = {watts_to_dbm(inst.params.p_max):.1f} dBm)")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write("iteration,eta,f_value\n")
            for j, eta, f_val in trace.rows():
                fh.write(f"{j},{eta:.9g},{f_val:.9g}\n")
        if not args.quiet:
            print(f"trace written to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    sw = cfg.sweeps
    trials = args.trials if args.trials is not None else sw.trials_per_point
    base_seed = args.seed if args.seed != 1 else sw.base_seed
    out_path = args.out or f"{args.name}_sweep.csv"
    t0 = time.perf_counter()

    if args.name == "qos":
        spec = SweepSpec(SweepKind.QOS_SWEEP, sw.qos_thresholds, trials, base_seed)
        rows = run_qos_sweep(cfg.params, spec, cfg.solver, cfg.ee)
        write_sweep_csv(out_path, rows)
    elif args.name == "priority":
        spec = SweepSpec(SweepKind.PRIORITY_SWEEP, sw.priority_isac_values,
                         trials, base_seed)
        rows = run_priority_sweep(cfg.params, spec, sw.priority_qos_profiles,
                                  cfg.solver, cfg.ee)
        write_sweep_csv(out_path, rows)
    elif args.name == "rcs_power":
        spec = SweepSpec(SweepKind.RCS_POWER_SWEEP, sw.pmax_values, trials, base_seed)
        rows = run_rcs_power_sweep(cfg.params, spec, sw.rcs_values,
                                   cfg.solver, cfg.ee)
        write_sweep_csv(out_path, rows)
    elif args.name in ("ee", "trace"):
        spec = SweepSpec(SweepKind.EE_QOS_SWEEP, sw.ee_thresholds, trials,
                         base_seed, schemes=(Scheme.DINKELBACH_EE, Scheme.SP_EPA,
                                             Scheme.PA_ESP, Scheme.RANDOM))
        rows, traces = run_ee_suite(cfg.params, spec, sw.trace_configs,
                                    cfg.solver, cfg.ee)
        if args.name == "ee":
            write_sweep_csv(out_path, rows)
        else:
            write_trace_csv(out_path, traces)
            rows = []
    else:  # unreachable behind argparse choices; kept for scripting safety
        print(f"unknown sweep '{args.name}'; valid names: {', '.join(SWEEP_NAMES)}",
              file=sys.stderr)
        return 1

    if not args.quiet:
        wall = time.perf_counter() - t0
        n_rows = len(rows) if args.name != "trace" else len(traces)
        print(f"wrote {out_path}: {n_rows} rows in {wall:.1f} s")
        if rows:
            feas = {}
            for r in rows:
                feas.setdefault(r.scheme, []).append(r.feasible_fraction)
            for scheme, fr in sorted(feas.items()):
                print(f"  {scheme}: feasible fraction "
                      f"{min(fr):.3f}..{max(fr):.3f} over {len(fr)} points")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses code 2 for usage errors
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: generate, solve, validate, bench, oracle.

Exit codes: 0 success, 1 validation failure, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

from .bench import run_suite, write_records, write_summary, write_trace
from .instances import (
    GenParams, InstanceFormatError, SuiteConfig, builtin_suite, generate, load_instance,
    load_schedule, save_instance, save_schedule,
)
from .model import DroneSpec, InstanceError, ObjectiveWeights, validate_schedule
from .oracle import brute_force_oracle
from .solver import SaConfig, Variant, solve_variant

EXIT_OK, EXIT_INVALID, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _add_sa_flags(p: argparse.ArgumentParser) -> None:
    d = SaConfig()
    p.add_argument("--t0", type=float, default=d.t0, help="initial temperature")
    p.add_argument("--t-end", type=float, default=d.t_end, help="final temperature")
    p.add_argument("--q", type=float, default=d.q, help="cooling rate")
    p.add_argument("--L", type=int, default=d.L, help="reallocation moves per temperature")
    p.add_argument("--n-starts", type=int, default=d.n_starts, help="construction restarts")


def _sa_config(args: argparse.Namespace, seed: int = 0) -> SaConfig:
    try:
        return SaConfig(args.t0, args.t_end, args.q, args.L, args.n_starts, seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        params = GenParams(
            args.tasks, args.depots, area_km=args.area, weight_min_kg=args.weight_min,
            weight_max_kg=args.weight_max, kind_mix=tuple(args.mix), seed=args.seed,
            drone=DroneSpec(args.range, args.capacity, args.beta_max),
            weights=ObjectiveWeights(args.alpha, args.rho), name=args.name)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    instance = generate(params)
    save_instance(instance, args.output)
    print(f"wrote {instance.name}: {instance.num_tasks} tasks, {len(instance.depots)} depots "
          f"-> {args.output}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    report = solve_variant(instance, _sa_config(args, args.seed), args.variant)
    bad = validate_schedule(instance, report.best_schedule)
    if bad:
        for v in bad:
            print(v, file=sys.stderr)
        return EXIT_INVALID
    save_schedule(report.best_schedule, args.output, instance,
                  variant=report.variant.value, seed=report.seed)
    if args.trace:
        write_trace(report, args.trace)
    print(f"{instance.name} {report.variant.value} seed={report.seed} cost={report.best_cost:.4f} "
          f"initial={report.initial_cost:.4f} sorties={report.best_schedule.sortie_count} "
          f"time={report.wall_time_s:.2f}s")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    schedule = load_schedule(args.schedule, instance)
    bad = validate_schedule(instance, schedule)
    for v in bad:
        print(v)
    if bad:
        print(f"{len(bad)} violation(s)")
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def _read_suite(path: str) -> list[SuiteConfig]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return [SuiteConfig(r["label"], int(r["num_tasks"]), int(r["num_depots"])) for r in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: suite CSV needs columns label,num_tasks,num_depots ({exc})") from exc


def cmd_bench(args: argparse.Namespace) -> int:
    suite = builtin_suite() if args.suite == "builtin" else _read_suite(args.suite)
    if args.only:
        wanted = set(args.only.split(","))
        suite = [c for c in suite if c.label in wanted]
    try:
        variants = [Variant(v).value for v in args.variants.split(",")]
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.reps < 1:
        raise InputError("--reps must be >= 1")
    records, summary = run_suite(suite, variants, args.reps, args.seed_base,
                                 _sa_config(args), args.workers)
    write_records(records, args.output)
    write_summary(summary, args.summary)
    for s in summary:
        g = "" if s.gap_vs_full is None else f" gap={100 * s.gap_vs_full:.2f}%"
        print(f"{s.instance} {s.variant}: mean={s.mean_cost:.3f} cv={100 * s.cv_population:.2f}%{g}")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    try:
        cost, schedule = brute_force_oracle(instance)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.output:
        save_schedule(schedule, args.output, instance, variant="oracle")
    print(repr(cost))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skydrop", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random planar instance")
    g.add_argument("--tasks", type=int, required=True)
    g.add_argument("--depots", type=int, required=True)
    g.add_argument("--area", type=float, default=50.0, help="square side in km")
    g.add_argument("--weight-min", type=float, default=1.0)
    g.add_argument("--weight-max", type=float, default=8.0)
    g.add_argument("--mix", type=float, nargs=3, default=[1 / 3, 1 / 3, 1 / 3],
                   metavar=("DROP", "PICKUP", "PICKDROP"))
    g.add_argument("--range", type=float, default=30.0, help="empty range h in km")
    g.add_argument("--capacity", type=float, default=8.0, help="max payload in kg")
    g.add_argument("--beta-max", type=float, default=2.0)
    g.add_argument("--alpha", type=float, default=0.9)
    g.add_argument("--rho", type=float, default=0.1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--name")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    _add_sa_flags(s)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.FULL.value)
    s.add_argument("-o", "--output", required=True, help="schedule JSON")
    s.add_argument("--trace", help="convergence trace CSV")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", help="check a schedule against an instance")
    v.add_argument("instance")
    v.add_argument("schedule")
    v.set_defaults(func=cmd_validate)

    b = sub.add_parser("bench", help="run a suite of generated instances")
    b.add_argument("--suite", default="builtin", help="'builtin' or a CSV label,num_tasks,num_depots")
    b.add_argument("--only", help="comma-separated config labels to keep")
    b.add_argument("--variants", default="full,no_ls,random_init,erpa_only")
    b.add_argument("--reps", type=int, default=10)
    b.add_argument("--seed-base", type=int, default=0)
    b.add_argument("--workers", type=int, default=1)
    _add_sa_flags(b)
    b.add_argument("-o", "--output", default="results.csv")
    b.add_argument("--summary", default="summary.csv")
    b.set_defaults(func=cmd_bench)

    o = sub.add_parser("oracle", help="exact optimum of a tiny instance")
    o.add_argument("instance")
    o.add_argument("-o", "--output", help="optional schedule JSON")
    o.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, InstanceFormatError, InstanceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

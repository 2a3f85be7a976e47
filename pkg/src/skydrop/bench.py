"""Benchmark harness: repeated seeded runs over a suite, Gap and C.V.
statistics, and CSV output for results, summaries and convergence traces."""

from __future__ import annotations

import csv
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

from .instances import SuiteConfig, suite_instance
from .model import validate_schedule
from .solver import SaConfig, SolverReport, Variant, solve_variant

log = logging.getLogger(__name__)

RESULT_COLUMNS = ["instance", "variant", "seed", "cost", "distance_km", "sorties", "time_s"]
TRACE_COLUMNS = ["iter", "temperature", "incumbent_cost", "best_cost"]


def gap(cost_other: float, cost_reference: float) -> float:
    """Relative improvement of the reference over another algorithm,
    measured against the other algorithm's cost."""
    if not cost_other > 0:
        raise ValueError(f"cost_other must be positive, got {cost_other}")
    return (cost_other - cost_reference) / cost_other


def coefficient_of_variation(costs: Sequence[float]) -> float:
    """Population standard deviation over mean."""
    if not costs:
        raise ValueError("need at least one cost")
    mean = statistics.fmean(costs)
    if mean == 0:
        raise ValueError("mean cost is zero")
    return statistics.pstdev(costs) / mean


@dataclass(frozen=True)
class RunRecord:
    instance: str
    variant: str
    seed: int
    cost: float
    distance_km: float
    sorties: int
    time_s: float

    @classmethod
    def from_report(cls, label: str, report: SolverReport) -> "RunRecord":
        s = report.best_schedule
        return cls(label, report.variant.value, report.seed, report.best_cost,
                   s.total_distance_km, s.sortie_count, report.wall_time_s)


def write_records(records: Iterable[RunRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_COLUMNS)
        for r in records:
            w.writerow([r.instance, r.variant, r.seed, repr(r.cost), repr(r.distance_km),
                        r.sorties, repr(r.time_s)])


def read_records(path: str | Path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [RunRecord(r["instance"], r["variant"], int(r["seed"]), float(r["cost"]),
                      float(r["distance_km"]), int(r["sorties"]), float(r["time_s"]))
            for r in rows]


def write_trace(report: SolverReport, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for p in report.trace:
            w.writerow([p.iteration, repr(p.temperature), repr(p.incumbent_cost), repr(p.best_cost)])


@dataclass(frozen=True)
class VariantSummary:
    instance: str
    num_tasks: int
    num_depots: int
    variant: str
    runs: int
    min_cost: float
    max_cost: float
    mean_cost: float
    mean_time_s: float
    cv_population: float
    gap_vs_full: float | None


def summarize(records: Sequence[RunRecord], suite: Sequence[SuiteConfig]) -> list[VariantSummary]:
    """Per (config, variant) statistics; Gap compares mean costs against
    the ``full`` variant of the same config when it was run."""
    out = []
    for cfg in suite:
        mine = [r for r in records if r.instance == cfg.label]
        variants = list(dict.fromkeys(r.variant for r in mine))
        full = [r.cost for r in mine if r.variant == Variant.FULL.value]
        full_mean = statistics.fmean(full) if full else None
        for v in variants:
            rs = [r for r in mine if r.variant == v]
            costs = [r.cost for r in rs]
            mean = statistics.fmean(costs)
            out.append(VariantSummary(
                cfg.label, cfg.num_tasks, cfg.num_depots, v, len(rs), min(costs), max(costs),
                mean, statistics.fmean(r.time_s for r in rs), coefficient_of_variation(costs),
                gap(mean, full_mean) if full_mean is not None else None))
    return out


def write_summary(summary: Iterable[VariantSummary], path: str | Path) -> None:
    names = [f.name for f in fields(VariantSummary)]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=names)
        w.writeheader()
        for s in summary:
            row = asdict(s)
            w.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v)
                        for k, v in row.items()})


def _run_one(job: tuple[SuiteConfig, int, str, int, SaConfig]) -> RunRecord:
    cfg, instance_seed, variant, seed, base = job
    instance = suite_instance(cfg, instance_seed)
    config = SaConfig(base.t0, base.t_end, base.q, base.L, base.n_starts, seed)
    report = solve_variant(instance, config, variant)
    bad = validate_schedule(instance, report.best_schedule)
    if bad:
        raise RuntimeError(f"{cfg.label}/{variant}/seed {seed}: invalid schedule: {bad[0]}")
    return RunRecord.from_report(cfg.label, report)


def run_suite(suite: Sequence[SuiteConfig], variants: Sequence[str | Variant],
              repetitions: int, seed_base: int = 0, config: SaConfig = SaConfig(),
              workers: int = 1) -> tuple[list[RunRecord], list[VariantSummary]]:
    """Run every variant ``repetitions`` times on one generated instance per
    suite config.

    Config ``i`` uses instance seed ``seed_base + i``; repetition ``r`` uses
    solver seed ``seed_base + r`` for every variant, so variants are paired.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    variants = [Variant(v).value for v in variants]
    jobs = [(cfg, seed_base + i, v, seed_base + r, config)
            for i, cfg in enumerate(suite) for v in variants for r in range(repetitions)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = []
        for job in jobs:
            records.append(_run_one(job))
            log.info("%s %s seed=%d cost=%.3f", job[0].label, job[2], job[3], records[-1].cost)
    order = {cfg.label: i for i, cfg in enumerate(suite)}
    vorder = {v: i for i, v in enumerate(variants)}
    records.sort(key=lambda r: (order[r.instance], vorder[r.variant], r.seed))
    return records, summarize(records, suite)

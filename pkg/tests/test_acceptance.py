"""Acceptance gate. Each test prints one ``CRITERION n PASS|FAIL`` line and
the lines are repeated in the pytest terminal summary."""

import math
import random
import statistics
import subprocess
import sys
from collections import Counter

import pytest

from skydrop.allocation import OPERATORS, AllocationScheme, apply_operator, metropolis_accept
from skydrop.bench import coefficient_of_variation, gap
from skydrop.instances import GenParams, builtin_suite, generate, save_instance, suite_instance
from skydrop.model import (
    DepotPlan, DroneSpec, ObjectiveWeights, Schedule, effective_range, make_sortie, objective,
    payload_penalty, validate_schedule,
)
from skydrop.oracle import brute_force_oracle
from skydrop.solver import SaConfig, solve, solve_variant

from conftest import planar

SEEDS = range(5)
VARIANTS = ("full", "no_ls", "random_init", "erpa_only")


def report(lines, n, ok, detail):
    line = f"CRITERION {n} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    lines.append(line)
    return ok


@pytest.fixture(scope="module")
def suite_runs():
    """(label, variant, seed) -> (best_cost, violation count), default settings.
    Config i uses instance seed i."""
    out = {}
    for i, cfg in enumerate(builtin_suite()):
        inst = suite_instance(cfg, i)
        for v in VARIANTS:
            for s in SEEDS:
                rep = solve_variant(inst, SaConfig(seed=s), v)
                out[cfg.label, v, s] = (rep.best_cost, len(validate_schedule(inst, rep.best_schedule)))
    return out


def _mean(runs, label, variant):
    return statistics.fmean(runs[label, variant, s][0] for s in SEEDS)


def test_criterion_1_validity(suite_runs, acceptance_lines):
    keys = [(c.label, v, s) for c in builtin_suite() for v in ("full", "no_ls", "random_init")
            for s in range(3)]
    bad = [k for k in keys if suite_runs[k][1]]
    assert report(acceptance_lines, 1, not bad,
                  f"{len(keys) - len(bad)}/{len(keys)} schedules with zero violations")


def test_criterion_2_oracle(acceptance_lines):
    within, below, n = 0, 0, 50
    for i in range(n):
        rng = random.Random(i)
        inst = generate(GenParams(rng.randint(1, 5), rng.randint(1, 2), seed=10_000 + i))
        opt, _ = brute_force_oracle(inst)
        got = solve(inst, SaConfig(seed=i)).best_cost
        within += got <= 1.02 * opt
        below += got < opt - 1e-9
    ok = within >= 0.9 * n and below == 0
    assert report(acceptance_lines, 2, ok, f"{within}/{n} within 2% of optimum, {below} below it")


def test_criterion_3_erpa_gap(suite_runs, acceptance_lines):
    gaps = {c.label: gap(_mean(suite_runs, c.label, "erpa_only"), _mean(suite_runs, c.label, "full"))
            for c in builtin_suite()}
    avg = statistics.fmean(gaps.values())
    ok = avg >= 0.08 and min(gaps.values()) >= 0
    assert report(acceptance_lines, 3, ok,
                  f"mean gap {100 * avg:.2f}%, min {100 * min(gaps.values()):.2f}% "
                  f"({min(gaps, key=gaps.get)})")


def test_criterion_4_ablation_order(suite_runs, acceptance_lines):
    losses = []
    for c in builtin_suite():
        full = _mean(suite_runs, c.label, "full")
        for v in ("no_ls", "random_init"):
            other = _mean(suite_runs, c.label, v)
            if full > other:
                losses.append(f"{c.label}:{v} {100 * gap(other, full):+.2f}%")
    detail = "full never worse" if not losses else "full worse on " + ", ".join(losses)
    assert report(acceptance_lines, 4, not losses, detail)


def test_criterion_5_robustness(acceptance_lines):
    inst = generate(GenParams(100, 5, seed=500))
    cv = coefficient_of_variation([solve(inst, SaConfig(seed=s)).best_cost for s in range(10)])
    assert report(acceptance_lines, 5, cv <= 0.05, f"C.V. {100 * cv:.2f}% over 10 seeds")


def test_criterion_6_convergence(acceptance_lines):
    inst = generate(GenParams(80, 5, seed=600))
    rep = solve(inst, SaConfig(seed=0))
    target = 0.9 * rep.initial_cost
    early = [p for p in rep.trace[1:51] if p.incumbent_cost <= target]
    best = [p.best_cost for p in rep.trace]
    monotone = all(b <= a for a, b in zip(best, best[1:]))
    first = next((p.iteration for p in rep.trace if p.incumbent_cost <= target), None)
    low50 = min(p.incumbent_cost for p in rep.trace[1:51])
    detail = (f"lowest incumbent in iterations 1-50 is {100 * (low50 / rep.initial_cost - 1):+.2f}% "
              f"vs initial; -10% first reached at iteration {first}; "
              f"best-cost trace {'non-increasing' if monotone else 'INCREASES'}")
    assert report(acceptance_lines, 6, bool(early) and monotone, detail)


def _fixtures():
    trio = planar([(0, 0)], [(3, 4, "drop", 2.0, None), (6, 8, "pickup", None, 3.0),
                             (0, 7, "pickdrop", 1.0, 1.0)])
    # hand-summed: 5+5 + 10+10 + 7+7 km, three sorties
    a = Schedule((DepotPlan(4, tuple(make_sortie(trio, 4, [t]) for t in (1, 2, 3))),))
    # 5 + 5 + 10 km chained, plus 7+7 km
    b = Schedule((DepotPlan(4, (make_sortie(trio, 4, [1, 2]), make_sortie(trio, 4, [3]))),))
    line = planar([(0, 0)], [(2.5, 0, "drop", 1.0, None)], weights=ObjectiveWeights(0.5, 0.5))
    s = make_sortie(line, 2, [1])
    c = Schedule((DepotPlan(2, (s, s)),))
    return [(a, trio.weights, 0.9 * 44 + 0.1 * 3), (b, trio.weights, 0.9 * 34 + 0.1 * 2),
            (c, line.weights, 6.0)]


def test_criterion_7_model_exactness(acceptance_lines):
    spec = DroneSpec(30.0, 8.0, 2.0)
    grid = [8.0 * i / 19 for i in range(20)]
    beta_err = max(abs(payload_penalty(w, spec) - (1.0 + w / 8.0)) for w in grid)
    range_err = max(abs(effective_range(w, spec) - 30.0 / (1.0 + w / 8.0)) for w in grid)
    obj_err = max(abs(objective(s, w) - want) for s, w, want in _fixtures())
    rng = random.Random(2024)
    freq = sum(metropolis_accept(7.5, 7.5, rng) for _ in range(100_000)) / 100_000
    ok = beta_err <= 1e-9 and range_err <= 1e-9 and obj_err <= 1e-9 and abs(freq - math.exp(-1)) <= 0.01
    assert report(acceptance_lines, 7, ok,
                  f"beta err {beta_err:.1e}, range err {range_err:.1e}, objective err {obj_err:.1e}, "
                  f"Metropolis freq {freq:.4f} vs {math.exp(-1):.4f}")


def test_criterion_8_operator_conservation(acceptance_lines):
    rng = random.Random(8)
    failures = 0
    for i in range(10_000):
        if i % 100 == 0:
            inst = generate(GenParams(rng.randint(1, 40), rng.randint(1, 6), seed=i))
            ids = [t.id for t in inst.tasks]
            lists = {d: [] for d in inst.depot_ids}
            for t in ids:
                lists[rng.choice(inst.feasible_depots[t])].append(t)
            scheme = AllocationScheme.from_lists(lists)
        before = Counter(scheme.all_tasks())
        scheme = apply_operator(rng.choice(OPERATORS), scheme, inst, rng)
        failures += Counter(scheme.all_tasks()) != before or sorted(before) != ids
    assert report(acceptance_lines, 8, failures == 0, f"{failures} failures in 10000 applications")


def test_criterion_9_determinism(tmp_path, acceptance_lines):
    inst_path = tmp_path / "inst.json"
    save_instance(generate(GenParams(40, 4, seed=900)), inst_path)
    blobs = []
    for run in range(2):
        sched, trace = tmp_path / f"s{run}.json", tmp_path / f"t{run}.csv"
        subprocess.run([sys.executable, "-m", "skydrop.cli", "solve", str(inst_path), "--seed", "7",
                        "-o", str(sched), "--trace", str(trace)], check=True, capture_output=True)
        blobs.append((sched.read_bytes(), trace.read_bytes()))
    same = blobs[0] == blobs[1]
    assert report(acceptance_lines, 9, same,
                  "schedule and trace files byte-identical across two processes" if same
                  else "output files differ between runs")

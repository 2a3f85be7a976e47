"""Exhaustive optimum for tiny instances, used to check the heuristic."""

from __future__ import annotations

import itertools
from functools import lru_cache

from .model import (
    DepotPlan, Instance, Schedule, Sortie, TaskKind, leg_feasible, make_sortie, objective,
)

MAX_TASKS = 6
MAX_DEPOTS = 2


def _feasible(instance: Instance, sortie: Sortie) -> bool:
    return all(leg_feasible(leg, instance) for leg in sortie.legs)


def brute_force_oracle(instance: Instance) -> tuple[float, Schedule]:
    """Enumerate every depot assignment and every drop/pickup pairing.

    Each depot's best plan is found by trying all partial matchings of its
    drops to its pickups; unmatched tasks fly alone. Sortie order within a
    depot does not affect cost, so it is not enumerated.
    """
    if instance.num_tasks > MAX_TASKS or len(instance.depots) > MAX_DEPOTS:
        raise ValueError(f"oracle is limited to {MAX_TASKS} tasks and {MAX_DEPOTS} depots")
    w = instance.weights

    def price(s: Sortie) -> float:
        return w.alpha * s.distance_km + w.rho

    solo: dict[tuple[int, int], Sortie] = {}
    for d in instance.depot_ids:
        for t in instance.tasks:
            s = make_sortie(instance, d, [t.id])
            if _feasible(instance, s):
                solo[d, t.id] = s

    @lru_cache(maxsize=None)
    def best_plan(depot: int, group: frozenset[int]) -> tuple[float, tuple[Sortie, ...]]:
        drops = sorted(t for t in group if instance.task(t).kind is TaskKind.DROP)
        picks = sorted(t for t in group if instance.task(t).kind is TaskKind.PICKUP)
        others = sorted(group - set(drops) - set(picks))

        def match(i: int, free: tuple[int, ...]) -> tuple[float, tuple[Sortie, ...]]:
            if i == len(drops):
                rest = tuple(solo[depot, p] for p in free)
                return sum(price(s) for s in rest), rest
            d = drops[i]
            c, ss = match(i + 1, free)
            best = (c + price(solo[depot, d]), (solo[depot, d],) + ss)
            for p in free:
                chained = make_sortie(instance, depot, [d, p])
                if not _feasible(instance, chained):
                    continue
                c, ss = match(i + 1, tuple(x for x in free if x != p))
                if c + price(chained) < best[0]:
                    best = (c + price(chained), (chained,) + ss)
            return best

        cost, sorties = match(0, tuple(picks))
        fixed = tuple(solo[depot, t] for t in others)
        return cost + sum(price(s) for s in fixed), sorties + fixed

    options = [[d for d in instance.depot_ids if (d, t.id) in solo] for t in instance.tasks]
    if any(not o for o in options):
        raise ValueError("instance has a task no depot can serve")
    best_cost, best_plans = float("inf"), None
    ids = [t.id for t in instance.tasks]
    for assign in itertools.product(*options):
        groups = {d: frozenset(t for t, a in zip(ids, assign) if a == d) for d in instance.depot_ids}
        parts = {d: best_plan(d, g) for d, g in groups.items()}
        cost = sum(c for c, _ in parts.values())
        if cost < best_cost:
            best_cost, best_plans = cost, parts
    schedule = Schedule(tuple(
        DepotPlan(d, tuple(sorted(ss, key=lambda s: s.tasks))) for d, (_, ss) in best_plans.items()))
    return objective(schedule, w), schedule

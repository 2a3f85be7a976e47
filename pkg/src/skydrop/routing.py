"""Phase two: turning each depot's task list into drone sorties.

``erpa`` is the randomized multi-start constructor used once at start-up.
``repair`` / ``RouteBuilder`` cut each stretch of a route into legal
sorties greedily, chaining a drop with the pickup right after it whenever
the chained flight is in range; stretches are split, never joined.
``local_search`` merges one lone drop sortie with one lone pickup sortie.
"""

from __future__ import annotations

import random
from typing import Sequence

from .allocation import AllocationScheme, Segments
from .model import (
    DepotPlan, Instance, Leg, RoutePattern, Schedule, Sortie, TaskKind,
    UnserviceableTaskError, objective,
)

_SOLO_PATTERN = {
    TaskKind.DROP: RoutePattern.DROP_ONLY,
    TaskKind.PICKUP: RoutePattern.PICKUP_ONLY,
    TaskKind.PICKDROP: RoutePattern.PICKDROP_SAME,
}


def solo_sortie(instance: Instance, depot: int, task: int) -> Sortie:
    if instance.dmat[depot][task] > instance.reach[task]:
        raise UnserviceableTaskError(task, depot)
    out_w, back_w = instance.payloads[task]
    d = instance.dmat[depot][task]
    return Sortie(depot, (Leg(depot, task, out_w), Leg(task, depot, back_w)),
                  _SOLO_PATTERN[instance.kinds[task]], d + d)


def can_chain(instance: Instance, depot: int, drop: int, pickup: int) -> bool:
    """Whether depot -> drop -> pickup -> depot is a feasible sortie."""
    dm = instance.dmat
    return (instance.kinds[drop] is TaskKind.DROP
            and instance.kinds[pickup] is TaskKind.PICKUP
            and dm[drop][pickup] <= instance.drone.max_range_km
            and dm[depot][drop] <= instance.reach[drop]
            and dm[depot][pickup] <= instance.reach[pickup])


def chained_sortie(instance: Instance, depot: int, drop: int, pickup: int) -> Sortie:
    dm = instance.dmat
    return Sortie(
        depot,
        (Leg(depot, drop, instance.payloads[drop][0]), Leg(drop, pickup, 0.0),
         Leg(pickup, depot, instance.payloads[pickup][1])),
        RoutePattern.DROP_THEN_PICKUP,
        dm[depot][drop] + dm[drop][pickup] + dm[pickup][depot],
    )


def cut_sorties(instance: Instance, depot: int, tasks: Sequence[int]) -> list[Sortie]:
    """Greedy left-to-right cut of an ordered task list into sorties."""
    kinds = instance.kinds
    out = []
    i, n = 0, len(tasks)
    while i < n:
        t = tasks[i]
        if (i + 1 < n and kinds[t] is TaskKind.DROP
                and can_chain(instance, depot, t, tasks[i + 1])):
            out.append(chained_sortie(instance, depot, t, tasks[i + 1]))
            i += 2
        else:
            out.append(solo_sortie(instance, depot, t))
            i += 1
    return out


def repair(raw_route: Sequence[int | Leg], instance: Instance) -> list[Sortie]:
    """Turn a raw depot-anchored route into legal sorties.

    ``raw_route`` is a node sequence (or a list of legs, whose payloads are
    ignored and re-derived) that starts and ends at one depot and may revisit
    it. Each stretch between depot visits is cut greedily, so the output
    serves the same tasks in the same order.
    """
    if raw_route and isinstance(raw_route[0], tuple):
        legs = [Leg(*leg) for leg in raw_route]
        nodes = [legs[0].src] + [leg.dst for leg in legs]
    else:
        nodes = list(raw_route)
    if len(nodes) < 2 or nodes[0] != nodes[-1] or not instance.is_depot(nodes[0]):
        raise ValueError("raw route must start and end at the same depot")
    depot = nodes[0]
    out: list[Sortie] = []
    stretch: list[int] = []
    for node in nodes[1:]:
        if instance.is_depot(node):
            if node != depot:
                raise ValueError(f"route of depot {depot} passes through depot {node}")
            out.extend(cut_sorties(instance, depot, stretch))
            stretch = []
        elif instance.is_task(node):
            stretch.append(node)
        else:
            raise KeyError(f"unknown node id {node}")
    return out


class RouteBuilder:
    """Builds a schedule from an allocation scheme by cutting every segment.

    Plans are memoized per (depot, segments); ``calls`` counts schedule
    builds, not cache misses.
    """

    def __init__(self, instance: Instance, max_cached: int = 100_000):
        self.instance = instance
        self.calls = 0
        self.max_cached = max_cached
        self._plans: dict[tuple[int, Segments], DepotPlan] = {}

    def plan(self, depot: int, segments: Segments) -> DepotPlan:
        key = (depot, segments)
        plan = self._plans.get(key)
        if plan is None:
            if len(self._plans) >= self.max_cached:
                self._plans.clear()
            plan = DepotPlan(depot, tuple(
                s for seg in segments for s in cut_sorties(self.instance, depot, seg)))
            self._plans[key] = plan
        return plan

    def __call__(self, scheme: AllocationScheme) -> Schedule:
        self.calls += 1
        return Schedule(tuple(self.plan(d, segs) for d, segs in scheme.segments.items()))


def erpa_attempt(scheme: AllocationScheme, instance: Instance, rng: random.Random) -> Schedule:
    """One randomized construction: shuffle each depot's tasks, open a sortie
    per drop or pick-drop task, and let a pickup that directly follows a drop
    join that drop's sortie on a coin flip (if the chain is in range)."""
    kinds = instance.kinds
    plans = []
    for depot, tasks in scheme.tasks.items():
        order = list(tasks)
        rng.shuffle(order)
        sorties: list[Sortie] = []
        for n, t in enumerate(order):
            if (kinds[t] is TaskKind.PICKUP and n > 0 and kinds[order[n - 1]] is TaskKind.DROP
                    and rng.random() > 0.5 and can_chain(instance, depot, order[n - 1], t)):
                sorties[-1] = chained_sortie(instance, depot, order[n - 1], t)
            else:
                sorties.append(solo_sortie(instance, depot, t))
        plans.append(DepotPlan(depot, tuple(sorties)))
    return Schedule(tuple(plans))


def erpa(scheme: AllocationScheme, instance: Instance, rng: random.Random,
         n_starts: int = 10) -> Schedule:
    """Best of ``n_starts`` independent ``erpa_attempt`` runs.

    Each attempt gets its own substream seeded from ``rng``; ties keep the
    earliest attempt.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    seeds = [rng.getrandbits(64) for _ in range(n_starts)]
    best, best_cost = None, float("inf")
    for seed in seeds:
        s = erpa_attempt(scheme, instance, random.Random(seed))
        c = objective(s, instance.weights)
        if c < best_cost:
            best, best_cost = s, c
    return best


def local_search(schedule: Schedule, instance: Instance, rng: random.Random) -> Schedule:
    """Merge a random lone-pickup sortie into a random lone-drop sortie at a
    random depot. Returns ``schedule`` itself when nothing can be merged."""
    depot = rng.choice([p.depot_id for p in schedule.plans])
    plan = schedule.plan(depot)
    lone_pick = [i for i, s in enumerate(plan.sorties) if s.pattern is RoutePattern.PICKUP_ONLY]
    lone_drop = [i for i, s in enumerate(plan.sorties) if s.pattern is RoutePattern.DROP_ONLY]
    if not lone_pick or not lone_drop:
        return schedule
    mi = rng.choice(lone_pick)
    ni = rng.choice(lone_drop)
    pickup = plan.sorties[mi].legs[0].dst
    drop = plan.sorties[ni].legs[0].dst
    if not can_chain(instance, depot, drop, pickup):
        return schedule
    sorties = list(plan.sorties)
    sorties[ni] = chained_sortie(instance, depot, drop, pickup)
    del sorties[mi]
    return schedule.with_plan(DepotPlan(depot, tuple(sorties)))

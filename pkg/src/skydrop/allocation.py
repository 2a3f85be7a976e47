"""Phase one: which depot serves which task, and in what order.

An allocation scheme keeps, per depot, an ordered task list split into
segments. A segment is the stretch of tasks one drone was last planned to
fly; phase two may only split a segment (when it no longer forms a legal
route), never join two. Exchange operators move tasks between positions
while the segment lengths stay put, as in a route plan whose task slots are
swapped. Relocations drop a task into a random gap of another depot's route.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .model import Instance, Schedule, TaskKind, UnserviceableTaskError, objective

Segments = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class AllocationScheme:
    segments: Mapping[int, Segments]

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", {
            d: tuple(tuple(seg) for seg in segs if seg)
            for d, segs in sorted(self.segments.items())})

    @classmethod
    def from_lists(cls, lists: Mapping[int, Sequence[int]]) -> "AllocationScheme":
        """One segment per depot holding its whole task list."""
        return cls({d: (tuple(ts),) for d, ts in lists.items()})

    @classmethod
    def from_schedule(cls, schedule: Schedule) -> "AllocationScheme":
        """One segment per sortie, in schedule order."""
        return cls({p.depot_id: tuple(s.tasks for s in p.sorties) for p in schedule.plans})

    @property
    def depot_ids(self) -> tuple[int, ...]:
        return tuple(self.segments)

    @property
    def tasks(self) -> dict[int, tuple[int, ...]]:
        """Per-depot ordered task lists."""
        return {d: tuple(t for seg in segs for t in seg) for d, segs in self.segments.items()}

    def __getitem__(self, depot_id: int) -> tuple[int, ...]:
        return tuple(t for seg in self.segments[depot_id] for t in seg)

    def all_tasks(self) -> list[int]:
        return [t for segs in self.segments.values() for seg in segs for t in seg]

    def depot_of(self, task_id: int) -> int:
        for d, segs in self.segments.items():
            if any(task_id in seg for seg in segs):
                return d
        raise KeyError(task_id)

    def replace(self, updates: Mapping[int, Segments]) -> "AllocationScheme":
        merged = dict(self.segments)
        merged.update(updates)
        return AllocationScheme(merged)


class OperatorKind(str, enum.Enum):
    TWO_EXCHANGE = "2-exchange"
    THREE_EXCHANGE = "3-exchange"
    PCT30_EXCHANGE = "30%-exchange"
    RELOCATION = "relocation"
    OTHER_RELOCATION = "other-relocation"
    PCT10_RELOCATION = "10%-relocation"


OPERATORS = tuple(OperatorKind)


def _shuffled(items: Iterable[int], rng: random.Random) -> tuple[int, ...]:
    out = list(items)
    rng.shuffle(out)
    return tuple(out)


def initial_allocate(instance: Instance, rng: random.Random) -> AllocationScheme:
    """Assign every task to its nearest depot, in random order per depot.

    This is the k-means assignment step with the cluster centres pinned to
    the depot locations.
    """
    groups: dict[int, list[int]] = {d: [] for d in instance.depot_ids}
    for t in instance.tasks:
        d = instance.nearest_depot(t.id)
        if not instance.serviceable(t.id, d):
            raise UnserviceableTaskError(t.id)
        groups[d].append(t.id)
    return AllocationScheme.from_lists({d: _shuffled(ts, rng) for d, ts in groups.items()})


def random_allocate(instance: Instance, rng: random.Random) -> AllocationScheme:
    """Uniform random depot per task among the depots that can serve it."""
    groups: dict[int, list[int]] = {d: [] for d in instance.depot_ids}
    for t in instance.tasks:
        options = instance.feasible_depots[t.id]
        if not options:
            raise UnserviceableTaskError(t.id)
        groups[rng.choice(options)].append(t.id)
    return AllocationScheme.from_lists({d: _shuffled(ts, rng) for d, ts in groups.items()})


def _resplit(flat: Sequence[int], like: Segments) -> Segments:
    out, i = [], 0
    for seg in like:
        out.append(tuple(flat[i:i + len(seg)]))
        i += len(seg)
    return tuple(out)


def _permute_positions(scheme: AllocationScheme, min_len: int, count: Callable[[int], int],
                       rng: random.Random, cycle: bool) -> AllocationScheme:
    lists = scheme.tasks
    depots = [d for d, ts in lists.items() if len(ts) >= min_len]
    if not depots:
        return scheme
    d = rng.choice(depots)
    old = lists[d]
    pos = rng.sample(range(len(old)), count(len(old)))
    if cycle:
        src = pos[1:] + pos[:1]
    else:
        src = pos[:]
        rng.shuffle(src)
    new = list(old)
    for p, s in zip(pos, src):
        new[p] = old[s]
    return scheme.replace({d: _resplit(new, scheme.segments[d])})


def _without(segs: Segments, task: int) -> Segments:
    return tuple(tuple(t for t in seg if t != task) for seg in segs)


def _insert(segs: Segments, task: int, rng: random.Random) -> Segments:
    """Insert into a uniformly random gap of the depot's route. A route with
    n tasks in s segments has n + s gaps (each segment's start, interior and
    end positions); an empty route gets a new segment."""
    if not segs:
        return ((task,),)
    gap = rng.randrange(sum(len(seg) + 1 for seg in segs))
    out = list(segs)
    for j, seg in enumerate(segs):
        if gap <= len(seg):
            out[j] = seg[:gap] + (task,) + seg[gap:]
            break
        gap -= len(seg) + 1
    return tuple(out)


def _relocate_one(scheme: AllocationScheme, instance: Instance, kinds: set[TaskKind],
                  rng: random.Random) -> AllocationScheme:
    kind_of = instance.kinds
    lists = scheme.tasks
    sources = [d for d, ts in lists.items() if any(kind_of[t] in kinds for t in ts)]
    if len(lists) < 2 or not sources:
        return scheme
    k1 = rng.choice(sources)
    task = rng.choice([t for t in lists[k1] if kind_of[t] in kinds])
    targets = [d for d in instance.feasible_depots[task] if d != k1]
    if not targets:
        return scheme
    k2 = rng.choice(sorted(targets))
    return scheme.replace({k1: _without(scheme.segments[k1], task),
                           k2: _insert(scheme.segments[k2], task, rng)})


def _relocate_share(scheme: AllocationScheme, instance: Instance, share: float,
                    rng: random.Random) -> AllocationScheme:
    lists = scheme.tasks
    sources = [d for d, ts in lists.items() if ts]
    if len(lists) < 2 or not sources:
        return scheme
    k1 = rng.choice(sources)
    tasks = lists[k1]
    movable = [t for t in tasks if any(d != k1 for d in instance.feasible_depots[t])]
    picked = rng.sample(movable, min(math.ceil(share * len(tasks)), len(movable)))
    segs = dict(scheme.segments)
    for t in picked:
        # feasible_depots is sorted nearest first
        k2 = next(d for d in instance.feasible_depots[t] if d != k1)
        segs[k1] = _without(segs[k1], t)
        segs[k2] = _insert(segs[k2], t, rng)
    return AllocationScheme(segs)


def apply_operator(kind: OperatorKind, scheme: AllocationScheme, instance: Instance,
                   rng: random.Random) -> AllocationScheme:
    """Return a neighbour of ``scheme``; the input scheme is never modified.

    When a depot lacks the tasks an operator needs, the input scheme is
    returned unchanged. Relocations only target depots that can serve the
    moved task on a lone round trip.
    """
    kind = OperatorKind(kind)
    if kind is OperatorKind.TWO_EXCHANGE:
        return _permute_positions(scheme, 2, lambda n: 2, rng, cycle=True)
    if kind is OperatorKind.THREE_EXCHANGE:
        return _permute_positions(scheme, 3, lambda n: 3, rng, cycle=True)
    if kind is OperatorKind.PCT30_EXCHANGE:
        # ceil(0.3 n) >= 2 needs n >= 4
        return _permute_positions(scheme, 4, lambda n: math.ceil(0.3 * n), rng, cycle=False)
    if kind is OperatorKind.RELOCATION:
        return _relocate_one(scheme, instance, {TaskKind.PICKUP}, rng)
    if kind is OperatorKind.OTHER_RELOCATION:
        return _relocate_one(scheme, instance, {TaskKind.DROP, TaskKind.PICKDROP}, rng)
    return _relocate_share(scheme, instance, 0.1, rng)


def metropolis_accept(df: float, t: float, rng: random.Random) -> bool:
    """Always take an improvement; take a worsening of ``df`` with
    probability exp(-df / t)."""
    if not t > 0:
        raise ValueError(f"temperature must be positive, got {t}")
    if df < 0:
        return True
    return math.exp(-df / t) >= rng.random()


@dataclass(frozen=True)
class IvndStep:
    operator: OperatorKind
    candidate_cost: float
    incumbent_cost: float
    accepted: bool


RouteBuilderFn = Callable[[AllocationScheme], Schedule]


def ivnd(scheme: AllocationScheme, schedule: Schedule, cost: float, L: int, t: float,
         rng: random.Random, route_builder: RouteBuilderFn, instance: Instance,
         on_accept: Callable[[AllocationScheme, Schedule, float], None] | None = None,
         steps: list[IvndStep] | None = None) -> tuple[AllocationScheme, Schedule, float]:
    """Run ``L`` reallocation moves at temperature ``t``.

    Each move applies a uniformly chosen operator, rebuilds routes with
    ``route_builder`` and keeps the result under the Metropolis rule. The
    accepted scheme is re-read from the accepted schedule so its segments
    match the sorties actually flown. Returns the final incumbent
    (scheme, schedule, cost).
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    weights = instance.weights
    for _ in range(L):
        kind = rng.choice(OPERATORS)
        cand = apply_operator(kind, scheme, instance, rng)
        s0 = route_builder(cand)
        f0 = objective(s0, weights)
        accepted = metropolis_accept(f0 - cost, t, rng)
        if steps is not None:
            steps.append(IvndStep(kind, f0, cost, accepted))
        if accepted:
            scheme, schedule, cost = AllocationScheme.from_schedule(s0), s0, f0
            if on_accept is not None:
                on_accept(scheme, schedule, cost)
    return scheme, schedule, cost

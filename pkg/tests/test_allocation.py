import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from skydrop.allocation import (
    OPERATORS, AllocationScheme, IvndStep, OperatorKind, apply_operator, initial_allocate, ivnd,
    metropolis_accept, random_allocate,
)
from skydrop.instances import GenParams, generate
from skydrop.model import objective
from skydrop.routing import RouteBuilder

from conftest import planar


def _inst(c=20, m=3, seed=0):
    return generate(GenParams(c, m, seed=seed))


def _random_scheme(inst, rng):
    """Random feasible depot per task, tasks cut into random segments."""
    lists = {d: [] for d in inst.depot_ids}
    for t in inst.tasks:
        lists[rng.choice(inst.feasible_depots[t.id])].append(t.id)
    segs = {}
    for d, ts in lists.items():
        rng.shuffle(ts)
        cut, out = 0, []
        while cut < len(ts):
            n = rng.randint(1, 3)
            out.append(tuple(ts[cut:cut + n]))
            cut += n
        segs[d] = tuple(out)
    return AllocationScheme(segs)


def test_initial_allocate_single_depot():
    inst = _inst(12, 1)
    scheme = initial_allocate(inst, random.Random(0))
    assert sorted(scheme[inst.depot_ids[0]]) == list(range(1, 13))


def test_initial_allocate_nearer_depot():
    inst = planar([(0, 0), (50, 50)], [(1, 1, "drop", 1.0, None)])
    assert initial_allocate(inst, random.Random(0)).depot_of(1) == 2


def test_initial_allocate_matches_nearest_scan():
    inst = _inst(20, 3, seed=5)
    scheme = initial_allocate(inst, random.Random(1))
    for t in inst.tasks:
        want = min(inst.depots, key=lambda d: math.dist((t.location.x, t.location.y),
                                                         (d.location.x, d.location.y))).id
        assert scheme.depot_of(t.id) == want


def test_random_allocate_uses_feasible_depots():
    inst = _inst(40, 4, seed=2)
    scheme = random_allocate(inst, random.Random(3))
    assert sorted(scheme.all_tasks()) == list(range(1, 41))
    for t in inst.tasks:
        assert scheme.depot_of(t.id) in inst.feasible_depots[t.id]


def test_scheme_views():
    s = AllocationScheme({5: ((1, 2), (3,)), 4: ()})
    assert s.depot_ids == (4, 5)
    assert s.tasks == {4: (), 5: (1, 2, 3)}
    assert s[5] == (1, 2, 3)
    assert AllocationScheme.from_lists({5: [3, 1]}).segments == {5: ((3, 1),)}


def test_two_exchange_swaps_pair():
    inst = planar([(0, 0)], [(1, 0, "drop", 1.0, None), (0, 1, "pickup", None, 1.0)])
    s = AllocationScheme.from_lists({3: [1, 2]})
    assert apply_operator(OperatorKind.TWO_EXCHANGE, s, inst, random.Random(0))[3] == (2, 1)


def test_exchange_keeps_segment_lengths():
    inst = _inst(12, 1)
    s = AllocationScheme({13: ((1, 2), (3,), (4, 5, 6), (7,), (8, 9, 10, 11, 12))})
    rng = random.Random(4)
    for kind in (OperatorKind.TWO_EXCHANGE, OperatorKind.THREE_EXCHANGE, OperatorKind.PCT30_EXCHANGE):
        out = apply_operator(kind, s, inst, rng)
        assert [len(x) for x in out.segments[13]] == [2, 1, 3, 1, 5]
        assert sorted(out[13]) == sorted(s[13]) and out[13] != s[13]


def test_relocation_single_depot_is_noop():
    inst = _inst(10, 1)
    s = initial_allocate(inst, random.Random(0))
    for kind in (OperatorKind.RELOCATION, OperatorKind.OTHER_RELOCATION, OperatorKind.PCT10_RELOCATION):
        assert apply_operator(kind, s, inst, random.Random(1)) == s


def test_exchange_too_small_is_noop():
    inst = _inst(3, 1)
    s = AllocationScheme.from_lists({4: [1, 2, 3]})
    assert apply_operator(OperatorKind.PCT30_EXCHANGE, s, inst, random.Random(0)) == s


def test_pct10_moves_two_of_twenty():
    # two depots close together so every task can move
    inst = planar([(0, 0), (1, 0)],
                  [(i % 5, i // 5, "drop", 1.0, None) for i in range(20)])
    s = AllocationScheme.from_lists({21: list(range(1, 21)), 22: []})
    out = apply_operator(OperatorKind.PCT10_RELOCATION, s, inst, random.Random(0))
    assert len(out[22]) == 2 and len(out[21]) == 18
    assert sorted(out.all_tasks()) == sorted(s.all_tasks())


def test_relocation_kinds():
    inst = _inst(30, 3, seed=9)
    rng = random.Random(2)
    s = initial_allocate(inst, rng)
    for _ in range(200):
        for kind, allowed in ((OperatorKind.RELOCATION, {"pickup"}),
                              (OperatorKind.OTHER_RELOCATION, {"drop", "pickdrop"})):
            out = apply_operator(kind, s, inst, rng)
            moved = [t for t in out.all_tasks() if out.depot_of(t) != s.depot_of(t)]
            assert len(moved) <= 1
            for t in moved:
                assert inst.task(t).kind.value in allowed
                assert out.depot_of(t) in inst.feasible_depots[t]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(OPERATORS))
def test_operator_conserves_tasks(seed, kind):
    rng = random.Random(seed)
    inst = _inst(rng.randint(1, 25), rng.randint(1, 4), seed=seed % 50)
    s = _random_scheme(inst, rng)
    out = apply_operator(kind, s, inst, rng)
    assert Counter(out.all_tasks()) == Counter(s.all_tasks())
    if kind.value.endswith("exchange"):
        assert {d: set(ts) for d, ts in out.tasks.items()} == {d: set(ts) for d, ts in s.tasks.items()}


def test_metropolis_rules():
    rng = random.Random(0)
    assert all(metropolis_accept(-5.0, 0.001, rng) for _ in range(100))
    assert all(metropolis_accept(0.0, 10.0, rng) for _ in range(100))
    with pytest.raises(ValueError):
        metropolis_accept(1.0, 0.0, rng)


def test_metropolis_frequency_at_df_equals_t():
    rng = random.Random(12345)
    n = 100_000
    hits = sum(metropolis_accept(3.0, 3.0, rng) for _ in range(n))
    assert abs(hits / n - math.exp(-1)) <= 0.01


def _ivnd_setup(c=15, m=2, seed=1):
    inst = _inst(c, m, seed=seed)
    builder = RouteBuilder(inst)
    scheme = initial_allocate(inst, random.Random(0))
    sched = builder(scheme)
    scheme = AllocationScheme.from_schedule(sched)
    return inst, builder, scheme, sched, objective(sched, inst.weights)


def test_ivnd_single_task_unchanged():
    inst = planar([(0, 0)], [(1, 1, "drop", 1.0, None)])
    builder = RouteBuilder(inst)
    s = AllocationScheme.from_lists({2: [1]})
    sched = builder(s)
    out = ivnd(s, sched, objective(sched, inst.weights), 30, 5.0, random.Random(0), builder, inst)
    assert out[0] == s


def test_ivnd_exact_builds_and_determinism():
    inst, builder, scheme, sched, cost = _ivnd_setup()
    before = builder.calls
    a = ivnd(scheme, sched, cost, 17, 2.0, random.Random(9), builder, inst)
    assert builder.calls - before == 17
    b = ivnd(scheme, sched, cost, 17, 2.0, random.Random(9), builder, inst)
    assert a == b


def test_ivnd_step_trace_consistent():
    inst, builder, scheme, sched, cost = _ivnd_setup(30, 3)
    steps: list[IvndStep] = []
    *_, final = ivnd(scheme, sched, cost, 200, 1.0, random.Random(5), builder, inst, steps=steps)
    cur = cost
    for st_ in steps:
        assert st_.incumbent_cost == cur
        if st_.candidate_cost < cur:
            assert st_.accepted
        if st_.accepted:
            cur = st_.candidate_cost
    assert cur == final


def test_ivnd_accepted_schedule_matches_scheme():
    inst, builder, scheme, sched, cost = _ivnd_setup(25, 3, seed=4)
    seen = []
    ivnd(scheme, sched, cost, 100, 5.0, random.Random(1), builder, inst,
         on_accept=lambda g, s, f: seen.append((g, s, f)))
    assert seen
    for g, s, f in seen:
        assert builder(g) == s
        assert objective(s, inst.weights) == pytest.approx(f, abs=1e-9)


def test_ivnd_rejects_bad_L():
    inst, builder, scheme, sched, cost = _ivnd_setup()
    with pytest.raises(ValueError):
        ivnd(scheme, sched, cost, 0, 1.0, random.Random(0), builder, inst)

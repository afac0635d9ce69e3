import numpy as np
import pytest

from robsched.core import validate
from robsched.generate import (
    BufferPlan,
    GenerationError,
    InstanceGenConfig,
    _default_intervals,
    diversify_buffers,
    gen_deadline,
    gen_earliest_start,
    gen_instance,
)
from robsched.lp import solve_rm14

from util import make_instance, make_schedule


# ------------------------------------------------------------- deadline rule


def test_deadline_no_precedence():
    inst = make_instance((4.0, 6.0), m=1)
    assert gen_deadline(inst) == pytest.approx(13.0)


def test_deadline_single_job():
    inst = make_instance((10.0,), m=1)
    assert gen_deadline(inst) == pytest.approx(15.0)


def test_deadline_chain_on_two_machines():
    inst = make_instance((4.0, 6.0), m=2, prec=((0, 1),))
    assert gen_deadline(inst) == pytest.approx(10.0 * (1.0 + 0.5 / np.sqrt(2.0)))


def test_deadline_release_toggle():
    inst = make_instance((10.0,), m=1, r=(5.0,))
    assert gen_deadline(inst, include_release=True) == pytest.approx(22.5)
    # head release off the path: the load bound takes over
    assert gen_deadline(inst, include_release=False) == pytest.approx(19.5)


# ------------------------------------------------------------ instance draws


def test_gen_instance_structure():
    cfg = InstanceGenConfig(n=30, m=4, n_arcs=25)
    inst = gen_instance(cfg, seed=3)
    assert inst.n == 30 and inst.m == 4
    assert len(set(inst.precedence)) == 25
    assert np.all((inst.p >= 1.0) & (inst.p <= 20.0))
    assert np.all(inst.r == np.floor(inst.r))
    assert np.all((inst.r >= 0) & (inst.r <= 15))
    assert inst.deadline == pytest.approx(gen_deadline(inst))
    assert all(d.kind == "normal" and d.cv == 0.25 for d in inst.dists)


def test_gen_instance_is_deterministic():
    cfg = InstanceGenConfig(n=12, m=2, n_arcs=10, dist_kind="lognormal", cv=0.5)
    a = gen_instance(cfg, seed=77)
    b = gen_instance(cfg, seed=77)
    assert a.jobs == b.jobs
    assert a.precedence == b.precedence
    assert a.deadline == b.deadline
    c = gen_instance(cfg, seed=78)
    assert c.precedence != a.precedence or not np.array_equal(c.p, a.p)


def test_gen_instance_many_seeds_stay_acyclic():
    cfg = InstanceGenConfig(n=12, m=2, n_arcs=30)
    for seed in range(50):
        inst = gen_instance(cfg, seed=seed)  # construction validates acyclicity
        assert len(set(inst.precedence)) == 30


def test_gen_instance_argument_errors():
    with pytest.raises(ValueError):
        gen_instance(InstanceGenConfig(n=4, m=1, n_arcs=7))
    with pytest.raises(ValueError):
        gen_instance(InstanceGenConfig(n=0, m=1, n_arcs=0))


def test_gen_instance_release_cap_override():
    cfg = InstanceGenConfig(n=10, m=2, n_arcs=0, release_max=0)
    inst = gen_instance(cfg, seed=1)
    assert np.all(inst.r == 0.0)


# -------------------------------------------------------- schedule generation


def _forward_cmax(instance, orders):
    """Independent earliest-start pass over machine chains plus precedence."""
    n = instance.n
    p, r = instance.p, instance.r
    preds = [[] for _ in range(n)]
    for i, j in instance.precedence:
        preds[j].append(i)
    mprev = {}
    for order in orders:
        for a, b in zip(order, order[1:]):
            mprev[b] = a
    done = [False] * n
    start = np.zeros(n)
    remaining = set(range(n))
    while remaining:
        progressed = False
        for j in list(remaining):
            req = list(preds[j]) + ([mprev[j]] if j in mprev else [])
            if all(done[k] for k in req):
                start[j] = max([r[j]] + [start[k] + p[k] for k in req])
                done[j] = True
                remaining.discard(j)
                progressed = True
        if not progressed:
            return None  # cyclic ordering
    return float(np.max(start + p))


def _local_moves(orders):
    moves = []
    for q, order in enumerate(orders):
        for a in range(len(order)):
            for b in range(a + 1, len(order)):
                new = [list(o) for o in orders]
                new[q][a], new[q][b] = new[q][b], new[q][a]
                moves.append(new)
    for q, order in enumerate(orders):
        for pos in range(len(order)):
            for q2 in range(len(orders)):
                limit = len(orders[q2]) if q2 != q else len(order) - 1
                for pos2 in range(limit + 1):
                    if q2 == q and pos2 == pos:
                        continue
                    new = [list(o) for o in orders]
                    job = new[q].pop(pos)
                    new[q2].insert(pos2, job)
                    moves.append(new)
    return moves


def test_earliest_start_battery():
    cfg = InstanceGenConfig(n=10, m=2, n_arcs=8)
    for seed in range(10):
        inst = gen_instance(cfg, seed=seed)
        sched = gen_earliest_start(inst, seed=seed)
        assert validate(sched) == []
        assert sched.makespan() <= inst.deadline + 1e-9
        # starts realize the earliest-start policy for the chosen orders
        assert _forward_cmax(inst, sched.machine_order) == pytest.approx(sched.makespan())


def test_earliest_start_is_locally_optimal():
    cfg = InstanceGenConfig(n=8, m=2, n_arcs=5)
    for seed in (0, 1, 2):
        inst = gen_instance(cfg, seed=seed)
        sched = gen_earliest_start(inst, seed=seed)
        base = sched.makespan()
        for cand in _local_moves([list(o) for o in sched.machine_order]):
            cmax = _forward_cmax(inst, cand)
            if cmax is not None:
                assert cmax >= base - 1e-9


def test_earliest_start_is_deterministic():
    inst = gen_instance(InstanceGenConfig(n=12, m=3, n_arcs=10), seed=5)
    a = gen_earliest_start(inst, seed=9)
    b = gen_earliest_start(inst, seed=9)
    assert a.machine_order == b.machine_order
    np.testing.assert_array_equal(a.start, b.start)


def test_generation_error_on_impossible_deadline():
    inst = make_instance((5.0, 5.0), m=1, deadline=1.0)
    with pytest.raises(GenerationError):
        gen_earliest_start(inst, seed=0, max_restarts=2)


# --------------------------------------------------------------- buffer sweep


def test_default_plan_shape():
    intervals = _default_intervals()
    assert len(intervals) == 19
    assert (0.0, 1.0) in intervals
    assert (0.1, 1.0) in intervals
    assert all(0.0 <= a < b <= 1.0 for a, b in intervals)
    assert BufferPlan.default().count() == 97
    assert BufferPlan(intervals=((0.0, 0.5),), reps=3,
                      include_zero=False, include_max=True).count() == 4


def test_diversify_buffer_family():
    inst = gen_instance(InstanceGenConfig(n=12, m=2, n_arcs=8), seed=4)
    ess = gen_earliest_start(inst, seed=4)
    variants = diversify_buffers(ess, seed=11)
    assert len(variants) == 97

    # leading variants: zero buffers reproduce the base starts, full buffers
    # land on the window starts of the min-interval LP
    np.testing.assert_allclose(variants[0].start, ess.start, atol=1e-9)
    np.testing.assert_allclose(variants[1].start, solve_rm14(ess).e, atol=1e-9)

    for v in variants:
        assert v.combined is ess.combined
        assert validate(v) == []
        assert np.all(v.start >= ess.start - 1e-9)


def test_diversify_is_deterministic():
    inst = gen_instance(InstanceGenConfig(n=10, m=2, n_arcs=6), seed=2)
    ess = gen_earliest_start(inst, seed=2)
    a = diversify_buffers(ess, seed=5)
    b = diversify_buffers(ess, seed=5)
    for va, vb in zip(a, b):
        np.testing.assert_array_equal(va.start, vb.start)
    c = diversify_buffers(ess, seed=6)
    assert any(not np.array_equal(va.start, vc.start) for va, vc in zip(a, c))

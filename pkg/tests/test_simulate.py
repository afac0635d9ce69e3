import numpy as np
import pytest

from robsched.distributions import DistributionSpec
from robsched.generate import BufferPlan, diversify_buffers, gen_earliest_start, gen_instance, InstanceGenConfig
from robsched.simulate import run_once, simulate

from util import chain_schedule, make_instance, make_schedule, two_job


def _det(*means):
    return tuple(DistributionSpec("deterministic", m) for m in means)


def test_deterministic_execution_is_exact():
    sched = two_job()
    rep = simulate(sched, dists=_det(3.0, 4.0), replications=10, seed=5)
    assert rep.avg_makespan == 8.0
    assert rep.frac_within_deadline == 1.0
    assert rep.avg_frac_on_time == 1.0
    assert rep.avg_total_delay == 0.0
    assert rep.avg_deadline_delay is None
    assert rep.avg_deadline_late_jobs is None
    assert rep.frac_runs_with_late_job is None


def test_overrun_pushes_successor():
    # job 0 realizes 5 instead of 3: job 1 starts at 5, one unit late
    sched = two_job()
    rep = simulate(sched, dists=_det(5.0, 4.0), replications=3, seed=0)
    assert rep.avg_makespan == 9.0
    assert rep.avg_total_delay == 1.0
    assert rep.avg_frac_on_time == 0.5
    assert rep.frac_within_deadline == 1.0


def test_run_once_respects_planned_starts():
    sched = two_job()
    real = run_once(sched, rng=np.random.default_rng(3))
    assert np.all(real.start >= sched.start - 1e-12)
    assert np.all(real.completion > real.start)
    assert real.start[1] >= real.completion[0] - 1e-12


def test_same_seed_same_report():
    sched = chain_schedule((2.0, 3.0, 4.0), deadline=12.0, kind="lognormal", cv=0.5)
    a = simulate(sched, replications=500, seed=42)
    b = simulate(sched, replications=500, seed=42)
    assert a == b
    c = simulate(sched, replications=500, seed=43)
    assert c.avg_makespan != a.avg_makespan


def test_report_fields_are_sane():
    sched = chain_schedule((2.0, 3.0, 4.0), deadline=10.0, kind="exponential")
    rep = simulate(sched, replications=400, seed=9)
    assert rep.replications == 400 and rep.seed == 9
    assert 0.0 <= rep.frac_within_deadline <= 1.0
    assert 0.0 <= rep.avg_frac_on_time <= 1.0
    assert rep.avg_total_delay >= 0.0
    assert rep.avg_makespan > 0.0


def test_rejects_bad_arguments():
    sched = two_job()
    with pytest.raises(ValueError):
        simulate(sched, replications=0)
    with pytest.raises(ValueError):
        simulate(sched, dists=_det(3.0,))


def test_single_job_median_deadline():
    inst = make_instance((5.0,), deadline=5.0, cv=0.2)
    sched = make_schedule(inst, ((0,),), (0.0,))
    rep = simulate(sched, replications=200_000, seed=11)
    assert rep.frac_within_deadline == pytest.approx(0.5, abs=0.01)


def test_average_makespan_dominates_plan():
    sched = two_job()
    rep = simulate(sched, replications=5000, seed=2)
    assert rep.avg_makespan >= sched.makespan()


def test_renumbering_preserves_report():
    """Same physical jobs and ids, permuted positions: identical outcomes."""
    base_inst = make_instance((2.0, 3.0, 4.0), m=2, prec=((0, 1),),
                              deadline=20.0, kind="lognormal", cv=0.5, ids=(0, 1, 2))
    base = make_schedule(base_inst, ((0, 1), (2,)), (0.0, 2.0, 0.0))

    # position permutation old -> new: 0 -> 1, 1 -> 2, 2 -> 0
    perm_inst = make_instance((4.0, 2.0, 3.0), m=2, prec=((1, 2),),
                              deadline=20.0, kind="lognormal", cv=0.5, ids=(2, 0, 1))
    perm = make_schedule(perm_inst, ((1, 2), (0,)), (0.0, 0.0, 2.0))

    for seed in range(5):
        a = simulate(base, replications=300, seed=seed)
        b = simulate(perm, replications=300, seed=seed)
        assert a == b


def test_buffers_reduce_start_delay():
    """Full-buffer variants beat zero-buffer starts on delay, almost always."""
    wins = 0
    pairs = 0
    plan = BufferPlan(intervals=(), reps=0, include_zero=True, include_max=True)
    for k in range(20):
        inst = gen_instance(InstanceGenConfig(n=12, m=2, n_arcs=8), seed=100 + k)
        ess = gen_earliest_start(inst, seed=100 + k)
        zero, full = diversify_buffers(ess, plan, seed=1)
        a = simulate(zero, replications=400, seed=k)
        b = simulate(full, replications=400, seed=k)
        pairs += 1
        if b.avg_total_delay <= a.avg_total_delay + 1e-12:
            wins += 1
    assert pairs == 20
    assert wins >= 18


def test_job_deadline_statistics():
    sched = two_job()
    ok = simulate(sched, dists=_det(3.0, 4.0), replications=4, seed=0,
                  job_deadlines={1: 8.0})
    assert ok.avg_deadline_delay == 0.0
    assert ok.avg_deadline_late_jobs == 0.0
    assert ok.frac_runs_with_late_job == 0.0

    late = simulate(sched, dists=_det(3.0, 4.0), replications=4, seed=0,
                    job_deadlines={1: 7.5})
    assert late.avg_deadline_delay == pytest.approx(0.5)
    assert late.avg_deadline_late_jobs == 1.0
    assert late.frac_runs_with_late_job == 1.0


def test_single_replication_works():
    rep = simulate(two_job(), replications=1, seed=7)
    assert rep.replications == 1
    assert rep.avg_makespan > 0.0

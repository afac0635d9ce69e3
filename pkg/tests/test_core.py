import numpy as np
import pytest

from robsched.core import (
    CombinedOrder,
    CycleError,
    Instance,
    Job,
    Schedule,
    build_combined_order,
    latest_start_times,
    resolve_job_deadlines,
    slack_profile,
    validate,
)
from robsched.distributions import DistributionSpec

from util import chain_schedule, make_instance, make_schedule, two_job


def _direct_arcs(co):
    return {(int(j), int(s)) for j in range(co.n) for s in co.direct_successors(j)}


# ---------------------------------------------------------------- job/instance


def test_job_rejects_bad_fields():
    d = DistributionSpec("normal", 3.0, 0.25)
    with pytest.raises(ValueError):
        Job(id=0, p=0.0, r=0.0, dist=DistributionSpec("deterministic", 1.0))
    with pytest.raises(ValueError):
        Job(id=0, p=3.0, r=-1.0, dist=d)
    with pytest.raises(ValueError):
        Job(id=0, p=4.0, r=0.0, dist=d)  # dist mean disagrees with p


def test_instance_rejects_structural_errors():
    with pytest.raises(ValueError):
        make_instance(())
    with pytest.raises(ValueError):
        make_instance((1.0,), m=0)
    with pytest.raises(ValueError):
        make_instance((1.0,), deadline=0.0)
    with pytest.raises(ValueError):
        make_instance((1.0, 2.0), ids=(3, 3))
    with pytest.raises(ValueError):
        make_instance((1.0, 2.0), prec=((0, 2),))
    with pytest.raises(ValueError):
        make_instance((1.0, 2.0), prec=((1, 1),))
    with pytest.raises(ValueError):
        make_instance((1.0, 2.0), prec=((0, 1), (1, 0)))


def test_instance_vectors_are_readonly():
    inst = make_instance((3.0, 4.0))
    with pytest.raises(ValueError):
        inst.p[0] = 9.0
    with pytest.raises(ValueError):
        inst.r[0] = 9.0


def test_schedule_rejects_bad_shapes():
    inst = make_instance((3.0, 4.0), m=2)
    with pytest.raises(ValueError):
        make_schedule(inst, ((0, 1), ()), (0.0,))
    with pytest.raises(ValueError):
        make_schedule(inst, ((0, 1),), (0.0, 0.0))
    with pytest.raises(ValueError):
        make_schedule(inst, ((0, 1), (1,)), (0.0, 0.0))
    with pytest.raises(ValueError):
        make_schedule(inst, ((0,), ()), (0.0, 0.0))


def test_schedule_start_is_copied_and_readonly():
    inst = make_instance((3.0, 4.0))
    src = np.array([0.0, 4.0])
    sched = make_schedule(inst, ((0, 1),), src)
    src[0] = 99.0
    assert sched.start[0] == 0.0
    with pytest.raises(ValueError):
        sched.start[0] = 1.0


def test_with_starts_shares_combined_order():
    sched = two_job()
    other = sched.with_starts((0.0, 5.0))
    assert other.combined is sched.combined
    assert other.start[1] == 5.0
    assert sched.makespan() == 8.0
    assert other.makespan() == 9.0


# ------------------------------------------------------------- combined order


def test_machine_chain_becomes_arcs():
    inst = make_instance((1.0, 1.0, 1.0))
    sched = make_schedule(inst, ((2, 0, 1),), (0.0, 2.0, 1.0))
    co = sched.combined
    assert _direct_arcs(co) == {(2, 0), (0, 1)}
    assert list(co.topo) == [2, 0, 1]


def test_precedence_and_chains_merge():
    inst = make_instance((1.0,) * 4, m=2, prec=((0, 3),))
    sched = make_schedule(inst, ((0, 1), (2, 3)), (0.0, 1.0, 0.0, 1.0))
    co = sched.combined
    assert _direct_arcs(co) == {(0, 1), (2, 3), (0, 3)}


def test_transitive_arc_is_reduced():
    inst = make_instance((1.0, 1.0, 1.0), prec=((0, 2),))
    sched = make_schedule(inst, ((0, 1, 2),), (0.0, 1.0, 2.0))
    co = sched.combined
    assert _direct_arcs(co) == {(0, 1), (1, 2)}
    # the raw union still records the redundant arc
    assert (0, 2) in co.arcs


def test_single_machine_no_prec_has_chain_arcs():
    for n in (2, 5, 9):
        sched = chain_schedule((2.0,) * n, deadline=50.0)
        assert len(_direct_arcs(sched.combined)) == n - 1


def test_topo_breaks_ties_by_smallest_id():
    co = CombinedOrder(4, ((0, 1), (0, 2), (1, 3), (2, 3)), ((), (), (), ()))
    assert list(co.topo) == [0, 1, 2, 3]


def test_ancestor_closure_and_counts():
    inst = make_instance((1.0,) * 4, prec=((0, 2),))
    sched = make_schedule(inst, ((0, 1, 2, 3),), np.arange(4.0))
    co = sched.combined
    assert set(map(int, co.predecessors(3))) == {0, 1, 2}
    assert set(map(int, co.successors(0))) == {1, 2, 3}
    assert list(co.ndp) == [0, 1, 1, 1]
    assert list(co.nds) == [1, 1, 1, 0]
    assert list(co.terminals) == [3]
    assert co.ancestors[0, 3] and not co.ancestors[3, 0]


def test_combined_cycle_raises():
    inst = make_instance((1.0, 1.0), prec=((0, 1),))
    sched = make_schedule(inst, ((1, 0),), (0.0, 0.0))
    with pytest.raises(CycleError):
        build_combined_order(sched)


# ---------------------------------------------------------------- slack times


def test_latest_start_two_job_example():
    np.testing.assert_allclose(latest_start_times(two_job()), [3.0, 6.0])


def test_latest_start_single_job():
    inst = make_instance((5.0,), deadline=5.0)
    sched = make_schedule(inst, ((0,),), (0.0,))
    np.testing.assert_allclose(latest_start_times(sched), [0.0])


def test_latest_start_fork():
    inst = make_instance((2.0, 3.0, 4.0), m=3, prec=((0, 1), (0, 2)), deadline=10.0)
    sched = make_schedule(inst, ((0,), (1,), (2,)), (0.0, 2.0, 2.0))
    np.testing.assert_allclose(latest_start_times(sched), [4.0, 7.0, 6.0])


def test_latest_start_ignores_release_dates():
    inst = make_instance((3.0, 4.0), prec=((0, 1),), deadline=10.0, r=(2.0, 2.0))
    sched = make_schedule(inst, ((0, 1),), (2.0, 5.0))
    np.testing.assert_allclose(latest_start_times(sched), [3.0, 6.0])


def test_slack_profile_two_job_example():
    prof = slack_profile(two_job())
    np.testing.assert_allclose(prof.ls, [3.0, 6.0])
    np.testing.assert_allclose(prof.ts, [3.0, 2.0])
    np.testing.assert_allclose(prof.fs, [1.0, 2.0])


def test_zero_buffer_chain_has_zero_free_slack():
    sched = chain_schedule((2.0, 3.0, 4.0), deadline=12.0)
    prof = slack_profile(sched)
    np.testing.assert_allclose(prof.fs, [0.0, 0.0, 3.0])


def test_free_slack_minimizes_over_successors():
    inst = make_instance((5.0, 1.0, 1.0), m=3, prec=((0, 1), (0, 2)), deadline=100.0)
    sched = make_schedule(inst, ((0,), (1,), (2,)), (0.0, 8.0, 9.0))
    prof = slack_profile(sched)
    assert prof.fs[0] == pytest.approx(3.0)


def test_free_slack_never_exceeds_total_slack():
    rng = np.random.default_rng(21)
    from util import random_schedules

    for sched in random_schedules(rng, 8):
        prof = slack_profile(sched)
        assert np.all(prof.fs <= prof.ts + 1e-9)
        assert np.all(prof.fs >= -1e-9)


def test_starting_at_latest_start_zeroes_total_slack():
    sched = two_job()
    prof = slack_profile(sched)
    shifted = sched.with_starts(prof.ls)
    np.testing.assert_allclose(slack_profile(shifted).ts, 0.0, atol=1e-12)


def test_deadline_shift_moves_slack_uniformly():
    sched = chain_schedule((2.0, 3.0, 4.0), deadline=12.0)
    base = slack_profile(sched)
    shifted = slack_profile(sched, job_deadlines=np.full(3, 12.0 + 2.5))
    np.testing.assert_allclose(shifted.ls, base.ls + 2.5)
    np.testing.assert_allclose(shifted.ts, base.ts + 2.5)
    # free slack reacts only at terminal jobs
    np.testing.assert_allclose(shifted.fs[:2], base.fs[:2])
    assert shifted.fs[2] == pytest.approx(base.fs[2] + 2.5)


def test_slack_profile_is_pure():
    sched = two_job()
    a = slack_profile(sched)
    b = slack_profile(sched)
    np.testing.assert_array_equal(a.ls, b.ls)
    np.testing.assert_array_equal(a.ts, b.ts)
    np.testing.assert_array_equal(a.fs, b.fs)


# ------------------------------------------------------------- job deadlines


def test_resolve_job_deadlines_variants():
    inst = make_instance((3.0, 4.0), deadline=10.0)
    np.testing.assert_allclose(resolve_job_deadlines(inst), [10.0, 10.0])
    np.testing.assert_allclose(resolve_job_deadlines(inst, {1: 8.0}), [10.0, 8.0])
    np.testing.assert_allclose(resolve_job_deadlines(inst, [9.0, 8.0]), [9.0, 8.0])
    with pytest.raises(ValueError):
        resolve_job_deadlines(inst, [9.0])


# ------------------------------------------------------------------ validate


def test_validate_accepts_feasible_schedule():
    assert validate(two_job()) == []


def test_validate_flags_release_violation():
    inst = make_instance((3.0, 4.0), prec=((0, 1),), deadline=10.0, r=(1.0, 0.0))
    sched = make_schedule(inst, ((0, 1),), (0.0, 4.0))
    kinds = [v.kind for v in validate(sched)]
    assert kinds == ["release"]


def test_validate_flags_overlap():
    sched = two_job(start=(0.0, 2.0))
    out = validate(sched)
    assert [v.kind for v in out] == ["overlap"]
    assert out[0].jobs == (0, 1)


def test_validate_flags_deadline_violation():
    sched = two_job(deadline=7.0)
    assert [v.kind for v in validate(sched)] == ["deadline"]


def test_validate_flags_cycle():
    inst = make_instance((1.0, 1.0), prec=((0, 1),))
    sched = make_schedule(inst, ((1, 0),), (0.0, 0.0))
    assert [v.kind for v in validate(sched)] == ["cycle"]


def test_validate_respects_job_deadline_override():
    sched = two_job()
    assert validate(sched, job_deadlines={1: 8.0}) == []
    assert [v.kind for v in validate(sched, job_deadlines={1: 7.5})] == ["deadline"]


def test_validate_tolerance_absorbs_rounding():
    sched = two_job(start=(0.0, 3.0 - 5e-10))
    assert validate(sched) == []

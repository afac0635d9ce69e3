"""Builders for small hand-checkable instances and schedules."""

import numpy as np

from robsched.core import Instance, Job, Schedule
from robsched.distributions import DistributionSpec


def dist_for(kind, mean, cv=0.25):
    if kind == "deterministic":
        return DistributionSpec(kind=kind, mean=mean, cv=0.0)
    if kind == "exponential":
        return DistributionSpec(kind=kind, mean=mean, cv=1.0)
    return DistributionSpec(kind=kind, mean=mean, cv=cv)


def make_instance(p, m=1, prec=(), deadline=100.0, r=None, kind="normal",
                  cv=0.25, ids=None):
    p = tuple(float(v) for v in p)
    n = len(p)
    r = (0.0,) * n if r is None else tuple(float(v) for v in r)
    ids = tuple(range(n)) if ids is None else tuple(ids)
    jobs = tuple(Job(id=ids[j], p=p[j], r=r[j], dist=dist_for(kind, p[j], cv))
                 for j in range(n))
    prec = tuple((int(a), int(b)) for a, b in prec)
    return Instance(jobs=jobs, m=m, precedence=prec, deadline=float(deadline))


def make_schedule(instance, machine_order, start):
    return Schedule(instance=instance,
                    machine_order=tuple(tuple(o) for o in machine_order),
                    start=np.asarray(start, dtype=np.float64))


def chain_schedule(p, deadline, start=None, m=1, kind="normal", cv=0.25):
    """Jobs chained on machine 0 (remaining machines idle), zero buffers by default."""
    inst = make_instance(p, m=m, deadline=deadline, kind=kind, cv=cv)
    n = len(p)
    if start is None:
        start = np.concatenate(([0.0], np.cumsum(np.asarray(p, dtype=np.float64))[:-1]))
    orders = [tuple(range(n))] + [()] * (m - 1)
    return make_schedule(inst, orders, start)


def two_job(deadline=10.0, start=(0.0, 4.0), cv=0.25):
    """Two jobs p=(3,4) chained on one machine: the worked example used throughout."""
    inst = make_instance((3.0, 4.0), m=1, prec=((0, 1),), deadline=deadline, cv=cv)
    return make_schedule(inst, ((0, 1),), start)


def random_schedules(rng, count, n=8, m=2, arcs=6, buffered=True):
    """Feasible schedules over fresh random instances, optionally with random buffers."""
    from robsched.generate import InstanceGenConfig, gen_earliest_start, gen_instance

    out = []
    while len(out) < count:
        seed = int(rng.integers(1, 2**31))
        cfg = InstanceGenConfig(n=n, m=m, n_arcs=arcs)
        inst = gen_instance(cfg, seed=seed)
        sched = gen_earliest_start(inst, seed=seed)
        if buffered and len(out) % 2 == 1:
            from robsched.generate import BufferPlan, diversify_buffers

            plan = BufferPlan(intervals=((0.0, 0.6),), reps=1,
                              include_zero=False, include_max=False)
            sched = diversify_buffers(sched, plan, seed=seed)[0]
        out.append(sched)
    return out

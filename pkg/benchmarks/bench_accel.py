"""Benchmark the jitted kernels against the numpy fallback.

Runs every paired kernel on one representative workload (a 30-job instance,
its 97-schedule buffered population, 1000 simulation replications) and
prints both timings side by side.  The jitted build is compiled before
timing; results should match the fallback bitwise for the simulation kernel
and to float noise for the erf-based ones.

Usage: python benchmarks/bench_accel.py
"""

from __future__ import annotations

import time

import numpy as np

from robsched import kernels
from robsched._accel import NUMBA_AVAILABLE, mode
from robsched.distributions import DistributionSpec
from robsched.generate import InstanceGenConfig, diversify_buffers, gen_earliest_start, gen_instance
from robsched.measures import lambda_vector
from robsched.simulate import _duration_matrix, _stable_order


def _best_of(fn, repeats=5, inner=3) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def main() -> None:
    inst = gen_instance(InstanceGenConfig(n=30, m=4, n_arcs=30, id="bench"), seed=1)
    ess = gen_earliest_start(inst, seed=2)
    pop = diversify_buffers(ess, seed=3)
    co = ess.combined
    n = inst.n

    starts = np.ascontiguousarray(np.stack([s.start for s in pop]))
    dl = np.full(n, inst.deadline)
    dists = tuple(DistributionSpec("normal", job.p, 0.25) for job in inst.jobs)
    thr = lambda_vector(dists) * inst.p
    mu_d = inst.p.copy()
    var_d = np.array([d.var for d in dists])
    _, _, fs = kernels.slack_batch_np(starts, inst.p, dl, co.topo,
                                      co.dsucc_indptr, co.dsucc_idx)

    rng = np.random.default_rng(7)
    dur = _duration_matrix(rng, dists, _stable_order(inst), 1000)
    job_dl = np.full(n, np.inf)

    flat = np.array([j for order in ess.machine_order for j in order], dtype=np.int64)
    ptr = np.zeros(inst.m + 1, dtype=np.int64)
    for q, order in enumerate(ess.machine_order):
        ptr[q + 1] = ptr[q] + len(order)
    ppred: list[list[int]] = [[] for _ in range(n)]
    psucc: list[list[int]] = [[] for _ in range(n)]
    for i, j in inst.precedence:
        ppred[j].append(i)
        psucc[i].append(j)
    pp_ptr = np.cumsum([0] + [len(x) for x in ppred]).astype(np.int64)
    ps_ptr = np.cumsum([0] + [len(x) for x in psucc]).astype(np.int64)
    pp_idx = np.array([v for x in ppred for v in sorted(x)] or [0], dtype=np.int64)[: pp_ptr[-1]]
    ps_idx = np.array([v for x in psucc for v in sorted(x)] or [0], dtype=np.int64)[: ps_ptr[-1]]

    cases = {
        "es_forward": (inst.p, inst.r, ps_ptr, ps_idx, pp_ptr, pp_idx, flat, ptr),
        "slack_batch": (starts, inst.p, dl, co.topo, co.dsucc_indptr, co.dsucc_idx),
        "esd_batch": (fs, thr, co.topo, co.dpred_indptr, co.dpred_idx, True, 1e-9),
        "clark_batch": (starts, mu_d, var_d, co.topo, co.dpred_indptr,
                        co.dpred_idx, co.terminals, inst.deadline, True, True),
        "sim_replications": (dur, ess.start, co.topo, co.dpred_indptr,
                             co.dpred_idx, inst.deadline, 1e-9, job_dl, False),
    }

    print(f"active mode: {mode()} (numba available: {NUMBA_AVAILABLE})")
    print(f"workload: n={n}, {starts.shape[0]} schedules, {dur.shape[0]} replications")
    print()
    print(f"{'kernel':<18} {'numpy ms':>10} {'numba ms':>10} {'speedup':>9}")
    for name, args in cases.items():
        np_fn = getattr(kernels, f"{name}_np")
        nb_fn = getattr(kernels, f"{name}_nb", None)
        t_np = _best_of(lambda: np_fn(*args))
        if nb_fn is not None:
            nb_fn(*args)  # compile outside the timed region
            t_nb = _best_of(lambda: nb_fn(*args))
            print(f"{name:<18} {t_np * 1e3:>10.3f} {t_nb * 1e3:>10.3f} "
                  f"{t_np / t_nb:>8.1f}x")
        else:
            print(f"{name:<18} {t_np * 1e3:>10.3f} {'-':>10} {'-':>9}")


if __name__ == "__main__":
    main()

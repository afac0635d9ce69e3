"""Monte-Carlo execution of a schedule under the no-early-start policy.

Realized starts never precede the planned start: X_j = max(s_j, max of the
realized completions of direct predecessors), Y_j = X_j + D_j.  Duration
draws are bound to (replication index, stable job key, attempt) positions
of one seeded uniform stream, so results do not depend on topological-order
implementation details and are invariant to job renumbering that preserves
the stable keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from . import kernels
from .core import Schedule, TIME_TOL, resolve_job_deadlines
from .distributions import DistributionSpec, _lognormal_params

_TRUNC_ATTEMPTS = 100


@dataclass(frozen=True)
class Realization:
    """Realized start and completion times of one execution."""

    start: np.ndarray
    completion: np.ndarray


@dataclass(frozen=True)
class SimulationReport:
    """Aggregated outcomes over all replications.

    The three deadline fields are populated only when per-job deadlines are
    configured.  Averages use pairwise summation (numpy mean), so they are
    independent of replication order.
    """

    replications: int
    seed: int
    avg_makespan: float
    frac_within_deadline: float
    avg_frac_on_time: float
    avg_total_delay: float
    avg_deadline_delay: float | None = None
    avg_deadline_late_jobs: float | None = None
    frac_runs_with_late_job: float | None = None


def _stable_order(instance) -> np.ndarray:
    """Positions sorted by stable job key (the job id)."""
    ids = np.array([job.id for job in instance.jobs])
    return np.argsort(ids, kind="stable")


def _duration_matrix(rng: np.random.Generator, dists, order: np.ndarray,
                     replications: int) -> np.ndarray:
    """Draw a (R, n) duration matrix bound to (replication, key, attempt).

    Column k of every uniform round belongs to the job with the k-th
    smallest stable key.  Normal columns are truncated at zero by redrawing
    from later full rounds; an entry still nonpositive after 100 attempts
    degrades to 0.
    """
    n = order.shape[0]
    R = int(replications)
    u = rng.random((R, n))
    cols = np.empty((R, n), dtype=np.float64)
    pending = np.zeros((R, n), dtype=bool)
    normal_cols = []
    for k in range(n):
        dist = dists[order[k]]
        if dist.kind == "deterministic":
            cols[:, k] = dist.mean
        elif dist.kind == "exponential":
            cols[:, k] = -dist.mean * np.log1p(-u[:, k])
        elif dist.kind == "lognormal":
            mu_log, sd_log = _lognormal_params(dist)
            cols[:, k] = np.exp(mu_log + sd_log * ndtri(u[:, k]))
        else:
            cols[:, k] = dist.mean + dist.std * ndtri(u[:, k])
            normal_cols.append(k)
            pending[:, k] = cols[:, k] <= 0.0
    attempt = 1
    while pending.any() and attempt < _TRUNC_ATTEMPTS:
        u = rng.random((R, n))
        for k in normal_cols:
            rows = pending[:, k]
            if not rows.any():
                continue
            dist = dists[order[k]]
            draw = dist.mean + dist.std * ndtri(u[rows, k])
            cols[rows, k] = draw
            pending[rows, k] = draw <= 0.0
        attempt += 1
    cols[pending] = 0.0

    out = np.empty((R, n), dtype=np.float64)
    out[:, order] = cols
    return out


def _resolve_dists(schedule: Schedule, dists):
    if dists is None:
        return schedule.instance.dists
    dists = tuple(dists)
    if len(dists) != schedule.instance.n:
        raise ValueError("distribution override length must equal the job count")
    return dists


def run_once(schedule: Schedule, dists=None, rng=None) -> Realization:
    """One execution of the schedule drawing durations from ``rng``."""
    dists = _resolve_dists(schedule, dists)
    rng = np.random.default_rng() if rng is None else rng
    order = _stable_order(schedule.instance)
    dur = _duration_matrix(rng, dists, order, 1)[0]
    co = schedule.combined
    s = schedule.start
    x = np.empty_like(s)
    y = np.empty_like(s)
    for j in co.topo:
        best = s[j]
        for t in range(co.dpred_indptr[j], co.dpred_indptr[j + 1]):
            k = co.dpred_idx[t]
            if y[k] > best:
                best = y[k]
        x[j] = best
        y[j] = best + dur[j]
    return Realization(start=x, completion=y)


def simulate(schedule: Schedule, dists=None, replications: int = 1000,
             seed: int = 0, job_deadlines=None) -> SimulationReport:
    """Replicate the schedule and aggregate robustness outcomes.

    A job is on time when its realized start does not exceed its planned
    start (tolerance 1e-9).  ``job_deadlines`` (mapping or vector) switches
    on the per-job-deadline statistics.
    """
    if replications < 1:
        raise ValueError("replications must be positive")
    inst = schedule.instance
    dists = _resolve_dists(schedule, dists)
    rng = np.random.default_rng(seed)
    order = _stable_order(inst)
    dur = _duration_matrix(rng, dists, order, replications)

    use_dl = job_deadlines is not None
    if use_dl:
        dl = resolve_job_deadlines(inst, job_deadlines)
        if isinstance(job_deadlines, dict):
            configured = np.full(inst.n, np.inf)
            for j in job_deadlines:
                configured[int(j)] = dl[int(j)]
            dl = configured
    else:
        dl = np.full(inst.n, np.inf)

    co = schedule.combined
    makespan, ontime, delay, dl_delay, dl_late = kernels.sim_replications(
        dur, schedule.start, co.topo, co.dpred_indptr, co.dpred_idx,
        inst.deadline, TIME_TOL, dl, use_dl,
    )
    report = SimulationReport(
        replications=replications,
        seed=seed,
        avg_makespan=float(np.mean(makespan)),
        frac_within_deadline=float(np.mean(makespan <= inst.deadline + TIME_TOL)),
        avg_frac_on_time=float(np.mean(ontime)) / inst.n,
        avg_total_delay=float(np.mean(delay)),
        avg_deadline_delay=float(np.mean(dl_delay)) if use_dl else None,
        avg_deadline_late_jobs=float(np.mean(dl_late)) if use_dl else None,
        frac_runs_with_late_job=float(np.mean(dl_late > 0)) if use_dl else None,
    )
    return report

"""Interval-based buffer measures: a start-time window [e_j, l_j] per job.

Windows must respect planned starts from below (s_j <= e_j), leave room to
finish by the deadline (l_j + p_j <= d_j) and chain along every direct arc
(l_j + p_j <= e_i).  ``solve_rm13`` maximizes the total window length with
a dense simplex; ``solve_rm14`` maximizes the smallest weighted window via
parametric binary search over a longest-path feasibility system, which is
exact for this structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Schedule, TIME_TOL, resolve_job_deadlines, validate

_BSEARCH_TOL = 1e-7
_BSEARCH_ITERS = 60


class InfeasibleScheduleError(ValueError):
    """The planned schedule violates feasibility, so no window system exists."""

    def __init__(self, message: str, violations=None):
        super().__init__(message)
        self.violations = tuple(violations or ())


@dataclass(frozen=True)
class IntervalSolution:
    """Start-time windows per job plus the solved objective value."""

    e: np.ndarray
    l: np.ndarray
    objective: float


def _require_feasible(schedule: Schedule, job_deadlines) -> None:
    violations = validate(schedule, job_deadlines)
    if violations:
        raise InfeasibleScheduleError(
            "schedule is infeasible: " + "; ".join(v.detail for v in violations),
            violations,
        )


def solve_rm13(schedule: Schedule, job_deadlines=None) -> IntervalSolution:
    """Maximize the summed window length over all jobs."""
    _require_feasible(schedule, job_deadlines)
    inst = schedule.instance
    n = inst.n
    s = schedule.start
    p = inst.p
    sdl = resolve_job_deadlines(inst, job_deadlines) - p
    co = schedule.combined
    arcs = [(int(a), int(b)) for a, b in zip(
        np.repeat(np.arange(n), np.diff(co.dsucc_indptr)), co.dsucc_idx)]

    # variables: x_j = e_j - s_j, y_j = l_j - e_j, both nonnegative
    n_rows = n + len(arcs)
    A = np.zeros((n_rows, 2 * n))
    b = np.zeros(n_rows)
    for j in range(n):
        A[j, j] = 1.0
        A[j, n + j] = 1.0
        b[j] = sdl[j] - s[j]
    for row, (a, j) in enumerate(arcs, start=n):
        A[row, a] = 1.0
        A[row, n + a] = 1.0
        A[row, j] = -1.0
        b[row] = s[j] - s[a] - p[a]
    b = np.maximum(b, 0.0)  # planned feasibility holds; clear rounding dust
    c = np.concatenate([np.zeros(n), np.ones(n)])

    x, objective = _simplex_max(c, A, b)
    e = s + x[:n]
    width = x[n:]
    return IntervalSolution(e=e, l=e + width, objective=float(objective))


def solve_rm14(schedule: Schedule, weights=None, job_deadlines=None) -> IntervalSolution:
    """Maximize the minimum weighted window length.

    ``weights`` are per-job positive factors (default 1); ``np.inf`` drops a
    job from the minimum so its window may shrink to zero.  Ties among
    optimal window layouts are broken by the lexicographically smallest
    ``e`` in topological order (a minimal forward pass).
    """
    _require_feasible(schedule, job_deadlines)
    inst = schedule.instance
    n = inst.n
    s = schedule.start
    p = inst.p
    sdl = resolve_job_deadlines(inst, job_deadlines) - p
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (n,):
            raise ValueError("weights length must equal the job count")
        if np.any(w <= 0.0):
            raise ValueError("weights must be positive")
    finite = np.isfinite(w)
    if not finite.any():
        raise ValueError("at least one job must carry a finite weight")

    co = schedule.combined
    topo = co.topo
    indptr, idx = co.dpred_indptr, co.dpred_idx

    def earliest(width: np.ndarray) -> np.ndarray:
        e = np.empty(n)
        for j in topo:
            best = s[j]
            for t in range(indptr[j], indptr[j + 1]):
                k = idx[t]
                cand = e[k] + width[k] + p[k]
                if cand > best:
                    best = cand
            e[j] = best
        return e

    def feasible(bound: float) -> bool:
        width = np.where(finite, bound / w, 0.0)
        e = earliest(width)
        return bool(np.all(e + width <= sdl + 1e-12))

    hi = float(np.min((w * (sdl - s))[finite]))
    if hi <= 0.0 or feasible(hi):
        best = max(hi, 0.0)
    else:
        lo = 0.0
        for _ in range(_BSEARCH_ITERS):
            if hi - lo <= _BSEARCH_TOL:
                break
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                lo = mid
            else:
                hi = mid
        best = lo

    width = np.where(finite, best / w, 0.0)
    e = earliest(width)
    return IntervalSolution(e=e, l=e + width, objective=float(best))


def weighted_slack_insertion(schedule: Schedule, dists=None, job_deadlines=None) -> IntervalSolution:
    """solve_rm14 with weights 1/sigma_j over jobs with stochastic durations."""
    dists = schedule.instance.dists if dists is None else tuple(dists)
    sigma = np.array([d.std for d in dists], dtype=np.float64)
    if not np.any(sigma > 0.0):
        raise ValueError("weighted insertion needs at least one stochastic job")
    weights = np.where(sigma > 0.0, 1.0 / np.where(sigma > 0.0, sigma, 1.0), np.inf)
    return solve_rm14(schedule, weights=weights, job_deadlines=job_deadlines)


def apply_buffers(schedule: Schedule, solution: IntervalSolution) -> Schedule:
    """Shift planned starts to the window starts (never earlier than before)."""
    return schedule.with_starts(np.asarray(solution.e, dtype=np.float64))


def _simplex_max(c: np.ndarray, A: np.ndarray, b: np.ndarray,
                 tol: float = 1e-9, max_iter: int = 100000):
    """Dense tableau simplex for max c.x s.t. A x <= b, x >= 0, b >= 0.

    Bland's rule on both the entering and leaving choices guarantees
    termination despite the heavy degeneracy of tight-arc rows.
    """
    m, nv = A.shape
    T = np.zeros((m + 1, nv + m + 1))
    T[:m, :nv] = A
    T[:m, nv:nv + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :nv] = -c
    basis = list(range(nv, nv + m))

    for _ in range(max_iter):
        enter = -1
        for j in range(nv + m):
            if T[m, j] < -tol:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best_ratio = np.inf
        col = T[:m, enter]
        rhs = T[:m, -1]
        for i in range(m):
            if col[i] > tol:
                ratio = rhs[i] / col[i]
                if ratio < best_ratio - 1e-12:
                    best_ratio = ratio
                    leave = i
                elif leave >= 0 and abs(ratio - best_ratio) <= 1e-12 and basis[i] < basis[leave]:
                    leave = i
        if leave < 0:
            raise RuntimeError("LP is unbounded; window system must be bounded")
        T[leave] /= T[leave, enter]
        pivot_row = T[leave]
        factors = T[:, enter].copy()
        factors[leave] = 0.0
        T -= np.outer(factors, pivot_row)
        basis[leave] = enter
    else:
        raise RuntimeError("simplex iteration cap exceeded")

    x = np.zeros(nv + m)
    for i, var in enumerate(basis):
        x[var] = T[i, -1]
    return x[:nv], float(T[m, -1])

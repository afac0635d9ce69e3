"""Schedule data model: jobs, machines, the combined order and slack.

A schedule fixes a processing sequence per machine on top of the instance
precedence constraints.  The union of precedence arcs and consecutive
machine pairs forms the combined order; its transitive reduction defines
direct predecessors and successors, which is what every slack quantity is
measured against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .distributions import DistributionSpec

TIME_TOL = 1e-9


class CycleError(ValueError):
    """Raised when the combined order of a schedule contains a cycle."""


@dataclass(frozen=True)
class Job:
    """One job: stable identity, processing time, release date, duration law."""

    id: int
    p: float
    r: float
    dist: DistributionSpec

    def __post_init__(self):
        if not self.p > 0.0:
            raise ValueError(f"job {self.id}: processing time must be positive")
        if self.r < 0.0:
            raise ValueError(f"job {self.id}: release date must be nonnegative")
        if abs(self.dist.mean - self.p) > TIME_TOL:
            raise ValueError(
                f"job {self.id}: distribution mean {self.dist.mean} != p {self.p}"
            )


@dataclass(frozen=True)
class Instance:
    """Problem instance: jobs, machine count, precedence DAG, deadline."""

    jobs: tuple[Job, ...]
    m: int
    precedence: tuple[tuple[int, int], ...]
    deadline: float
    id: str = ""

    def __post_init__(self):
        n = len(self.jobs)
        if n < 1:
            raise ValueError("instance needs at least one job")
        if self.m < 1:
            raise ValueError("instance needs at least one machine")
        if not self.deadline > 0.0:
            raise ValueError("deadline must be positive")
        ids = [job.id for job in self.jobs]
        if len(set(ids)) != n:
            raise ValueError("job ids must be unique")
        for i, j in self.precedence:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"precedence arc ({i}, {j}) out of range")
            if i == j:
                raise ValueError(f"precedence arc ({i}, {j}) is a self-loop")
        if not _is_acyclic(n, self.precedence):
            raise ValueError("precedence constraints contain a cycle")

    @property
    def n(self) -> int:
        return len(self.jobs)

    @cached_property
    def p(self) -> np.ndarray:
        arr = np.array([job.p for job in self.jobs], dtype=np.float64)
        arr.flags.writeable = False
        return arr

    @cached_property
    def r(self) -> np.ndarray:
        arr = np.array([job.r for job in self.jobs], dtype=np.float64)
        arr.flags.writeable = False
        return arr

    @property
    def dists(self) -> tuple[DistributionSpec, ...]:
        return tuple(job.dist for job in self.jobs)


def _is_acyclic(n: int, arcs: Iterable[tuple[int, int]]) -> bool:
    indeg = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    for i, j in set(arcs):
        succ[i].append(j)
        indeg[j] += 1
    queue = [v for v in range(n) if indeg[v] == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return seen == n


class CombinedOrder:
    """Precedence arcs plus machine chains, transitively reduced.

    ``arcs`` holds the raw union; direct predecessor/successor queries and
    the topological order are taken over the transitive reduction, which is
    unique for a DAG.  ``ancestors`` exposes the strict partial order as a
    boolean matrix (``ancestors[i, j]`` iff i precedes j through any path).
    """

    def __init__(self, n: int, precedence: Sequence[tuple[int, int]],
                 machine_order: Sequence[Sequence[int]]):
        adj = np.zeros((n, n), dtype=bool)
        for i, j in precedence:
            adj[i, j] = True
        for order in machine_order:
            for a, b in zip(order, order[1:]):
                adj[a, b] = True
        np.fill_diagonal(adj, False)

        self.n = n
        self.arcs: tuple[tuple[int, int], ...] = tuple(
            (int(i), int(j)) for i, j in np.argwhere(adj)
        )

        topo = _topological_order(adj)
        if topo is None:
            raise CycleError("combined order contains a cycle")
        self.topo = topo

        closure = np.zeros((n, n), dtype=bool)
        for j in topo:
            preds = np.flatnonzero(adj[:, j])
            if preds.size:
                closure[:, j] = closure[:, preds].any(axis=1)
                closure[preds, j] = True
        self._closure = closure

        # arc (u, v) is transitive iff a path of length >= 2 joins u to v
        shortcut = (adj.astype(np.uint8) @ closure.astype(np.uint8)) > 0
        direct = adj & ~shortcut
        self._direct = direct

        self.dpred_indptr, self.dpred_idx = _csr(direct.T)
        self.dsucc_indptr, self.dsucc_idx = _csr(direct)
        self.ndp = np.diff(self.dpred_indptr).astype(np.int64)
        self.nds = np.diff(self.dsucc_indptr).astype(np.int64)
        self.terminals = np.flatnonzero(self.nds == 0).astype(np.int64)

    @property
    def ancestors(self) -> np.ndarray:
        return self._closure

    def direct_predecessors(self, j: int) -> np.ndarray:
        return self.dpred_idx[self.dpred_indptr[j]:self.dpred_indptr[j + 1]]

    def direct_successors(self, j: int) -> np.ndarray:
        return self.dsucc_idx[self.dsucc_indptr[j]:self.dsucc_indptr[j + 1]]

    def predecessors(self, j: int) -> np.ndarray:
        return np.flatnonzero(self._closure[:, j])

    def successors(self, j: int) -> np.ndarray:
        return np.flatnonzero(self._closure[j, :])


def _topological_order(adj: np.ndarray) -> np.ndarray | None:
    n = adj.shape[0]
    indeg = adj.sum(axis=0).astype(np.int64)
    queue = [v for v in range(n) if indeg[v] == 0]
    queue.sort(reverse=True)
    out = np.empty(n, dtype=np.int64)
    k = 0
    while queue:
        v = queue.pop()
        out[k] = v
        k += 1
        for w in np.flatnonzero(adj[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(int(w))
        queue.sort(reverse=True)
    return out if k == n else None


def _csr(direct: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise CSR layout of a boolean adjacency matrix, columns ascending."""
    counts = direct.sum(axis=1).astype(np.int64)
    indptr = np.zeros(direct.shape[0] + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    idx = np.flatnonzero(direct.ravel()) % direct.shape[1]
    return indptr, idx.astype(np.int64)


@dataclass(frozen=True, eq=False)
class Schedule:
    """Machine sequences plus planned start times over an instance."""

    instance: Instance
    machine_order: tuple[tuple[int, ...], ...]
    start: np.ndarray = field(repr=False)

    def __post_init__(self):
        start = np.asarray(self.start, dtype=np.float64)
        if start.shape != (self.instance.n,):
            raise ValueError("start vector length must equal the job count")
        start = start.copy()
        start.flags.writeable = False
        object.__setattr__(self, "start", start)
        if len(self.machine_order) != self.instance.m:
            raise ValueError("machine_order must list every machine")
        object.__setattr__(
            self, "machine_order", tuple(tuple(int(v) for v in o) for o in self.machine_order)
        )
        assigned = [v for order in self.machine_order for v in order]
        if sorted(assigned) != list(range(self.instance.n)):
            raise ValueError("every job must appear exactly once across machines")

    @cached_property
    def combined(self) -> CombinedOrder:
        return CombinedOrder(self.instance.n, self.instance.precedence, self.machine_order)

    def with_starts(self, start: np.ndarray) -> "Schedule":
        """Same machine sequences, new start times; shares the combined order."""
        other = Schedule(self.instance, self.machine_order, np.asarray(start, dtype=np.float64))
        other.__dict__["combined"] = self.combined
        return other

    def makespan(self) -> float:
        return float(np.max(self.start + self.instance.p))


def build_combined_order(schedule: Schedule) -> CombinedOrder:
    """Combined order of a schedule (cached on the schedule object)."""
    return schedule.combined


@dataclass(frozen=True)
class SlackProfile:
    """Per-job slack quantities of one schedule.

    ``ls`` latest starts, ``ts`` total slack, ``fs`` free slack, ``ndp`` /
    ``nds`` direct predecessor/successor counts, ``topo`` a topological
    order.  ``p``, ``start`` and ``job_deadlines`` carry the evaluation
    context so measures can be computed from the profile alone.
    """

    ls: np.ndarray
    ts: np.ndarray
    fs: np.ndarray
    ndp: np.ndarray
    nds: np.ndarray
    topo: np.ndarray
    p: np.ndarray
    start: np.ndarray
    job_deadlines: np.ndarray
    combined: CombinedOrder


def resolve_job_deadlines(instance: Instance, job_deadlines=None) -> np.ndarray:
    """Per-job deadline vector; entries default to the global deadline."""
    dl = np.full(instance.n, instance.deadline, dtype=np.float64)
    if job_deadlines is not None:
        if isinstance(job_deadlines, dict):
            for j, d in job_deadlines.items():
                dl[int(j)] = float(d)
        else:
            arr = np.asarray(job_deadlines, dtype=np.float64)
            if arr.shape != (instance.n,):
                raise ValueError("job deadline vector length must equal the job count")
            dl = arr.copy()
    return dl


def latest_start_times(schedule: Schedule, job_deadlines=None) -> np.ndarray:
    """Latest starts keeping every job feasible against its deadline."""
    return slack_profile(schedule, job_deadlines).ls


def slack_profile(schedule: Schedule, job_deadlines=None) -> SlackProfile:
    """Compute ls, ts and fs for one schedule."""
    from . import kernels

    co = schedule.combined
    dl = resolve_job_deadlines(schedule.instance, job_deadlines)
    starts = schedule.start[np.newaxis, :]
    ls, ts, fs = kernels.slack_batch(
        np.ascontiguousarray(starts), schedule.instance.p, dl,
        co.topo, co.dsucc_indptr, co.dsucc_idx,
    )
    return SlackProfile(
        ls=ls[0], ts=ts[0], fs=fs[0], ndp=co.ndp, nds=co.nds, topo=co.topo,
        p=schedule.instance.p, start=schedule.start, job_deadlines=dl, combined=co,
    )


@dataclass(frozen=True)
class Violation:
    """One feasibility defect found by validate()."""

    kind: str
    jobs: tuple[int, ...]
    detail: str


def validate(schedule: Schedule, job_deadlines=None) -> list[Violation]:
    """Check a schedule for structural and timing defects.

    Returns an empty list when the schedule is feasible.  Timing checks use
    an absolute tolerance of 1e-9.
    """
    inst = schedule.instance
    out: list[Violation] = []
    try:
        co = schedule.combined
    except CycleError:
        return [Violation("cycle", (), "combined order contains a cycle")]

    s = schedule.start
    p = inst.p
    late_release = np.flatnonzero(s < inst.r - TIME_TOL)
    for j in late_release:
        out.append(Violation("release", (int(j),),
                             f"job {j} starts at {s[j]} before release {inst.r[j]}"))
    for i, j in co.arcs:
        if s[j] < s[i] + p[i] - TIME_TOL:
            out.append(Violation("overlap", (i, j),
                                 f"job {j} starts at {s[j]} before job {i} completes at {s[i] + p[i]}"))
    dl = resolve_job_deadlines(inst, job_deadlines)
    finish = s + p
    for j in np.flatnonzero(finish > dl + TIME_TOL):
        out.append(Violation("deadline", (int(j),),
                             f"job {j} completes at {finish[j]} after deadline {dl[j]}"))
    return out

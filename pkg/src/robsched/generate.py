"""Random instances, locally improved earliest-start schedules and buffered
schedule families.

Instances drop ``n_arcs`` distinct arcs onto a random topological labeling
(acyclic by construction), release dates are small integers, processing
times uniform reals.  Schedules come from a greedy list construction
improved by alternating first-improvement hill climbing over same-machine
swaps and single-job moves.  Buffer diversification scales the
maximum-buffer layout of the minimum-window LP by per-job factors drawn
from a family of sub-unit intervals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels, lp
from .core import Instance, Job, Schedule, TIME_TOL
from .distributions import DistributionSpec


class GenerationError(RuntimeError):
    """No deadline-feasible schedule was found within the restart budget."""


@dataclass(frozen=True)
class InstanceGenConfig:
    """Knobs for one random instance draw."""

    n: int
    m: int
    n_arcs: int
    dist_kind: str = "normal"
    cv: float = 0.25
    p_low: float = 1.0
    p_high: float = 20.0
    release_max: int | None = None  # default: floor(n / 2)
    cp_includes_release: bool = True
    id: str = ""


def _default_intervals() -> tuple[tuple[float, float], ...]:
    grow = tuple((0.0, round(k / 10.0, 1)) for k in range(1, 11))
    shrink = tuple((round(k / 10.0, 1), 1.0) for k in range(1, 10))
    return grow + shrink


@dataclass(frozen=True)
class BufferPlan:
    """Buffer-scaling sweep: 19 intervals, 5 draws each, plus mu=0 and mu=1."""

    intervals: tuple[tuple[float, float], ...] = field(default_factory=_default_intervals)
    reps: int = 5
    include_zero: bool = True
    include_max: bool = True

    @staticmethod
    def default() -> "BufferPlan":
        return BufferPlan()

    def count(self) -> int:
        return len(self.intervals) * self.reps + self.include_zero + self.include_max


def gen_instance(cfg: InstanceGenConfig, seed: int = 0) -> Instance:
    """Draw one instance; the deadline follows the critical-path rule."""
    if cfg.n < 1 or cfg.m < 1:
        raise ValueError("need at least one job and one machine")
    max_arcs = cfg.n * (cfg.n - 1) // 2
    if cfg.n_arcs > max_arcs:
        raise ValueError(f"cannot place {cfg.n_arcs} distinct arcs on {cfg.n} jobs")
    rng = np.random.default_rng(seed)
    p = rng.uniform(cfg.p_low, cfg.p_high, cfg.n)
    rmax = cfg.n // 2 if cfg.release_max is None else int(cfg.release_max)
    r = rng.integers(0, rmax + 1, cfg.n).astype(np.float64)

    labels = rng.permutation(cfg.n)
    pairs = [(a, b) for a in range(cfg.n) for b in range(a + 1, cfg.n)]
    chosen = rng.choice(len(pairs), size=cfg.n_arcs, replace=False) if cfg.n_arcs else []
    arcs = tuple(sorted((int(labels[pairs[c][0]]), int(labels[pairs[c][1]])) for c in chosen))

    deadline = _deadline(p, r, cfg.m, arcs, cfg.cp_includes_release)
    jobs = tuple(
        Job(id=j, p=float(p[j]), r=float(r[j]),
            dist=DistributionSpec(cfg.dist_kind, float(p[j]), cfg.cv))
        for j in range(cfg.n)
    )
    return Instance(jobs=jobs, m=cfg.m, precedence=arcs, deadline=deadline, id=cfg.id)


def gen_deadline(instance: Instance, include_release: bool = True) -> float:
    """Recompute the generated deadline rule for an existing instance."""
    return _deadline(instance.p, instance.r, instance.m, instance.precedence,
                     include_release)


def _deadline(p, r, m, arcs, include_release) -> float:
    n = p.shape[0]
    lower = (float(np.sum(p)) + float(np.sum(np.sort(r)[:min(m, n)]))) / m

    preds: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    for i, j in arcs:
        preds[j].append(i)
        succ[i].append(j)
        indeg[j] += 1
    topo = [j for j in range(n) if indeg[j] == 0]
    for v in topo:
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                topo.append(w)

    length = np.zeros(n)
    count = np.zeros(n, dtype=np.int64)
    for j in topo:
        base = r[j] if include_release else 0.0
        best = base
        best_count = 1
        for i in sorted(preds[j]):
            if length[i] > best:
                best = length[i]
                best_count = count[i] + 1
        length[j] = best + p[j]
        count[j] = best_count
    cp_idx = int(np.argmax(length))
    cp_len = float(length[cp_idx])
    cp_jobs = int(count[cp_idx])
    return max(cp_len * (1.0 + 0.5 / np.sqrt(cp_jobs)), 1.3 * lower)


# -- earliest-start schedules -------------------------------------------------

def _prec_csr(instance: Instance):
    n = instance.n
    pred_lists: list[list[int]] = [[] for _ in range(n)]
    succ_lists: list[list[int]] = [[] for _ in range(n)]
    for i, j in instance.precedence:
        pred_lists[j].append(i)
        succ_lists[i].append(j)
    ppred_indptr = np.zeros(n + 1, dtype=np.int64)
    psucc_indptr = np.zeros(n + 1, dtype=np.int64)
    for j in range(n):
        ppred_indptr[j + 1] = ppred_indptr[j] + len(pred_lists[j])
        psucc_indptr[j + 1] = psucc_indptr[j] + len(succ_lists[j])
    ppred_idx = np.array([i for lst in pred_lists for i in sorted(lst)] or [0],
                         dtype=np.int64)[: ppred_indptr[-1]]
    psucc_idx = np.array([i for lst in succ_lists for i in sorted(lst)] or [0],
                         dtype=np.int64)[: psucc_indptr[-1]]
    return ppred_indptr, ppred_idx, psucc_indptr, psucc_idx


def _orders_to_arrays(orders):
    flat = [j for order in orders for j in order]
    ptr = np.zeros(len(orders) + 1, dtype=np.int64)
    for q, order in enumerate(orders):
        ptr[q + 1] = ptr[q] + len(order)
    return np.array(flat or [0], dtype=np.int64)[: ptr[-1]], ptr


def _greedy(instance: Instance, rng: np.random.Generator):
    """List scheduling: earliest startable job onto the machine free first."""
    n, m = instance.n, instance.m
    p, r = instance.p, instance.r
    preds: list[list[int]] = [[] for _ in range(n)]
    for i, j in instance.precedence:
        preds[j].append(i)
    missing = np.array([len(preds[j]) for j in range(n)])
    completion = np.zeros(n)
    avail = np.zeros(m)
    orders: list[list[int]] = [[] for _ in range(m)]
    scheduled = np.zeros(n, dtype=bool)
    for _ in range(n):
        free = float(np.min(avail))
        eligible = np.flatnonzero((missing == 0) & ~scheduled)
        ready = np.array([max(r[j], max((completion[i] for i in preds[j]), default=0.0))
                          for j in eligible])
        can_start = np.maximum(ready, free)
        best = float(np.min(can_start))
        cand = eligible[can_start == best]
        j = int(rng.choice(cand))
        machines = np.flatnonzero(avail == np.min(avail))
        q = int(rng.choice(machines))
        s = max(float(ready[list(eligible).index(j)]), float(avail[q]))
        orders[q].append(j)
        avail[q] = s + p[j]
        completion[j] = s + p[j]
        scheduled[j] = True
        missing[[k for k in range(n) if j in preds[k]]] -= 1
    return orders


def _neighbors_n0(orders):
    out = []
    for q, order in enumerate(orders):
        for a in range(len(order)):
            for b in range(a + 1, len(order)):
                out.append((q, a, b))
    return out


def _neighbors_n1(orders):
    out = []
    for q, order in enumerate(orders):
        for pos in range(len(order)):
            for q2 in range(len(orders)):
                limit = len(orders[q2]) if q2 != q else len(order) - 1
                for pos2 in range(limit + 1):
                    if q2 == q and pos2 == pos:
                        continue
                    out.append((q, pos, q2, pos2))
    return out


def _apply_n0(orders, move):
    q, a, b = move
    new = [list(o) for o in orders]
    new[q][a], new[q][b] = new[q][b], new[q][a]
    return new


def _apply_n1(orders, move):
    q, pos, q2, pos2 = move
    new = [list(o) for o in orders]
    job = new[q].pop(pos)
    new[q2].insert(pos2, job)
    return new


def gen_earliest_start(instance: Instance, seed: int = 0, max_restarts: int = 20) -> Schedule:
    """Greedy construction plus alternating N0/N1 first-improvement descent.

    Swaps (N0) exchange two jobs on one machine; moves (N1) reinsert one job
    at any position of any machine.  Neighbors are scanned in random order
    and the first strict makespan improvement is taken; the search stops
    when neither neighborhood improves.  Restarts until the makespan meets
    the deadline, raising GenerationError after ``max_restarts`` failures.
    """
    rng = np.random.default_rng(seed)
    csr = _prec_csr(instance)
    p, r = instance.p, instance.r

    def cost(orders):
        flat, ptr = _orders_to_arrays(orders)
        ok, starts, cmx = kernels.es_forward(p, r, csr[2], csr[3], csr[0], csr[1],
                                             flat, ptr)
        return ok, starts, cmx

    for _ in range(max_restarts):
        orders = _greedy(instance, rng)
        ok, starts, cur = cost(orders)
        assert ok
        hoods = ((_neighbors_n0, _apply_n0), (_neighbors_n1, _apply_n1))
        active = 0
        fails = 0
        while fails < 2:
            enumerate_fn, apply_fn = hoods[active]
            moves = enumerate_fn(orders)
            rng.shuffle(moves)
            improved = False
            for move in moves:
                cand = apply_fn(orders, move)
                ok, cstarts, ccost = cost(cand)
                if ok and ccost < cur - TIME_TOL:
                    orders, starts, cur = cand, cstarts, ccost
                    improved = True
                    break
            fails = 0 if improved else fails + 1
            active = 1 - active
        if cur <= instance.deadline + TIME_TOL:
            return Schedule(instance, tuple(tuple(o) for o in orders), starts)
    raise GenerationError(
        f"no schedule met the deadline after {max_restarts} restarts")


def diversify_buffers(schedule: Schedule, plan: BufferPlan | None = None,
                      seed: int = 0) -> list[Schedule]:
    """Buffered variants of an earliest-start schedule.

    The minimum-window LP on ``schedule`` yields per-job buffers b_j; each
    variant scales them by factors mu_j drawn uniformly from one interval of
    the plan and replays the forward recursion
    s_j = max(r_j, max over direct predecessors (s_i + p_i + mu_i b_i)),
    anchoring no-predecessor jobs at max(r_j, e_j).  The returned list leads
    with the zero-buffer (mu = 0, the earliest-start schedule itself) and
    full-buffer (mu = 1) variants, then the interval draws in plan order.
    """
    plan = plan or BufferPlan.default()
    rng = np.random.default_rng(seed)
    sol = lp.solve_rm14(schedule)
    buffers = sol.l - sol.e
    inst = schedule.instance
    co = schedule.combined
    p, r = inst.p, inst.r

    def starts_for(mu: np.ndarray) -> np.ndarray:
        s = np.empty(inst.n)
        for j in co.topo:
            lo, hi = co.dpred_indptr[j], co.dpred_indptr[j + 1]
            if lo == hi:
                s[j] = max(r[j], sol.e[j])
            else:
                best = r[j]
                for t in range(lo, hi):
                    k = co.dpred_idx[t]
                    cand = s[k] + p[k] + mu[k] * buffers[k]
                    if cand > best:
                        best = cand
                s[j] = best
        return s

    out: list[Schedule] = []
    if plan.include_zero:
        out.append(schedule.with_starts(starts_for(np.zeros(inst.n))))
    if plan.include_max:
        out.append(schedule.with_starts(starts_for(np.ones(inst.n))))
    for a, b in plan.intervals:
        for _ in range(plan.reps):
            mu = rng.uniform(a, b, inst.n)
            out.append(schedule.with_starts(starts_for(mu)))
    return out

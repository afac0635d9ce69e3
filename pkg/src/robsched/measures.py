"""Surrogate robustness measures over partially ordered schedules.

RM1-RM12, RM17 and RM18 are slack aggregations; RM13/RM14 are interval LPs
(see ``robsched.lp``); RM15/RM16 propagate two-moment Gaussians through the
combined order.  ``Cmax`` (planned makespan) rides along as the baseline
column.  Higher values mean more robust except for RM12, RM18 and Cmax.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .core import Schedule, SlackProfile, TIME_TOL, resolve_job_deadlines, slack_profile
from .distributions import DistributionSpec, lambda_factor, mad_factor

MEASURE_IDS = tuple(f"RM{k}" for k in range(1, 19)) + ("Cmax",)

#: per-measure orientation: +1 when larger values indicate more robustness
ORIENTATION = {mid: 1 for mid in MEASURE_IDS}
ORIENTATION["RM12"] = -1
ORIENTATION["RM18"] = -1
ORIENTATION["Cmax"] = -1


@dataclass(frozen=True)
class EsdProfile:
    """Per-job expected start deviation estimates (nonnegative)."""

    esd: np.ndarray


@dataclass(frozen=True)
class MeasureConfig:
    """Evaluation knobs shared by all measures.

    ``dists`` overrides the instance duration laws (same length as jobs);
    ``lambda_q`` is the quantile behind the per-job overrun budgets used by
    RM11/RM12/RM17/RM18; RM5 always uses the mean-absolute-deviation budget.
    ``esd_all_preds`` selects the full-ancestry RM18 recursion (the default)
    over the direct-predecessor variant.
    """

    measures: tuple[str, ...] | None = None
    lambda_q: float = 0.7
    esd_all_preds: bool = True
    tol: float = TIME_TOL
    dists: tuple[DistributionSpec, ...] | None = None
    job_deadlines: object = None

    def selected(self) -> tuple[str, ...]:
        if self.measures is None:
            return MEASURE_IDS
        unknown = [m for m in self.measures if m not in MEASURE_IDS]
        if unknown:
            raise ValueError(f"unknown measures: {unknown}")
        return tuple(self.measures)


@dataclass
class MeasureVector:
    """Measure id -> value for one schedule; failed measures land in errors."""

    schedule_id: str = ""
    values: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def get(self, mid: str):
        return self.values.get(mid)


def lambda_vector(dists: Sequence[DistributionSpec], q: float = 0.7) -> np.ndarray:
    return np.array([lambda_factor(d, q) for d in dists], dtype=np.float64)


def mad_vector(dists: Sequence[DistributionSpec]) -> np.ndarray:
    return np.array([mad_factor(d) for d in dists], dtype=np.float64)


# -- measures on a slack profile -------------------------------------------

def cmax(schedule: Schedule) -> float:
    return schedule.makespan()


def rm1(profile: SlackProfile) -> float:
    return float(np.sum(profile.ts))


def rm2(profile: SlackProfile) -> float:
    return float(np.sum(profile.fs))


def rm3(profile: SlackProfile) -> float:
    return float(np.min(profile.ts))


def rm4(profile: SlackProfile) -> float:
    return float(np.min(profile.fs / profile.p))


def rm5(profile: SlackProfile, lam: np.ndarray) -> float:
    """Sum of free slack capped at the per-job disruption budget lam_j * p_j."""
    return float(np.sum(np.minimum(profile.fs, lam * profile.p)))


def rm6(profile: SlackProfile, tol: float = TIME_TOL) -> float:
    return float(np.sum(profile.fs > tol))


def rm7(profile: SlackProfile) -> float:
    return float(np.sum(profile.fs * profile.p))


def rm8(profile: SlackProfile) -> float:
    return float(np.sum(profile.fs * profile.ndp))


def rm9(profile: SlackProfile) -> float:
    return float(np.sum(profile.fs * profile.nds))


def rm10(profile: SlackProfile) -> float:
    return float(np.sum(profile.fs * profile.nds * profile.p))


def _ancestor_threshold_tables(profile: SlackProfile, thr: np.ndarray):
    """Sorted budget tables over prec_j plus j itself, one per job."""
    anc = profile.combined.ancestors
    tables = []
    for j in range(profile.p.shape[0]):
        rows = np.flatnonzero(anc[:, j])
        vals = np.sort(np.append(thr[rows], thr[j]))
        tables.append(vals)
    return tables


def rm11(profile: SlackProfile, thr_tables, tol: float = TIME_TOL) -> float:
    total = 0
    for j, table in enumerate(thr_tables):
        total += int(np.searchsorted(table, profile.fs[j] + tol, side="right"))
    return float(total)


def rm12(profile: SlackProfile, thr_tables, tol: float = TIME_TOL) -> float:
    total = 0
    for j, table in enumerate(thr_tables):
        covered = int(np.searchsorted(table, profile.fs[j] + tol, side="right"))
        total += table.shape[0] - covered
    return float(total)


def rm17(profile: SlackProfile, thr: np.ndarray, tol: float = TIME_TOL) -> float:
    """Sum of the per-job fractions of direct predecessors with enough slack."""
    co = profile.combined
    ok = profile.fs + tol >= thr
    total = 0.0
    for j in range(profile.p.shape[0]):
        preds = co.direct_predecessors(j)
        if preds.size == 0:
            total += 1.0
        else:
            total += float(np.count_nonzero(ok[preds])) / preds.size
    return total


def rm18(profile: SlackProfile, thr: np.ndarray, all_preds: bool = True,
         tol: float = TIME_TOL) -> tuple[float, EsdProfile]:
    co = profile.combined
    esd = kernels.esd_batch(
        np.ascontiguousarray(profile.fs[np.newaxis, :]), thr, co.topo,
        co.dpred_indptr, co.dpred_idx, all_preds, tol,
    )[0]
    return float(np.sum(esd)), EsdProfile(esd=esd)


def _duration_moments(dists: Sequence[DistributionSpec]):
    mu = np.array([d.mean for d in dists], dtype=np.float64)
    var = np.array([d.std ** 2 for d in dists], dtype=np.float64)
    return mu, var


def rm15(schedule: Schedule, dists: Sequence[DistributionSpec] | None = None,
         deadline: float | None = None) -> float:
    """Approximate P(realized makespan <= deadline) by Gaussian propagation."""
    return _rm15_16(schedule, dists, deadline, want15=True, want16=False)[0]


def rm16(schedule: Schedule, dists: Sequence[DistributionSpec] | None = None) -> float:
    """Sum over jobs of the approximate P(planned start holds)."""
    return _rm15_16(schedule, dists, None, want15=False, want16=True)[1]


def _rm15_16(schedule, dists, deadline, want15, want16):
    inst = schedule.instance
    dists = inst.dists if dists is None else tuple(dists)
    mu, var = _duration_moments(dists)
    co = schedule.combined
    d = inst.deadline if deadline is None else float(deadline)
    v15, v16 = kernels.clark_batch(
        np.ascontiguousarray(schedule.start[np.newaxis, :]), mu, var,
        co.topo, co.dpred_indptr, co.dpred_idx, co.terminals, d, want15, want16,
    )
    return float(v15[0]), float(v16[0])


# -- batched evaluation ------------------------------------------------------

class _PreparedGroup:
    """Shared evaluation context for schedules with one combined order."""

    def __init__(self, schedules: list[Schedule], config: MeasureConfig):
        base = schedules[0]
        inst = base.instance
        self.schedules = schedules
        self.instance = inst
        self.co = base.combined
        self.dists = config.dists if config.dists is not None else inst.dists
        if len(self.dists) != inst.n:
            raise ValueError("distribution override length must equal the job count")
        self.dl = resolve_job_deadlines(inst, config.job_deadlines)
        self.starts = np.ascontiguousarray(
            np.stack([s.start for s in schedules]), dtype=np.float64
        )
        self.thr = lambda_vector(self.dists, config.lambda_q) * inst.p
        self.lam5 = mad_vector(self.dists)
        self.mu_d, self.var_d = _duration_moments(self.dists)
        self._thr_tables = None

    def thr_tables(self):
        if self._thr_tables is None:
            anc = self.co.ancestors
            self._thr_tables = [
                np.sort(np.append(self.thr[np.flatnonzero(anc[:, j])], self.thr[j]))
                for j in range(self.instance.n)
            ]
        return self._thr_tables


_PROFILE_MEASURES = {
    "RM1", "RM2", "RM3", "RM4", "RM5", "RM6", "RM7", "RM8", "RM9", "RM10",
    "RM11", "RM12", "RM17", "RM18",
}


def _eval_group(group: _PreparedGroup, mids: Iterable[str], config: MeasureConfig):
    """Values for each measure over the group's schedules; LP errors per row."""
    out: dict[str, np.ndarray] = {}
    errors: dict[str, list] = {}
    S = group.starts.shape[0]
    co = group.co
    p = group.instance.p
    tol = config.tol

    need_profile = any(m in _PROFILE_MEASURES for m in mids)
    if need_profile:
        ls, ts, fs = kernels.slack_batch(group.starts, p, group.dl, co.topo,
                                         co.dsucc_indptr, co.dsucc_idx)
    for mid in mids:
        if mid == "Cmax":
            out[mid] = np.max(group.starts + p, axis=1)
        elif mid == "RM1":
            out[mid] = ts.sum(axis=1)
        elif mid == "RM2":
            out[mid] = fs.sum(axis=1)
        elif mid == "RM3":
            out[mid] = ts.min(axis=1)
        elif mid == "RM4":
            out[mid] = (fs / p).min(axis=1)
        elif mid == "RM5":
            out[mid] = np.minimum(fs, group.lam5 * p).sum(axis=1)
        elif mid == "RM6":
            out[mid] = (fs > tol).sum(axis=1).astype(np.float64)
        elif mid == "RM7":
            out[mid] = (fs * p).sum(axis=1)
        elif mid == "RM8":
            out[mid] = (fs * co.ndp).sum(axis=1)
        elif mid == "RM9":
            out[mid] = (fs * co.nds).sum(axis=1)
        elif mid == "RM10":
            out[mid] = (fs * co.nds * p).sum(axis=1)
        elif mid in ("RM11", "RM12"):
            tables = group.thr_tables()
            vals = np.zeros(S, dtype=np.float64)
            total_terms = 0
            for j, table in enumerate(tables):
                covered = np.searchsorted(table, fs[:, j] + tol, side="right")
                total_terms += table.shape[0]
                vals += covered
            out[mid] = vals if mid == "RM11" else (total_terms - vals)
        elif mid == "RM17":
            ok = fs + tol >= group.thr
            vals = np.zeros(S, dtype=np.float64)
            for j in range(group.instance.n):
                preds = co.direct_predecessors(j)
                if preds.size == 0:
                    vals += 1.0
                else:
                    vals += ok[:, preds].sum(axis=1) / preds.size
            out[mid] = vals
        elif mid == "RM18":
            esd = kernels.esd_batch(fs, group.thr, co.topo, co.dpred_indptr,
                                    co.dpred_idx, config.esd_all_preds, tol)
            out[mid] = esd.sum(axis=1)
        elif mid in ("RM15", "RM16"):
            want15 = mid == "RM15"
            v15, v16 = kernels.clark_batch(
                group.starts, group.mu_d, group.var_d, co.topo,
                co.dpred_indptr, co.dpred_idx, co.terminals,
                group.instance.deadline, want15, not want15,
            )
            out[mid] = v15 if want15 else v16
        elif mid in ("RM13", "RM14"):
            from .lp import InfeasibleScheduleError, solve_rm13, solve_rm14

            vals = np.full(S, np.nan)
            errs = []
            for k, sched in enumerate(group.schedules):
                try:
                    if mid == "RM13":
                        vals[k] = solve_rm13(sched, config.job_deadlines).objective
                    else:
                        vals[k] = solve_rm14(sched, None, config.job_deadlines).objective
                except InfeasibleScheduleError as exc:
                    errs.append((k, str(exc)))
            out[mid] = vals
            if errs:
                errors[mid] = errs
        else:
            raise ValueError(f"unknown measure {mid}")
    return out, errors


def evaluate_all(schedule: Schedule, config: MeasureConfig | None = None) -> MeasureVector:
    """Every enabled measure for one schedule (slack profile computed once).

    Unlike :func:`evaluate_population`, which records per-measure error
    entries and keeps going, this validates the schedule first and raises
    on any feasibility violation.
    """
    from .core import validate
    from .lp import InfeasibleScheduleError

    violations = validate(schedule)
    if violations:
        raise InfeasibleScheduleError(
            "schedule violates feasibility: " + violations[0].detail, violations)
    return evaluate_population([schedule], config)[0]


def evaluate_population(schedules: Sequence[Schedule],
                        config: MeasureConfig | None = None) -> list[MeasureVector]:
    """Measure vectors for many schedules, batching shared machine orders."""
    config = config or MeasureConfig()
    mids = config.selected()
    results = [MeasureVector() for _ in schedules]
    for indices, group_scheds in _grouped(schedules):
        group = _PreparedGroup(group_scheds, config)
        values, errors = _eval_group(group, mids, config)
        err_map = {mid: dict(rows) for mid, rows in errors.items()}
        for local, global_idx in enumerate(indices):
            vec = results[global_idx]
            for mid in mids:
                if mid in err_map and local in err_map[mid]:
                    vec.errors[mid] = err_map[mid][local]
                else:
                    vec.values[mid] = float(values[mid][local])
    return results


def _grouped(schedules: Sequence[Schedule]):
    groups: dict = {}
    order: list = []
    for idx, sched in enumerate(schedules):
        key = id(sched.combined)
        if key not in groups:
            groups[key] = ([], [])
            order.append(key)
        groups[key][0].append(idx)
        groups[key][1].append(sched)
    for key in order:
        yield groups[key]


def time_measures(schedules: Sequence[Schedule], measure_ids: Sequence[str],
                  config: MeasureConfig | None = None,
                  baseline_replications: int = 100, seed: int = 0) -> dict:
    """Standalone wall-clock per measure over a schedule population.

    Each measure is timed on its own full pass (including its slack or
    moment propagation) against a prepared combined order, mirroring
    repeated evaluation inside a search.  The returned mapping also holds a
    ``Sim{R}`` entry: the cost of estimating the same population by
    ``baseline_replications`` simulation runs per schedule.
    """
    from .simulate import simulate

    config = config or MeasureConfig()
    grouped = [(_PreparedGroup(g, config), g) for _, g in _grouped(schedules)]
    kernels.warmup()
    timings: dict[str, float] = {}
    for mid in measure_ids:
        start = time.perf_counter()
        for group, _ in grouped:
            _eval_group(group, (mid,), config)
        timings[mid] = time.perf_counter() - start

    dists = config.dists
    start = time.perf_counter()
    for _, scheds in grouped:
        for k, sched in enumerate(scheds):
            simulate(sched, dists=dists, replications=baseline_replications,
                     seed=seed + k)
    timings[f"Sim{baseline_replications}"] = time.perf_counter() - start
    return timings

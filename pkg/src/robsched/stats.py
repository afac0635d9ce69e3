"""Rank statistics: Spearman correlation and the Mann-Whitney U test.

Ranks are average ranks over ties everywhere.  Constant series make the
Spearman coefficient undefined; those come back as 0 with a degeneracy
flag and are excluded from cross-instance summaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

# largest number of index splits the exact MWU enumeration will walk
_EXACT_SPLIT_CAP = 250_000


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation; 0 when either series is constant."""
    return spearman_flagged(x, y)[0]


def spearman_flagged(x: Sequence[float], y: Sequence[float]) -> tuple[float, bool]:
    """Spearman rho and a flag marking the constant-series degenerate case."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("series must be one-dimensional and equally long")
    if xa.shape[0] < 3:
        raise ValueError("need at least 3 observations")
    rx = rankdata(xa)
    ry = rankdata(ya)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sx = float(np.dot(dx, dx))
    sy = float(np.dot(dy, dy))
    if sx <= 0.0 or sy <= 0.0:
        return 0.0, True
    rho = float(np.dot(dx, dy)) / math.sqrt(sx * sy)
    return max(-1.0, min(1.0, rho)), False


@dataclass(frozen=True)
class MwuResult:
    """Mann-Whitney U for the first sample, with a two-sided p-value."""

    u: float
    p_value: float
    n1: int
    n2: int
    method: str


def mann_whitney_u(a: Sequence[float], b: Sequence[float],
                   method: str = "auto") -> MwuResult:
    """Two-sided Mann-Whitney U test of samples ``a`` against ``b``.

    U counts pairs won by ``a`` (ties at half weight).  ``method`` picks the
    p-value routine: "exact" enumerates every assignment of the pooled ranks
    to the two groups, "approx" uses the tie-corrected normal approximation
    with continuity correction, and "auto" goes exact for small samples
    (min(n1, n2) < 8, enumeration size within a fixed cap).
    """
    aa = np.asarray(a, dtype=np.float64)
    bb = np.asarray(b, dtype=np.float64)
    n1, n2 = aa.shape[0], bb.shape[0]
    if n1 < 1 or n2 < 1:
        raise ValueError("both samples must be non-empty")
    pooled = np.concatenate([aa, bb])
    ranks = rankdata(pooled)
    u_obs = float(np.sum(ranks[:n1])) - n1 * (n1 + 1) / 2.0

    n_splits = math.comb(n1 + n2, n1)
    if method == "auto":
        method = "exact" if (min(n1, n2) < 8 and n_splits <= _EXACT_SPLIT_CAP) else "approx"
    if method == "exact":
        if n_splits > _EXACT_SPLIT_CAP:
            raise ValueError(f"exact enumeration of {n_splits} splits exceeds the cap")
        p = _exact_p(ranks, n1, u_obs)
    elif method == "approx":
        p = _approx_p(ranks, n1, n2, u_obs)
    else:
        raise ValueError(f"unknown method {method!r}")
    return MwuResult(u=u_obs, p_value=p, n1=n1, n2=n2, method=method)


def _exact_p(ranks: np.ndarray, n1: int, u_obs: float) -> float:
    n = ranks.shape[0]
    n2 = n - n1
    center = n1 * n2 / 2.0
    dev = abs(u_obs - center)
    offset = n1 * (n1 + 1) / 2.0
    hits = 0
    total = 0
    for idx in combinations(range(n), n1):
        u = ranks[list(idx)].sum() - offset
        # strict float comparisons would misclassify reshuffles of the
        # observed split itself, hence the epsilon
        if abs(u - center) >= dev - 1e-12:
            hits += 1
        total += 1
    return hits / total


def _approx_p(ranks: np.ndarray, n1: int, n2: int, u_obs: float) -> float:
    n = n1 + n2
    _, counts = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(counts.astype(np.float64) ** 3 - counts))
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0.0:
        return 1.0
    dev = abs(u_obs - n1 * n2 / 2.0) - 0.5
    if dev < 0.0:
        dev = 0.0
    z = dev / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2.0)))


# -- correlation study --------------------------------------------------------

@dataclass(frozen=True)
class CorrRow:
    """Spearman rho of one (robustness measure, simulation measure) pair on
    one instance's schedule population."""

    instance_id: str
    rm: str
    sim_measure: str
    rho: float
    degenerate: bool


@dataclass(frozen=True)
class CorrSummary:
    """Distribution of |rho| across instances for one measure pair.

    Degenerate rows are excluded; ``high_corr`` marks mean |rho| > 0.9.
    """

    rm: str
    sim_measure: str
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float
    n_instances: int
    high_corr: bool


@dataclass(frozen=True)
class CorrelationTable:
    rows: tuple[CorrRow, ...]
    summaries: tuple[CorrSummary, ...]

    def mean_abs_rho(self, rm: str, sim_measure: str) -> float:
        for s in self.summaries:
            if s.rm == rm and s.sim_measure == sim_measure:
                return s.mean
        raise KeyError(f"no summary for ({rm}, {sim_measure})")


def correlation_study(
    measure_series: Mapping[str, Mapping[str, Sequence[float]]],
    sim_series: Mapping[str, Mapping[str, Sequence[float]]],
) -> CorrelationTable:
    """Per-instance Spearman correlations plus cross-instance summaries.

    Both arguments map instance id to {series name: values}, where values
    are aligned by schedule within each instance.  Every instance needs at
    least 3 schedules.
    """
    rows: list[CorrRow] = []
    rm_names: list[str] = []
    sim_names: list[str] = []
    for inst_id in measure_series:
        if inst_id not in sim_series:
            raise ValueError(f"instance {inst_id!r} has measures but no simulation series")
        rm_map = measure_series[inst_id]
        sim_map = sim_series[inst_id]
        for rm in rm_map:
            if rm not in rm_names:
                rm_names.append(rm)
        for sm in sim_map:
            if sm not in sim_names:
                sim_names.append(sm)
        for rm in rm_map:
            xa = np.asarray(rm_map[rm], dtype=np.float64)
            for sm in sim_map:
                ya = np.asarray(sim_map[sm], dtype=np.float64)
                keep = np.isfinite(xa) & np.isfinite(ya)
                if int(keep.sum()) < 3:
                    rows.append(CorrRow(inst_id, rm, sm, 0.0, True))
                    continue
                rho, degenerate = spearman_flagged(xa[keep], ya[keep])
                rows.append(CorrRow(inst_id, rm, sm, rho, degenerate))

    summaries: list[CorrSummary] = []
    for rm in rm_names:
        for sm in sim_names:
            vals = np.array([abs(row.rho) for row in rows
                             if row.rm == rm and row.sim_measure == sm
                             and not row.degenerate])
            if vals.size:
                q1, med, q3 = np.percentile(vals, [25.0, 50.0, 75.0])
                summaries.append(CorrSummary(
                    rm=rm, sim_measure=sm,
                    min=float(vals.min()), q1=float(q1), median=float(med),
                    q3=float(q3), max=float(vals.max()), mean=float(vals.mean()),
                    n_instances=int(vals.size), high_corr=bool(vals.mean() > 0.9),
                ))
            else:
                nan = float("nan")
                summaries.append(CorrSummary(rm, sm, nan, nan, nan, nan, nan,
                                             nan, 0, False))
    return CorrelationTable(rows=tuple(rows), summaries=tuple(summaries))

"""Hot numeric kernels with two interchangeable implementations.

Every kernel exists twice: a numba ``@njit`` build (loops over replications
or schedules) and a vectorized numpy fallback that batches over the leading
axis.  Both follow the same operation order per element, so switching the
mode never changes results beyond last-ulp differences in erf.  The active
implementation is chosen at import time via ``robsched._accel``; set
``ROBSCHED_DISABLE_NUMBA=1`` to force the numpy path.

Shared conventions: graph structure arrives as CSR arrays over the
transitive reduction of the combined order, ``topo`` is a topological
order, starts matrices are C-contiguous float64 of shape (S, n).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erf as _erf

from ._accel import USE_NUMBA

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# numpy implementations (vectorized over the batch axis)
# ---------------------------------------------------------------------------

def es_forward_np(p, r, psucc_indptr, psucc_idx, ppred_indptr, ppred_idx,
                  order_flat, order_ptr):
    """Earliest starts for fixed machine sequences, with cycle detection.

    Returns (feasible, starts, makespan); feasible is False when the
    combined order of precedence arcs and machine chains has a cycle.
    """
    n = p.shape[0]
    mprev = np.full(n, -1, dtype=np.int64)
    mnext = np.full(n, -1, dtype=np.int64)
    for q in range(order_ptr.shape[0] - 1):
        for t in range(order_ptr[q], order_ptr[q + 1] - 1):
            a = order_flat[t]
            b = order_flat[t + 1]
            mprev[b] = a
            mnext[a] = b

    indeg = np.zeros(n, dtype=np.int64)
    for j in range(n):
        indeg[j] = ppred_indptr[j + 1] - ppred_indptr[j]
        if mprev[j] >= 0:
            indeg[j] += 1
    starts = np.array(r, dtype=np.float64)
    stack = [int(j) for j in range(n) if indeg[j] == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        done = starts[v] + p[v]
        for t in range(psucc_indptr[v], psucc_indptr[v + 1]):
            w = int(psucc_idx[t])
            if done > starts[w]:
                starts[w] = done
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
        w = int(mnext[v])
        if w >= 0 and w != v:
            if done > starts[w]:
                starts[w] = done
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    if seen != n:
        return False, starts, math.inf
    return True, starts, float(np.max(starts + p))


def slack_batch_np(starts, p, dl, topo, dsucc_indptr, dsucc_idx):
    """Latest starts, total slack and free slack for S schedules at once."""
    S, n = starts.shape
    ls = np.empty((S, n), dtype=np.float64)
    fs = np.empty((S, n), dtype=np.float64)
    for j in topo[::-1]:
        lo = dsucc_indptr[j]
        hi = dsucc_indptr[j + 1]
        if lo == hi:
            ls[:, j] = dl[j] - p[j]
            fs[:, j] = dl[j] - starts[:, j] - p[j]
        else:
            succ = dsucc_idx[lo:hi]
            lmin = ls[:, succ[0]].copy()
            smin = starts[:, succ[0]].copy()
            for i in succ[1:]:
                np.minimum(lmin, ls[:, i], out=lmin)
                np.minimum(smin, starts[:, i], out=smin)
            np.minimum(lmin, dl[j], out=lmin)
            ls[:, j] = lmin - p[j]
            fs[:, j] = smin - starts[:, j] - p[j]
    return ls, ls - starts, fs


def esd_batch_np(fs, thr, topo, dpred_indptr, dpred_idx, all_preds, tol):
    """Expected-start-deviation recursion over the direct-arc DAG."""
    S, n = fs.shape
    esd = np.zeros((S, n), dtype=np.float64)
    v = np.empty((S, n), dtype=np.float64)
    for j in topo:
        lo = dpred_indptr[j]
        hi = dpred_indptr[j + 1]
        if lo != hi:
            preds = dpred_idx[lo:hi]
            acc = v[:, preds[0]].copy()
            if all_preds:
                np.maximum(acc, esd[:, preds[0]], out=acc)
            for k in preds[1:]:
                np.maximum(acc, v[:, k], out=acc)
                if all_preds:
                    np.maximum(acc, esd[:, k], out=acc)
            esd[:, j] = acc
        x = thr[j] + esd[:, j] - fs[:, j]
        v[:, j] = np.where(x > tol, x, 0.0)
    return esd


def _clark_np(mu_a, va, mu_b, vb):
    """Two-moment max of independent Gaussians, vectorized."""
    theta2 = va + vb
    deg = theta2 <= 0.0
    theta = np.sqrt(np.where(deg, 1.0, theta2))
    alpha = (mu_a - mu_b) / theta
    cdf = 0.5 * (1.0 + _erf(alpha / _SQRT2))
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * alpha * alpha)
    mean = mu_a * cdf + mu_b * (1.0 - cdf) + theta * pdf
    second = ((mu_a * mu_a + va) * cdf + (mu_b * mu_b + vb) * (1.0 - cdf)
              + (mu_a + mu_b) * theta * pdf)
    var = np.maximum(second - mean * mean, 0.0)
    mean = np.where(deg, np.maximum(mu_a, mu_b), mean)
    var = np.where(deg, 0.0, var)
    return mean, var


def _ncdf_np(mu, var, t):
    pos = var > 0.0
    z = (t - mu) / np.sqrt(np.where(pos, var, 1.0))
    smooth = 0.5 * (1.0 + _erf(z / _SQRT2))
    return np.where(pos, smooth, (mu <= t).astype(np.float64))


def clark_batch_np(starts, mu_d, var_d, topo, dpred_indptr, dpred_idx,
                   terminals, deadline, want15, want16):
    """Gaussian start/completion propagation; returns (rm15, rm16) per row."""
    S, n = starts.shape
    ymu = np.empty((S, n), dtype=np.float64)
    yvar = np.empty((S, n), dtype=np.float64)
    rm16 = np.zeros(S, dtype=np.float64)
    for j in topo:
        lo = dpred_indptr[j]
        hi = dpred_indptr[j + 1]
        if lo == hi:
            if want16:
                rm16 += 1.0
            xmu = starts[:, j].astype(np.float64)
            xvar = np.zeros(S, dtype=np.float64)
        else:
            preds = dpred_idx[lo:hi]
            pm = ymu[:, preds[0]].copy()
            pv = yvar[:, preds[0]].copy()
            for k in preds[1:]:
                pm, pv = _clark_np(pm, pv, ymu[:, k], yvar[:, k])
            if want16:
                rm16 += _ncdf_np(pm, pv, starts[:, j])
            xmu, xvar = _clark_np(pm, pv, starts[:, j], np.zeros(S))
        ymu[:, j] = xmu + mu_d[j]
        yvar[:, j] = xvar + var_d[j]
    rm15 = np.zeros(S, dtype=np.float64)
    if want15:
        tm = ymu[:, terminals[0]].copy()
        tv = yvar[:, terminals[0]].copy()
        for k in terminals[1:]:
            tm, tv = _clark_np(tm, tv, ymu[:, k], yvar[:, k])
        rm15 = _ncdf_np(tm, tv, deadline)
    return rm15, rm16


def sim_replications_np(dur, starts, topo, dpred_indptr, dpred_idx,
                        deadline, tol, job_dl, use_job_dl):
    """Per-replication outcomes of the no-early-start execution policy.

    ``dur`` has shape (R, n).  Returns per-replication makespan, on-time job
    count, total start delay, and (when ``use_job_dl``) total deadline delay
    plus deadline-late job count.
    """
    R, n = dur.shape
    Y = np.empty((R, n), dtype=np.float64)
    makespan = np.full(R, -math.inf, dtype=np.float64)
    ontime = np.zeros(R, dtype=np.int64)
    delay = np.zeros(R, dtype=np.float64)
    dl_delay = np.zeros(R, dtype=np.float64)
    dl_late = np.zeros(R, dtype=np.int64)
    for j in topo:
        lo = dpred_indptr[j]
        hi = dpred_indptr[j + 1]
        x = np.full(R, starts[j], dtype=np.float64)
        for t in range(lo, hi):
            np.maximum(x, Y[:, dpred_idx[t]], out=x)
        y = x + dur[:, j]
        Y[:, j] = y
        np.maximum(makespan, y, out=makespan)
        ontime += x <= starts[j] + tol
        delay += x - starts[j]
        if use_job_dl and math.isfinite(job_dl[j]):
            over = y - job_dl[j]
            dl_delay += np.where(over > 0.0, over, 0.0)
            dl_late += y > job_dl[j] + tol
    return makespan, ontime, delay, dl_delay, dl_late


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if USE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def es_forward_nb(p, r, psucc_indptr, psucc_idx, ppred_indptr, ppred_idx,
                      order_flat, order_ptr):
        n = p.shape[0]
        mprev = np.full(n, -1, dtype=np.int64)
        mnext = np.full(n, -1, dtype=np.int64)
        for q in range(order_ptr.shape[0] - 1):
            for t in range(order_ptr[q], order_ptr[q + 1] - 1):
                a = order_flat[t]
                b = order_flat[t + 1]
                mprev[b] = a
                mnext[a] = b
        indeg = np.zeros(n, dtype=np.int64)
        for j in range(n):
            indeg[j] = ppred_indptr[j + 1] - ppred_indptr[j]
            if mprev[j] >= 0:
                indeg[j] += 1
        starts = r.copy()
        stack = np.empty(n, dtype=np.int64)
        top = 0
        for j in range(n):
            if indeg[j] == 0:
                stack[top] = j
                top += 1
        seen = 0
        while top > 0:
            top -= 1
            v = stack[top]
            seen += 1
            done = starts[v] + p[v]
            for t in range(psucc_indptr[v], psucc_indptr[v + 1]):
                w = psucc_idx[t]
                if done > starts[w]:
                    starts[w] = done
                indeg[w] -= 1
                if indeg[w] == 0:
                    stack[top] = w
                    top += 1
            w = mnext[v]
            if w >= 0 and w != v:
                if done > starts[w]:
                    starts[w] = done
                indeg[w] -= 1
                if indeg[w] == 0:
                    stack[top] = w
                    top += 1
        if seen != n:
            return False, starts, math.inf
        cmax = -math.inf
        for j in range(n):
            f = starts[j] + p[j]
            if f > cmax:
                cmax = f
        return True, starts, cmax

    @njit(cache=True)
    def slack_batch_nb(starts, p, dl, topo, dsucc_indptr, dsucc_idx):
        S, n = starts.shape
        ls = np.empty((S, n), dtype=np.float64)
        ts = np.empty((S, n), dtype=np.float64)
        fs = np.empty((S, n), dtype=np.float64)
        for s in range(S):
            for tpos in range(n - 1, -1, -1):
                j = topo[tpos]
                lo = dsucc_indptr[j]
                hi = dsucc_indptr[j + 1]
                if lo == hi:
                    ls[s, j] = dl[j] - p[j]
                    fs[s, j] = dl[j] - starts[s, j] - p[j]
                else:
                    lmin = ls[s, dsucc_idx[lo]]
                    smin = starts[s, dsucc_idx[lo]]
                    for t in range(lo + 1, hi):
                        i = dsucc_idx[t]
                        if ls[s, i] < lmin:
                            lmin = ls[s, i]
                        if starts[s, i] < smin:
                            smin = starts[s, i]
                    if dl[j] < lmin:
                        lmin = dl[j]
                    ls[s, j] = lmin - p[j]
                    fs[s, j] = smin - starts[s, j] - p[j]
                ts[s, j] = ls[s, j] - starts[s, j]
        return ls, ts, fs

    @njit(cache=True)
    def esd_batch_nb(fs, thr, topo, dpred_indptr, dpred_idx, all_preds, tol):
        S, n = fs.shape
        esd = np.zeros((S, n), dtype=np.float64)
        v = np.empty((S, n), dtype=np.float64)
        for s in range(S):
            for tpos in range(n):
                j = topo[tpos]
                lo = dpred_indptr[j]
                hi = dpred_indptr[j + 1]
                if lo != hi:
                    acc = v[s, dpred_idx[lo]]
                    if all_preds and esd[s, dpred_idx[lo]] > acc:
                        acc = esd[s, dpred_idx[lo]]
                    for t in range(lo + 1, hi):
                        k = dpred_idx[t]
                        if v[s, k] > acc:
                            acc = v[s, k]
                        if all_preds and esd[s, k] > acc:
                            acc = esd[s, k]
                    esd[s, j] = acc
                x = thr[j] + esd[s, j] - fs[s, j]
                v[s, j] = x if x > tol else 0.0
        return esd

    @njit(cache=True, inline="always")
    def _clark_nb(mu_a, va, mu_b, vb):
        theta2 = va + vb
        if theta2 <= 0.0:
            return max(mu_a, mu_b), 0.0
        theta = math.sqrt(theta2)
        alpha = (mu_a - mu_b) / theta
        cdf = 0.5 * (1.0 + math.erf(alpha / _SQRT2))
        pdf = _INV_SQRT_2PI * math.exp(-0.5 * alpha * alpha)
        mean = mu_a * cdf + mu_b * (1.0 - cdf) + theta * pdf
        second = ((mu_a * mu_a + va) * cdf + (mu_b * mu_b + vb) * (1.0 - cdf)
                  + (mu_a + mu_b) * theta * pdf)
        var = second - mean * mean
        if var < 0.0:
            var = 0.0
        return mean, var

    @njit(cache=True, inline="always")
    def _ncdf_nb(mu, var, t):
        if var > 0.0:
            return 0.5 * (1.0 + math.erf((t - mu) / math.sqrt(var) / _SQRT2))
        return 1.0 if mu <= t else 0.0

    @njit(cache=True)
    def clark_batch_nb(starts, mu_d, var_d, topo, dpred_indptr, dpred_idx,
                       terminals, deadline, want15, want16):
        S, n = starts.shape
        ymu = np.empty((S, n), dtype=np.float64)
        yvar = np.empty((S, n), dtype=np.float64)
        rm15 = np.zeros(S, dtype=np.float64)
        rm16 = np.zeros(S, dtype=np.float64)
        for s in range(S):
            for tpos in range(n):
                j = topo[tpos]
                lo = dpred_indptr[j]
                hi = dpred_indptr[j + 1]
                if lo == hi:
                    if want16:
                        rm16[s] += 1.0
                    xmu = starts[s, j]
                    xvar = 0.0
                else:
                    pm = ymu[s, dpred_idx[lo]]
                    pv = yvar[s, dpred_idx[lo]]
                    for t in range(lo + 1, hi):
                        k = dpred_idx[t]
                        pm, pv = _clark_nb(pm, pv, ymu[s, k], yvar[s, k])
                    if want16:
                        rm16[s] += _ncdf_nb(pm, pv, starts[s, j])
                    xmu, xvar = _clark_nb(pm, pv, starts[s, j], 0.0)
                ymu[s, j] = xmu + mu_d[j]
                yvar[s, j] = xvar + var_d[j]
            if want15:
                tm = ymu[s, terminals[0]]
                tv = yvar[s, terminals[0]]
                for t in range(1, terminals.shape[0]):
                    k = terminals[t]
                    tm, tv = _clark_nb(tm, tv, ymu[s, k], yvar[s, k])
                rm15[s] = _ncdf_nb(tm, tv, deadline)
        return rm15, rm16

    @njit(cache=True)
    def sim_replications_nb(dur, starts, topo, dpred_indptr, dpred_idx,
                            deadline, tol, job_dl, use_job_dl):
        R, n = dur.shape
        Y = np.empty((R, n), dtype=np.float64)
        makespan = np.full(R, -math.inf, dtype=np.float64)
        ontime = np.zeros(R, dtype=np.int64)
        delay = np.zeros(R, dtype=np.float64)
        dl_delay = np.zeros(R, dtype=np.float64)
        dl_late = np.zeros(R, dtype=np.int64)
        for rep in range(R):
            for tpos in range(n):
                j = topo[tpos]
                x = starts[j]
                for t in range(dpred_indptr[j], dpred_indptr[j + 1]):
                    yk = Y[rep, dpred_idx[t]]
                    if yk > x:
                        x = yk
                y = x + dur[rep, j]
                Y[rep, j] = y
                if y > makespan[rep]:
                    makespan[rep] = y
                if x <= starts[j] + tol:
                    ontime[rep] += 1
                delay[rep] += x - starts[j]
                if use_job_dl and math.isfinite(job_dl[j]):
                    over = y - job_dl[j]
                    if over > 0.0:
                        dl_delay[rep] += over
                    if y > job_dl[j] + tol:
                        dl_late[rep] += 1
        return makespan, ontime, delay, dl_delay, dl_late

    es_forward = es_forward_nb
    slack_batch = slack_batch_nb
    esd_batch = esd_batch_nb
    clark_batch = clark_batch_nb
    sim_replications = sim_replications_nb
else:
    es_forward = es_forward_np
    slack_batch = slack_batch_np
    esd_batch = esd_batch_np
    clark_batch = clark_batch_np
    sim_replications = sim_replications_np


def warmup():
    """Trigger JIT compilation on tiny inputs so timed runs exclude it."""
    p = np.array([1.0, 1.0])
    r = np.zeros(2)
    indptr = np.array([0, 0, 1], dtype=np.int64)
    idx = np.array([0], dtype=np.int64)
    sindptr = np.array([0, 1, 1], dtype=np.int64)
    order_flat = np.array([0, 1], dtype=np.int64)
    order_ptr = np.array([0, 2], dtype=np.int64)
    topo = np.array([0, 1], dtype=np.int64)
    starts = np.array([[0.0, 1.0]])
    dl = np.array([4.0, 4.0])
    es_forward(p, r, sindptr, idx, indptr, idx, order_flat, order_ptr)
    slack_batch(starts, p, dl, topo, sindptr, idx)
    esd_batch(starts, p, topo, indptr, idx, True, 1e-9)
    clark_batch(starts, p, np.array([0.1, 0.1]), topo, indptr, idx,
                np.array([1], dtype=np.int64), 4.0, True, True)
    sim_replications(np.array([[1.0, 1.0]]), np.array([0.0, 1.0]), topo,
                     indptr, idx, 4.0, 1e-9, np.array([np.inf, np.inf]), False)

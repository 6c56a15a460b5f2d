"""Pure NumPy twin of the bounded-variable primal simplex pivot loop.

The compiled kernel in `_kernel_cy` implements the same iteration; either one
is driven by `lp.py`, which owns canonicalization, the two phases, and result
extraction. Keep the two twins behaviorally aligned: same pricing rule, same
ratio test, same tie-breaking, same refactorization policy.

State arrays (mutated in place):
    basis[m]   basic variable id per row
    vstat[N]   -1 nonbasic at lower, +1 nonbasic at upper, 0 basic
    binv[m,m]  dense basis inverse (Fortran order)
    xb[m]      basic variable values

Pricing is Dantzig (most negative reduced cost) with an automatic switch to
Bland's rule after a long degenerate streak, switching back once progress
resumes. The ratio test is a two-pass Harris variant: pass one finds the
smallest step under tolerance-relaxed bounds, pass two takes the largest
pivot magnitude among rows whose exact ratio fits under it (lowest basic id
on ties), keeping steps deterministic and pivots large. The dense inverse is
rebuilt (sparse LU applied to the identity) every couple hundred pivots and
whenever a small pivot would poison it, and optimality is only ever declared
on a freshly rebuilt inverse, so callers never see drifted results.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

STATUS_OPTIMAL = 0
STATUS_UNBOUNDED = 1
STATUS_ITER_LIMIT = 2
STATUS_SINGULAR = 3

_REFACTOR_EVERY = 64
_SMALL_PIVOT = 1e-6
_RATIO_SLACK = 1e-8
_DEGENERATE_STEP = 1e-9
_PROGRESS_STEP = 1e-7


def _refactor(A, basis, vstat, lower, upper, b, binv, xb) -> bool:
    """Rebuild binv and xb from the current basis; False when B is singular."""
    m = binv.shape[0]
    try:
        lu = splu(A[:, basis].tocsc())
        binv[:, :] = lu.solve(np.eye(m))
    except (RuntimeError, ValueError):
        return False
    if not np.isfinite(binv).all():
        return False
    xfull = np.where(vstat == -1, lower, upper)
    xfull[vstat == 0] = 0.0
    xb[:] = binv @ (b - A @ xfull)
    return True


def refactor(indptr, indices, data, m, lower, upper, b, basis, vstat, binv, xb) -> bool:
    """Driver-visible refactorization."""
    if m == 0:
        return True
    A = sp.csc_matrix((data, indices, indptr), shape=(m, lower.shape[0]))
    return _refactor(A, basis, vstat, lower, upper, b, binv, xb)


def simplex_iterate(indptr, indices, data, m, c, lower, upper, b,
                    basis, vstat, binv, xb,
                    tol, pivot_tol, max_iter, bland_threshold,
                    entry_fresh=True):
    """Run pivots until optimality/unboundedness or the iteration cap.

    entry_fresh asserts that binv/xb are exact for the starting basis (true
    at phase starts; the driver owns that guarantee). Returns (status,
    iterations).
    """
    n_total = c.shape[0]
    A = sp.csc_matrix((data, indices, indptr), shape=(m, n_total))
    AT = A.T.tocsr()
    movable = (upper - lower) > 0.0
    at_lower = vstat == -1
    at_upper = vstat == 1
    # deterministic per-column jitter on Dantzig scores; degenerate models
    # otherwise re-enter the same pivot patterns over and over
    jitter = 1.0 + 1e-9 * ((np.arange(n_total, dtype=np.int64) * 2654435761) % 256)

    iters = 0
    bland = False
    degen_streak = 0
    since_refactor = 0
    fresh = bool(entry_fresh)
    while True:
        # pricing: y = (B^-T) c_B, reduced costs d = c - A^T y
        if m:
            y = binv.T @ c[basis]
            d = c - (AT @ y)
        else:
            d = c
        eligible = movable & ((at_lower & (d < -tol)) | (at_upper & (d > tol)))
        idx = np.flatnonzero(eligible)
        if idx.size == 0:
            if fresh or m == 0:
                return STATUS_OPTIMAL, iters
            # only certify optimality on exact numbers
            if not _refactor(A, basis, vstat, lower, upper, b, binv, xb):
                return STATUS_SINGULAR, iters
            since_refactor = 0
            fresh = True
            continue
        if iters >= max_iter:
            return STATUS_ITER_LIMIT, iters
        iters += 1

        j = int(idx[0]) if bland else int(idx[np.argmax(np.abs(d[idx]) * jitter[idx])])
        sigma = 1.0 if vstat[j] == -1 else -1.0

        lo_j, hi_j = indptr[j], indptr[j + 1]
        col_rows = indices[lo_j:hi_j]
        col_vals = data[lo_j:hi_j]
        w = binv[:, col_rows] @ col_vals if m else np.zeros(0)
        rate = -sigma * w

        # two-pass ratio test
        delta_bound = upper[j] - lower[j]
        if m:
            dec = rate < -pivot_tol
            inc = rate > pivot_tol
            blocking = dec | inc
            lb = lower[basis]
            ub = upper[basis]
            room = np.where(dec, xb - lb, ub - xb)
            arate = np.abs(rate)
            exact = np.full(m, np.inf)
            relaxed = np.full(m, np.inf)
            exact[blocking] = np.maximum(room[blocking], 0.0) / arate[blocking]
            relaxed[blocking] = exact[blocking] + _RATIO_SLACK / arate[blocking]
            theta = float(relaxed.min())
        else:
            theta = np.inf

        if theta >= delta_bound:
            # blocked by the entering variable's own opposite bound: flip it
            if not np.isfinite(delta_bound):
                return STATUS_UNBOUNDED, iters
            delta = delta_bound
            if m:
                xb -= (sigma * delta) * w
            vstat[j] = -vstat[j]
            at_lower[j] = vstat[j] == -1
            at_upper[j] = vstat[j] == 1
        else:
            cand = np.flatnonzero(exact <= theta)
            if bland:
                r = int(cand[np.argmin(basis[cand])])
            else:
                aw = np.abs(w[cand])
                cand = cand[aw == aw.max()]
                r = int(cand[np.argmin(basis[cand])])
            wr = float(w[r])
            if abs(wr) < _SMALL_PIVOT and not fresh:
                # suspicious pivot: it may be an artifact of inverse drift, so
                # rebuild and redo this iteration on clean numbers
                if not _refactor(A, basis, vstat, lower, upper, b, binv, xb):
                    return STATUS_SINGULAR, iters
                since_refactor = 0
                fresh = True
                iters -= 1
                continue
            delta = max(float(exact[r]), 0.0)

            xb -= (sigma * delta) * w
            leaving = int(basis[r])
            vstat[leaving] = -1 if rate[r] < 0 else 1
            at_lower[leaving] = vstat[leaving] == -1
            at_upper[leaving] = vstat[leaving] == 1
            basis[r] = j
            vstat[j] = 0
            at_lower[j] = at_upper[j] = False
            xb[r] = lower[j] + delta if sigma > 0 else upper[j] - delta

            # eta update of the dense inverse: row r scaled, others swept
            binv[r, :] *= 1.0 / wr
            arow = binv[r, :].copy()
            w_other = np.asarray(w, dtype=np.float64).copy()
            w_other[r] = 0.0
            binv -= np.outer(w_other, arow)

            since_refactor += 1
            fresh = False
            if since_refactor >= _REFACTOR_EVERY or abs(wr) < _SMALL_PIVOT:
                if not _refactor(A, basis, vstat, lower, upper, b, binv, xb):
                    return STATUS_SINGULAR, iters
                since_refactor = 0
                fresh = True

        if delta > _PROGRESS_STEP:
            degen_streak = 0
            bland = False
        elif delta <= _DEGENERATE_STEP:
            degen_streak += 1
            if degen_streak > bland_threshold:
                bland = True

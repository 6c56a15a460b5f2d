# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of the bounded-variable simplex pivot loop.

Behaviorally aligned with `_kernel_py`: same pricing rule (Dantzig with a
Bland fallback under genuine degeneracy), same two-pass Harris ratio test and
tie-breaking, same refactorization policy, same statuses. The per-iteration
linear algebra runs as plain C loops over the CSC arrays and the Fortran-
ordered dense inverse; refactorization delegates to SciPy's sparse LU, which
is off the hot path.
"""

import numpy as np

import scipy.sparse as sp
from scipy.sparse.linalg import splu

cimport numpy as cnp
from libc.math cimport INFINITY, fabs

cnp.import_array()

STATUS_OPTIMAL = 0
STATUS_UNBOUNDED = 1
STATUS_ITER_LIMIT = 2
STATUS_SINGULAR = 3

cdef long _REFACTOR_EVERY = 64
cdef double _SMALL_PIVOT = 1e-6
cdef double _RATIO_SLACK = 1e-8
cdef double _DEGENERATE_STEP = 1e-9
cdef double _PROGRESS_STEP = 1e-7


def refactor(indptr, indices, data, m, lower, upper, b, basis, vstat, binv, xb):
    """Rebuild binv and xb from the current basis; False when B is singular."""
    if m == 0:
        return True
    lower = np.asarray(lower)
    upper = np.asarray(upper)
    vstat_arr = np.asarray(vstat)
    binv_arr = np.asarray(binv)
    xb_arr = np.asarray(xb)
    A = sp.csc_matrix((np.asarray(data), np.asarray(indices), np.asarray(indptr)),
                      shape=(m, lower.shape[0]))
    try:
        lu = splu(A[:, np.asarray(basis)].tocsc())
        binv_arr[:, :] = lu.solve(np.eye(m))
    except (RuntimeError, ValueError):
        return False
    if not np.isfinite(binv_arr).all():
        return False
    xfull = np.where(vstat_arr == -1, lower, upper)
    xfull[vstat_arr == 0] = 0.0
    xb_arr[:] = binv_arr @ (b - A @ xfull)
    return True


def simplex_iterate(cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices,
                    double[::1] data, Py_ssize_t m, double[::1] c,
                    double[::1] lower, double[::1] upper, double[::1] b,
                    cnp.int64_t[::1] basis, cnp.int8_t[::1] vstat,
                    double[::1, :] binv, double[::1] xb,
                    double tol, double pivot_tol, long max_iter,
                    long bland_threshold, bint entry_fresh=True):
    """Run pivots until optimality/unboundedness or the iteration cap.

    Returns (status, iterations).
    """
    cdef Py_ssize_t n_total = c.shape[0]
    cdef cnp.ndarray[double, ndim=1] y_arr = np.zeros(m)
    cdef cnp.ndarray[double, ndim=1] w_arr = np.zeros(m)
    cdef cnp.ndarray[double, ndim=1] arow_arr = np.zeros(m)
    cdef cnp.ndarray[double, ndim=1] exact_arr = np.zeros(m)
    cdef double[::1] y = y_arr
    cdef double[::1] w = w_arr
    cdef double[::1] arow = arow_arr
    cdef double[::1] exact = exact_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] movable_arr = \
        (np.asarray(upper) - np.asarray(lower) > 0.0).astype(np.uint8)
    cdef cnp.uint8_t[::1] movable = movable_arr
    # deterministic per-column jitter on Dantzig scores; degenerate models
    # otherwise re-enter the same pivot patterns over and over
    cdef cnp.ndarray[double, ndim=1] jitter_arr = \
        1.0 + 1e-9 * ((np.arange(n_total, dtype=np.int64) * 2654435761) % 256)
    cdef double[::1] jitter = jitter_arr

    cdef long iters = 0
    cdef bint bland = False
    cdef bint fresh = entry_fresh
    cdef long degen_streak = 0
    cdef long since_refactor = 0

    cdef Py_ssize_t i, j, k, col, r, leaving, best_j
    cdef double acc, dj, best_score, score, sigma, delta, delta_bound
    cdef double rate_i, room, theta, wr, inv_wr, a, val
    cdef double best_aw, aw
    cdef cnp.int64_t best_basis
    cdef int vs

    while True:
        # pricing: y = (B^-T) c_B, reduced costs on the fly
        for i in range(m):
            acc = 0.0
            for k in range(m):
                acc += binv[k, i] * c[basis[k]]
            y[i] = acc

        best_j = -1
        best_score = 0.0
        for j in range(n_total):
            if not movable[j]:
                continue
            vs = vstat[j]
            if vs == 0:
                continue
            dj = c[j]
            for k in range(indptr[j], indptr[j + 1]):
                dj -= data[k] * y[indices[k]]
            if vs == -1:
                if dj < -tol:
                    score = -dj * jitter[j]
                else:
                    continue
            else:
                if dj > tol:
                    score = dj * jitter[j]
                else:
                    continue
            if bland:
                best_j = j
                break
            if score > best_score:
                best_score = score
                best_j = j
        if best_j < 0:
            if fresh or m == 0:
                return STATUS_OPTIMAL, iters
            # only certify optimality on exact numbers
            if not refactor(indptr, indices, data, m, lower, upper, b,
                            basis, vstat, binv, xb):
                return STATUS_SINGULAR, iters
            since_refactor = 0
            fresh = True
            continue
        if iters >= max_iter:
            return STATUS_ITER_LIMIT, iters
        iters += 1
        j = best_j
        sigma = 1.0 if vstat[j] == -1 else -1.0

        for i in range(m):
            w[i] = 0.0
        for k in range(indptr[j], indptr[j + 1]):
            col = indices[k]
            val = data[k]
            for i in range(m):
                w[i] += binv[i, col] * val

        # two-pass ratio test
        delta_bound = upper[j] - lower[j]
        theta = INFINITY
        for i in range(m):
            rate_i = -sigma * w[i]
            if rate_i < -pivot_tol:
                room = xb[i] - lower[basis[i]]
            elif rate_i > pivot_tol:
                room = upper[basis[i]] - xb[i]
            else:
                exact[i] = INFINITY
                continue
            if room < 0.0:
                room = 0.0
            exact[i] = room / fabs(rate_i)
            if exact[i] + _RATIO_SLACK / fabs(rate_i) < theta:
                theta = exact[i] + _RATIO_SLACK / fabs(rate_i)

        if theta >= delta_bound:
            # blocked by the entering variable's own opposite bound: flip it
            if delta_bound == INFINITY:
                return STATUS_UNBOUNDED, iters
            delta = delta_bound
            for i in range(m):
                xb[i] -= sigma * delta * w[i]
            vstat[j] = -vstat[j]
        else:
            r = -1
            best_aw = -1.0
            best_basis = 0
            for i in range(m):
                if exact[i] <= theta:
                    if bland:
                        if r < 0 or basis[i] < best_basis:
                            r = i
                            best_basis = basis[i]
                    else:
                        aw = fabs(w[i])
                        if aw > best_aw or (aw == best_aw and basis[i] < best_basis):
                            best_aw = aw
                            best_basis = basis[i]
                            r = i
            wr = w[r]
            if fabs(wr) < _SMALL_PIVOT and not fresh:
                # suspicious pivot: it may be an artifact of inverse drift, so
                # rebuild and redo this iteration on clean numbers
                if not refactor(indptr, indices, data, m, lower, upper, b,
                                basis, vstat, binv, xb):
                    return STATUS_SINGULAR, iters
                since_refactor = 0
                fresh = True
                iters -= 1
                continue
            delta = exact[r]
            if delta < 0.0:
                delta = 0.0

            for i in range(m):
                xb[i] -= sigma * delta * w[i]
            leaving = basis[r]
            vstat[leaving] = -1 if (-sigma * wr) < 0.0 else 1
            basis[r] = j
            vstat[j] = 0
            xb[r] = lower[j] + delta if sigma > 0 else upper[j] - delta

            # eta update of the dense inverse: row r scaled, others swept
            inv_wr = 1.0 / wr
            for k in range(m):
                binv[r, k] *= inv_wr
                arow[k] = binv[r, k]
            w[r] = 0.0
            for k in range(m):
                a = arow[k]
                if a != 0.0:
                    for i in range(m):
                        binv[i, k] -= w[i] * a

            since_refactor += 1
            fresh = False
            if since_refactor >= _REFACTOR_EVERY or fabs(wr) < _SMALL_PIVOT:
                if not refactor(indptr, indices, data, m, lower, upper, b,
                                basis, vstat, binv, xb):
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

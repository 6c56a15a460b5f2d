"""LP relaxation solving: canonicalization, two phases, kernel selection.

Rows enter the kernel as equalities with one slack column each (bounds encode
the sense; an equality slack is fixed at zero). Rows whose slack cannot absorb
the initial residual get an artificial column; phase one prices artificials at
unit cost from the trivially invertible slack/artificial basis, phase two
fixes them at zero and optimizes the real costs from wherever phase one ended.

The pivot kernel exists twice: a compiled Cython extension and a pure NumPy
fallback with identical pivoting rules, chosen at import (the environment
variable PATHIP_PURE_KERNEL=1 forces the fallback).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..model import EQ, GE, LE, MAX, IpModel, ModelError

_SENSE_CODE = {LE: 0, EQ: 1, GE: 2}


def _load_kernel():
    if not os.environ.get("PATHIP_PURE_KERNEL"):
        try:
            from . import _kernel_cy
            return _kernel_cy, "compiled"
        except ImportError:
            pass
    from . import _kernel_py
    return _kernel_py, "pure"


_kernel, KERNEL_NAME = _load_kernel()


def active_kernel() -> str:
    return KERNEL_NAME


def set_kernel(name: str) -> None:
    """Switch pivot kernels at runtime ('pure' or 'compiled'); for tests/benchmarks."""
    global _kernel, KERNEL_NAME
    if name == "pure":
        from . import _kernel_py as mod
    elif name == "compiled":
        from . import _kernel_cy as mod  # raises ImportError when not built
    else:
        raise ValueError(f"unknown kernel {name!r}")
    _kernel, KERNEL_NAME = mod, name


@dataclass
class LpArrays:
    """Constraint-matrix view of an IpModel, reused across branch-and-bound nodes."""

    A: sp.csc_matrix
    senses: np.ndarray
    rhs: np.ndarray
    c: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    integer_mask: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


def model_arrays(model: IpModel) -> LpArrays:
    if not model.is_pure_linear():
        raise ModelError("model has quadratic objective terms: linearize first")
    n = model.variable_count
    m = model.constraint_count
    rows, cols, vals = [], [], []
    senses = np.zeros(m, dtype=np.int8)
    rhs = np.zeros(m)
    for i, cons in enumerate(model.constraints):
        senses[i] = _SENSE_CODE[cons.sense]
        rhs[i] = cons.rhs
        for coef, vid in cons.terms:
            rows.append(i)
            cols.append(vid)
            vals.append(coef)
    A = sp.csc_matrix((vals, (rows, cols)), shape=(m, n))
    c = np.zeros(n)
    for vid, coef in model.objective.linear.items():
        c[vid] = coef
    lower = np.array([v.lower for v in model.variables], dtype=float)
    upper = np.array([v.upper for v in model.variables], dtype=float)
    if n and not (np.isfinite(lower).all() and np.isfinite(upper).all()):
        raise ModelError("all variables must have finite bounds")
    integer_mask = np.array([v.is_integer for v in model.variables], dtype=bool)
    return LpArrays(A, senses, rhs, c, lower, upper, integer_mask)


@dataclass
class LpResult:
    status: str               # optimal | infeasible | unbounded | numerical
    x: np.ndarray             # structural values (empty unless optimal)
    objective: float
    iterations: int


def solve_lp(arr: LpArrays, c: np.ndarray, lower: np.ndarray, upper: np.ndarray,
             tol: float = 1e-7, max_iter: int | None = None) -> LpResult:
    """Minimize c.x over the polyhedron in `arr` with per-call variable bounds."""
    res = _solve_lp_once(arr, c, lower, upper, tol, max_iter, bland_threshold=400)
    if res.status == "numerical":
        # one stubborn retry under Bland's rule from the start
        res = _solve_lp_once(arr, c, lower, upper, tol, max_iter, bland_threshold=0)
    return res


def _solve_lp_once(arr, c, lower, upper, tol, max_iter, bland_threshold) -> LpResult:
    m, n = arr.shape
    if lower.size and (lower > upper + 1e-12).any():
        return LpResult("infeasible", np.empty(0), 0.0, 0)

    x0 = lower.copy()
    resid = arr.rhs - arr.A @ x0 if m else np.zeros(0)

    le = arr.senses == 0
    eq = arr.senses == 1
    ge = arr.senses == 2
    slack_lower = np.where(ge, -np.inf, 0.0)
    slack_upper = np.where(le, np.inf, 0.0)
    holds = (le & (resid >= 0.0)) | (ge & (resid <= 0.0)) | (eq & (resid == 0.0))
    art_rows = np.flatnonzero(~holds)
    n_art = art_rows.size

    # extended CSC: structural columns, slack identity, artificial +-identity
    base_nnz = arr.A.indptr[-1] if n else 0
    indptr = np.concatenate([
        arr.A.indptr if n else np.zeros(1, dtype=np.int64),
        base_nnz + 1 + np.arange(m, dtype=np.int64),
        base_nnz + m + 1 + np.arange(n_art, dtype=np.int64),
    ]).astype(np.int64)
    indices = np.concatenate([
        arr.A.indices.astype(np.int64) if n else np.zeros(0, dtype=np.int64),
        np.arange(m, dtype=np.int64),
        art_rows.astype(np.int64),
    ])
    sigma = np.sign(resid[art_rows])
    sigma[sigma == 0.0] = 1.0
    data = np.concatenate([arr.A.data.astype(np.float64) if n else np.zeros(0),
                           np.ones(m), sigma])

    n_total = n + m + n_art
    ext_lower = np.concatenate([lower, slack_lower, np.zeros(n_art)])
    ext_upper = np.concatenate([upper, slack_upper, np.full(n_art, np.inf)])

    # deterministic anti-degeneracy bound perturbation: widen each non-fixed
    # structural variable's range by a per-index amount far below the
    # feasibility tolerance, so ratio-test ties (rampant in flow models)
    # break strictly; slack bounds stay exact so rows are never relaxed
    pert = 1e-10 * (1.0 + (np.arange(n_total, dtype=np.int64) * 2654435761) % 256)
    wide = (ext_upper - ext_lower) > 1e-6
    wide[n:] = False
    run_lower = ext_lower - pert * wide
    run_upper = ext_upper + pert * wide

    vstat = np.full(n_total, -1, dtype=np.int8)
    vstat[n:n + m][ge] = 1  # >= slacks sit at their upper bound (zero)
    basis = np.arange(n, n + m, dtype=np.int64)
    xb = resid.copy()
    art_of_row = {int(r): n + m + k for k, r in enumerate(art_rows)}
    for k, r in enumerate(art_rows):
        basis[r] = n + m + k
        xb[r] = abs(resid[r])
        # the displaced slack returns to a zero bound
        vstat[n + r] = 1 if ge[r] else -1
    vstat[basis] = 0

    binv = np.zeros((m, m), order="F")
    if m:
        np.fill_diagonal(binv, 1.0)
        for k, r in enumerate(art_rows):
            binv[r, r] = sigma[k]

    if max_iter is None:
        max_iter = 20000 + 50 * m
    pivot_tol = 1e-7
    total_iters = 0

    feas_tol = 10.0 * tol * (1.0 + (np.abs(arr.rhs).max() if m else 0.0))

    if n_art:
        c1 = np.zeros(n_total)
        c1[n + m:] = 1.0
        status, iters = _kernel.simplex_iterate(
            indptr, indices, data, m, c1, run_lower, run_upper, arr.rhs,
            basis, vstat, binv, xb, tol, pivot_tol, max_iter, bland_threshold)
        total_iters += iters
        if status != _kernel.STATUS_OPTIMAL:
            return LpResult("numerical", np.empty(0), 0.0, total_iters)
        # the kernel certified optimality on a fresh factorization; judge
        # feasibility only if the basics truly sit within the bounds it was
        # asked to enforce (the perturbed ones)
        lb_b, ub_b = run_lower[basis], run_upper[basis]
        viol = float(np.maximum(np.maximum(lb_b - xb, xb - ub_b), 0.0).max()) if m else 0.0
        if viol > feas_tol:
            return LpResult("numerical", np.empty(0), 0.0, total_iters)
        infeas = float(xb[basis >= n + m].clip(min=0.0).sum()) if m else 0.0
        if infeas > feas_tol:
            return LpResult("infeasible", np.empty(0), 0.0, total_iters)
        ext_lower[n + m:] = 0.0
        ext_upper[n + m:] = 0.0
        run_lower[n + m:] = 0.0
        run_upper[n + m:] = 0.0

    c2 = np.zeros(n_total)
    c2[:n] = c
    status, iters = _kernel.simplex_iterate(
        indptr, indices, data, m, c2, run_lower, run_upper, arr.rhs,
        basis, vstat, binv, xb, tol, pivot_tol, max_iter, bland_threshold)
    total_iters += iters
    if status == _kernel.STATUS_UNBOUNDED:
        return LpResult("unbounded", np.empty(0), 0.0, total_iters)
    if status != _kernel.STATUS_OPTIMAL:
        return LpResult("numerical", np.empty(0), 0.0, total_iters)

    xfull = np.where(vstat == -1, ext_lower, ext_upper)
    xfull[vstat == 0] = 0.0
    if m:
        xfull[basis] = xb
    x = xfull[:n]

    if not _solution_ok(arr, x, lower, upper):
        return LpResult("numerical", np.empty(0), 0.0, total_iters)
    return LpResult("optimal", x, float(c @ x), total_iters)


def _solution_ok(arr, x, lower, upper) -> bool:
    scale = 1e-6 * (1.0 + (np.abs(arr.rhs).max() if arr.rhs.size else 0.0))
    if x.size and ((x < lower - scale) | (x > upper + scale)).any():
        return False
    if arr.rhs.size == 0:
        return True
    act = arr.A @ x
    gap = act - arr.rhs
    bad = ((arr.senses == 0) & (gap > scale)) | \
          ((arr.senses == 2) & (gap < -scale)) | \
          ((arr.senses == 1) & (np.abs(gap) > scale))
    return not bad.any()

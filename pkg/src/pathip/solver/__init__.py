"""Embedded MILP engine: branch and bound over a bounded-variable simplex."""

from .branch_bound import (SolveConfig, SolveOutcome, SolverError,
                           check_feasibility, lp_relax, solve)
from .lp import active_kernel, set_kernel

__all__ = ["SolveConfig", "SolveOutcome", "SolverError", "check_feasibility",
           "lp_relax", "solve", "active_kernel", "set_kernel"]

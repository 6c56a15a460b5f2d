"""Branch-and-bound MILP engine over the LP relaxation.

Nodes carry bound overrides relative to the root model; every node re-solves
its LP from scratch (no warm starts, correctness first). Deterministic by
construction: heap ties break on insertion order, branching ties on the
lowest variable id, and the LP kernel itself is deterministic.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..model import MAX, IpModel, ModelError
from .lp import LpArrays, model_arrays, solve_lp

BRANCH_RULES = ("most-fractional", "first-fractional")
NODE_ORDERS = ("best-bound", "depth-first")

# strictly-better margin when comparing bounds against the incumbent
_PRUNE_EPS = 1e-9


class SolverError(RuntimeError):
    """Numerical breakdown the engine could not recover from."""


@dataclass
class SolveConfig:
    time_limit: float = 600.0
    integrality_tolerance: float = 1e-6
    lp_tolerance: float = 1e-7
    branching: str = "most-fractional"
    node_order: str = "best-bound"
    seed: int = 0
    objective_target: float | None = None
    max_nodes: int | None = None
    collect_node_log: bool = False

    def __post_init__(self):
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.integrality_tolerance <= 0 or self.lp_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.branching not in BRANCH_RULES:
            raise ValueError(f"branching must be one of {BRANCH_RULES}")
        if self.node_order not in NODE_ORDERS:
            raise ValueError(f"node_order must be one of {NODE_ORDERS}")


@dataclass
class SolveOutcome:
    status: str                      # optimal | feasible | infeasible | unbounded | timeout
    assignment: dict[int, float]
    objective: float | None
    bound: float | None
    stats: dict[str, float] = field(default_factory=dict)
    node_log: list[tuple[float, float | None]] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.status in ("optimal", "feasible")


@dataclass(order=True)
class _Node:
    bound: float
    order: int
    overrides: dict[int, tuple[float, float]] = field(compare=False)


def solve(model: IpModel, config: SolveConfig | None = None) -> SolveOutcome:
    """Solve a pure-linear bounded MILP to optimality (or the configured limits)."""
    config = config or SolveConfig()
    arr = model_arrays(model)
    n = model.variable_count
    sign = -1.0 if model.objective.sense == MAX else 1.0
    c = sign * arr.c
    target = None if config.objective_target is None else sign * config.objective_target
    int_ids = np.flatnonzero(arr.integer_mask)
    int_tol = config.integrality_tolerance

    start = time.monotonic()
    deadline = start + config.time_limit
    incumbent: np.ndarray | None = None
    incumbent_obj = math.inf
    nodes_done = 0
    lp_iters = 0
    node_log: list[tuple[float, float | None]] = []

    heap: list[_Node] = []
    counter = 0
    root = _Node(-math.inf, counter, {})
    if config.node_order == "best-bound":
        heapq.heappush(heap, root)
    else:
        heap.append(root)
    open_bounds: dict[int, float] = {root.order: root.bound}

    def ext(v: float) -> float:
        return sign * v

    status = None
    while heap:
        if time.monotonic() > deadline:
            status = "timeout"
            break
        if config.max_nodes is not None and nodes_done >= config.max_nodes:
            status = "timeout"
            break
        node = heapq.heappop(heap) if config.node_order == "best-bound" else heap.pop()
        open_bounds.pop(node.order, None)
        if node.bound >= incumbent_obj - _PRUNE_EPS:
            continue

        lo = arr.lower.copy()
        hi = arr.upper.copy()
        for vid, (nl, nh) in node.overrides.items():
            lo[vid], hi[vid] = nl, nh
        res = solve_lp(arr, c, lo, hi, tol=config.lp_tolerance)
        nodes_done += 1
        lp_iters += res.iterations

        if res.status == "infeasible":
            continue
        if res.status == "unbounded":
            status = "unbounded"
            break
        if res.status != "optimal":
            raise SolverError(f"LP relaxation failed ({res.status}) at node {nodes_done}")
        if config.collect_node_log:
            node_log.append((ext(res.objective),
                             None if incumbent is None else ext(incumbent_obj)))
        if res.objective >= incumbent_obj - _PRUNE_EPS:
            continue

        x = res.x
        frac = np.abs(x[int_ids] - np.round(x[int_ids])) if int_ids.size else np.empty(0)
        fractional = int_ids[frac > int_tol]
        if fractional.size == 0:
            rounded = x.copy()
            if int_ids.size:
                rounded[int_ids] = np.round(rounded[int_ids])
            obj = float(c @ rounded)
            if obj < incumbent_obj - _PRUNE_EPS:
                incumbent = rounded
                incumbent_obj = obj
                if target is not None and incumbent_obj <= target + _PRUNE_EPS:
                    status = "target"
                    break
            continue

        if config.branching == "most-fractional":
            dist = np.abs(x[fractional] - np.round(x[fractional]))
            vid = int(fractional[np.argmax(dist)])
        else:
            vid = int(fractional[0])
        xv = float(x[vid])
        lo_v = node.overrides.get(vid, (arr.lower[vid], arr.upper[vid]))
        down = dict(node.overrides)
        down[vid] = (lo_v[0], math.floor(xv))
        up = dict(node.overrides)
        up[vid] = (math.ceil(xv), lo_v[1])
        children = [_Node(res.objective, counter + 1, down),
                    _Node(res.objective, counter + 2, up)]
        counter += 2
        if config.node_order == "depth-first":
            # dive toward the child containing the rounded LP value
            near_down = xv - math.floor(xv) <= 0.5
            first, second = (children[1], children[0]) if near_down else children
            heap.extend([first, second])
        else:
            for ch in children:
                heapq.heappush(heap, ch)
        for ch in children:
            open_bounds[ch.order] = ch.bound

    wall = time.monotonic() - start
    open_best = min(open_bounds.values()) if open_bounds else math.inf

    if status == "unbounded":
        return SolveOutcome("unbounded", {}, None, None,
                            _stats(nodes_done, lp_iters, wall), node_log)
    if status == "target":
        bound = min(open_best, incumbent_obj)
        return SolveOutcome("feasible", _assignment(incumbent), ext(incumbent_obj),
                            ext(bound), _stats(nodes_done, lp_iters, wall), node_log)
    if status == "timeout":
        if incumbent is None:
            return SolveOutcome("timeout", {}, None,
                                None if not math.isfinite(open_best) else ext(open_best),
                                _stats(nodes_done, lp_iters, wall), node_log)
        return SolveOutcome("feasible", _assignment(incumbent), ext(incumbent_obj),
                            ext(min(open_best, incumbent_obj)),
                            _stats(nodes_done, lp_iters, wall), node_log)
    # search exhausted
    if incumbent is None:
        return SolveOutcome("infeasible", {}, None, None,
                            _stats(nodes_done, lp_iters, wall), node_log)
    return SolveOutcome("optimal", _assignment(incumbent), ext(incumbent_obj),
                        ext(incumbent_obj), _stats(nodes_done, lp_iters, wall), node_log)


def _assignment(x: np.ndarray | None) -> dict[int, float]:
    return {} if x is None else {i: float(v) for i, v in enumerate(x)}


def _stats(nodes: int, iters: int, wall: float) -> dict[str, float]:
    return {"nodes": nodes, "simplex_iterations": iters, "wall_time": wall}


def check_feasibility(model: IpModel, config: SolveConfig | None = None) -> SolveOutcome:
    """Zero-objective solve that stops at the first integral point."""
    config = config or SolveConfig()
    stripped = IpModel(model.name)
    stripped.variables = list(model.variables)
    stripped.constraints = list(model.constraints)
    stripped._names = dict(model._names)
    cfg = SolveConfig(time_limit=config.time_limit,
                      integrality_tolerance=config.integrality_tolerance,
                      lp_tolerance=config.lp_tolerance,
                      branching=config.branching,
                      node_order="depth-first",
                      seed=config.seed,
                      objective_target=0.0,
                      max_nodes=config.max_nodes,
                      collect_node_log=config.collect_node_log)
    out = solve(stripped, cfg)
    if out.status == "feasible":
        out.status = "feasible"
    elif out.status == "optimal":
        out.status = "feasible"
    return out


def lp_relax(model: IpModel, config: SolveConfig | None = None) -> dict:
    """Solve the LP relaxation only; the result is a valid dual bound.

    Numerical failure is reported as status 'numerical', distinct from
    'infeasible'.
    """
    config = config or SolveConfig()
    arr = model_arrays(model)
    sign = -1.0 if model.objective.sense == MAX else 1.0
    res = solve_lp(arr, sign * arr.c, arr.lower.copy(), arr.upper.copy(),
                   tol=config.lp_tolerance)
    if res.status != "optimal":
        return {"status": res.status, "objective": None, "assignment": {},
                "iterations": res.iterations}
    return {"status": "optimal", "objective": sign * res.objective,
            "assignment": _assignment(res.x), "iterations": res.iterations}

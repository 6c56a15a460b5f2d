"""Reward collection (QCOP and OTP) over the time-expanded encoding.

A virtual terminal vertex feeds the candidate start copies at layer 0 and
collects the walk from the goal copies at the final layer; waiting is a free
self-edge, so late exits lose nothing. Visit indicators hang off copy inflows
and carry the reward objective: linear for OTP's dwell rates, quadratic (then
linearized) for QCOP's partial-reward products.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .encoding import REACH_BOTH, EncodingError, kept_layers
from .graph import Graph
from .instances import InstanceError, RcpInstance, Solution
from .model import EQ, LE, MAX, IpModel
from .solver import SolveConfig, SolverError, solve
from .validation import evaluate_rcp


@dataclass
class RcpEncoding:
    model: IpModel
    instance: RcpInstance
    horizon: int
    kept: list[set[int]]
    entry_vars: dict[int, int]                  # start vertex -> x^0_{u,v}
    exit_vars: dict[int, int]                   # goal vertex  -> x^{T+1}_{v,u}
    edge_vars: dict[tuple[int, int, int], int]  # (t, vi, vj) movement edges
    visit_vars: dict[int, int]                  # vertex -> visit indicator
    dwell_vars: dict[int, int] = field(default_factory=dict)  # otp only
    budget_terms: list[tuple[float, int]] = field(default_factory=list)


def choose_horizon(instance: RcpInstance, visit_cap: int = 2) -> int:
    """Budget-implied horizon: no walk can take more moves than the budget
    divided by the cheapest edge, capped at visit_cap passes over V."""
    costs = [instance.edge_costs[e] for e in instance.graph.sorted_edges()]
    c_min = min(costs) if costs else 0.0
    if c_min <= 0.0:
        raise InstanceError(
            "zero-cost edge present: horizon is unbounded, pass one explicitly")
    return min(int(math.floor(instance.budget / c_min + 1e-12)),
               instance.graph.vertex_count * visit_cap)


def qcop_objective_terms(instance: RcpInstance, visit_ids: dict[int, int]):
    """Reward terms over visit indicators: full reward plus once-per-ordered-
    pair partial rewards from unvisited neighbors (weight 1/|N(j)|)."""
    graph = instance.graph
    linear = []
    quadratic = []
    for i, vid in visit_ids.items():
        coef = instance.rewards[i]
        for j in graph.neighbors(i):
            w = instance.rewards[j] / graph.degree(j)
            coef += w
            quadratic.append((-w, vid, visit_ids[j]))
        linear.append((coef, vid))
    return linear, quadratic


def _build_common(instance: RcpInstance, T: int, reachability: str) -> RcpEncoding:
    graph = instance.graph
    kept = kept_layers(graph, instance.start_set, instance.goal_set, T, reachability)
    if not kept[0] or not kept[T]:
        raise EncodingError(f"no copies survive at horizon {T}")
    model = IpModel(f"{instance.variant}-T{T}")

    entry_vars = {s: model.add_binary(f"x[0][u][{s}]")
                  for s in sorted(set(instance.start_set)) if s in kept[0]}
    exit_vars = {g: model.add_binary(f"x[{T + 1}][{g}][u]")
                 for g in sorted(set(instance.goal_set)) if g in kept[T]}
    if not entry_vars or not exit_vars:
        raise EncodingError("no start or goal copy survives filtering")
    edge_vars: dict[tuple[int, int, int], int] = {}
    for t in range(1, T + 1):
        for vi in sorted(kept[t - 1]):
            for vj in (*graph.neighbors(vi), vi):
                if vj in kept[t]:
                    edge_vars[(t, vi, vj)] = model.add_binary(f"x[{t}][{vi}][{vj}]")
    visit_vars = {v: model.add_binary(f"xv[{v}]") for v in range(graph.vertex_count)}

    enc = RcpEncoding(model, instance, T, kept, entry_vars, exit_vars,
                      edge_vars, visit_vars)

    model.add_constraint([(1.0, vid) for vid in entry_vars.values()], EQ, 1.0)
    model.add_constraint([(1.0, vid) for vid in exit_vars.values()], EQ, 1.0)
    for t in range(T + 1):
        for v in sorted(kept[t]):
            terms = [(1.0, vid) for vid in _outflow(enc, t, v)]
            terms += [(-1.0, vid) for vid in _inflow(enc, t, v)]
            merged: dict[int, float] = {}
            for coef, vid in terms:
                merged[vid] = merged.get(vid, 0.0) + coef
            if any(c != 0.0 for c in merged.values()):
                model.add_constraint(terms, EQ, 0.0)
    for v, vid in visit_vars.items():
        inflows = [w for t in range(T + 1) if v in kept[t]
                   for w in _inflow(enc, t, v)]
        model.add_constraint([(1.0, vid)] + [(-1.0, w) for w in inflows], LE, 0.0)

    enc.budget_terms = [(instance.cost(vi, vj), vid)
                        for (t, vi, vj), vid in edge_vars.items() if vi != vj]
    return enc


def _inflow(enc: RcpEncoding, t: int, v: int) -> list[int]:
    out = []
    if t == 0 and v in enc.entry_vars:
        out.append(enc.entry_vars[v])
    if t > 0:
        for u in (*enc.instance.graph.neighbors(v), v):
            vid = enc.edge_vars.get((t, u, v))
            if vid is not None:
                out.append(vid)
    return out


def _outflow(enc: RcpEncoding, t: int, v: int) -> list[int]:
    out = []
    if t == enc.horizon and v in enc.exit_vars:
        out.append(enc.exit_vars[v])
    if t < enc.horizon:
        for u in (*enc.instance.graph.neighbors(v), v):
            vid = enc.edge_vars.get((t + 1, v, u))
            if vid is not None:
                out.append(vid)
    return out


def build_qcop(instance: RcpInstance, T: int,
               reachability: str = REACH_BOTH) -> RcpEncoding:
    """Budgeted walk maximizing rewards plus correlated partial rewards."""
    if instance.variant != "qcop":
        raise InstanceError("build_qcop needs a qcop instance")
    enc = _build_common(instance, T, reachability)
    enc.model.add_constraint(enc.budget_terms, LE, instance.budget)
    linear, quadratic = qcop_objective_terms(instance, enc.visit_vars)
    enc.model.set_objective(MAX, linear, quadratic)
    return enc


def build_otp(instance: RcpInstance, T: int,
              reachability: str = REACH_BOTH) -> RcpEncoding:
    """Budgeted closed walk with continuous dwell times and linear dwell rewards."""
    if instance.variant != "otp":
        raise InstanceError("build_otp needs an otp instance")
    enc = _build_common(instance, T, reachability)
    model = enc.model
    c_star = instance.budget
    enc.dwell_vars = {v: model.add_continuous(0.0, c_star, f"t[{v}]")
                      for v in range(instance.graph.vertex_count)}
    # a tour must return to the vertex it entered from
    for s, entry in enc.entry_vars.items():
        exit_vid = enc.exit_vars.get(s)
        terms = [(1.0, entry)] + ([(-1.0, exit_vid)] if exit_vid is not None else [])
        model.add_constraint(terms, EQ, 0.0)
    # dwell only at visited vertices; the budget itself is the tightest big-M
    for v, tvar in enc.dwell_vars.items():
        model.add_constraint([(1.0, tvar), (-c_star, enc.visit_vars[v])], LE, 0.0)
    model.add_constraint(
        enc.budget_terms + [(1.0, tvar) for tvar in enc.dwell_vars.values()],
        LE, c_star)
    model.set_objective(MAX, [(instance.rates[v], tvar)
                              for v, tvar in enc.dwell_vars.items()])
    return enc


def extract_walk(enc: RcpEncoding, assignment) -> tuple[list[int], dict[int, float]]:
    """Walk and dwell times used by a feasible assignment."""
    active = [s for s, vid in enc.entry_vars.items()
              if assignment.get(vid, 0.0) > 0.5]
    if len(active) != 1:
        raise EncodingError(f"expected one entry edge, found {len(active)}")
    v = active[0]
    walk = [v]
    for t in range(1, enc.horizon + 1):
        nxt = [w for w in (*enc.instance.graph.neighbors(v), v)
               if (vid := enc.edge_vars.get((t, v, w))) is not None
               and assignment.get(vid, 0.0) > 0.5]
        if len(nxt) != 1:
            raise EncodingError(f"flow conservation violated at copy ({t - 1}, {v})")
        v = nxt[0]
        walk.append(v)
    if assignment.get(enc.exit_vars.get(v, -1), 0.0) <= 0.5:
        raise EncodingError(f"walk ends at {v} without an exit edge")
    visited = set(walk)
    dwell = {}
    for u, tvar in enc.dwell_vars.items():
        # indicator-link noise can leave dust on unvisited vertices; the
        # reward it carries is far below the objective tolerance
        val = assignment.get(tvar, 0.0)
        if val > 1e-9 and u in visited:
            dwell[u] = val
    return walk, dwell


def solve_rcp(instance: RcpInstance, config: SolveConfig | None = None,
              horizon: int | None = None) -> Solution:
    """Optimal reward, the walk achieving it, and (OTP) the dwell times."""
    start_time = time.monotonic()
    T = choose_horizon(instance) if horizon is None else horizon
    if T < 0:
        raise InstanceError("horizon must be nonnegative")
    builder = build_qcop if instance.variant == "qcop" else build_otp
    enc = builder(instance, T)
    model = enc.model.linearize()
    out = solve(model, config or SolveConfig())
    if not out.feasible:
        raise SolverError(f"rcp model unexpectedly {out.status}")
    walk, dwell = extract_walk(enc, out.assignment)
    value = evaluate_rcp(instance, walk, dwell)
    excess = value.cost - instance.budget
    if 0.0 < excess <= 1e-5 * (1.0 + instance.budget) and dwell:
        # dwell values carry LP tolerance noise; shave it off the largest ones
        for v in sorted(dwell, key=lambda u: -dwell[u]):
            take = min(dwell[v], excess)
            dwell[v] -= take
            excess -= take
            if excess <= 0.0:
                break
        dwell = {v: t for v, t in dwell.items() if t > 1e-12}
        value = evaluate_rcp(instance, walk, dwell)
    if abs(value.reward - out.objective) > 1e-6 * (1.0 + abs(out.objective)):
        raise SolverError(
            f"extracted reward {value.reward} disagrees with model objective "
            f"{out.objective}")
    if value.cost > instance.budget + 1e-9:
        raise SolverError(f"extracted walk exceeds the budget: {value.cost}")
    stats = {"variable_count": model.variable_count,
             "constraint_count": model.constraint_count,
             **out.stats,
             "wall_time": time.monotonic() - start_time,
             "horizon": T}
    return Solution(paths=[walk], reward=value.reward,
                    dwell_times=dwell or None, objective=out.objective,
                    status=out.status, stats=stats)

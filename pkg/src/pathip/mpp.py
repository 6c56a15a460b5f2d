"""Time-optimal multi-robot path planning.

The solver re-runs a feasibility check over the time-expanded encoding with
the horizon T incremented from a shortest-path underestimate until a
collision-free routing of at least k robots exists; that first feasible T is
the optimal makespan. Two pruning heuristics shrink the models around each
robot's reference shortest path; with the exact fallback enabled, a pruned
model that turns out infeasible is re-solved unpruned at the same T before T
grows, so pruning never costs optimality.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

from .encoding import (REACH_BOTH, InfeasibleEncoding, KeepFilter,
                       TimeExpandedEncoding, encode_time_expanded)
from .graph import UNREACHABLE, Graph
from .instances import InstanceError, MppInstance, Solution
from .model import GE, LE, MAX, IpModel
from .solver import SolveConfig, check_feasibility

TUBE = "tube"
SPHERE = "sphere"

FLEX_NEIGHBORHOOD = "neighborhood"
FLEX_ANYWHERE = "anywhere"


@dataclass
class MppConfig:
    heuristic: str | None = None          # "tube" | "sphere"
    h: int = 2
    fallback_to_exact: bool = True
    max_T: int = 128
    flexible_mode: str = FLEX_NEIGHBORHOOD  # goal candidates for the n-k slack robots
    neighborhood_radius: int = 1
    reachability: str = REACH_BOTH
    verbose_rows: bool = False            # emit every collision row (appendix layout)
    solver: SolveConfig = field(default_factory=SolveConfig)


# --- reference paths and the horizon underestimate ---------------------------

def _goal_set_of(instance: MppInstance, robot: int) -> tuple[int, ...]:
    for group in instance.groups:
        if robot in group:
            return tuple(sorted({instance.goals[r] for r in group}))
    return (instance.goals[robot],)


def shortest_path_to_set(graph: Graph, start: int, goals) -> list[int] | None:
    dist = graph.bfs_distances(goals)
    if dist[start] == UNREACHABLE:
        return None
    path = [start]
    v = start
    while dist[v] > 0:
        v = min(w for w in graph.neighbors(v) if dist[w] == dist[v] - 1)
        path.append(v)
    return path


def reference_paths(instance: MppInstance) -> list[list[int]]:
    """Per-robot shortest path ignoring the other robots (goal set for groups)."""
    refs = []
    for r in range(instance.robot_count):
        path = shortest_path_to_set(instance.graph, instance.starts[r],
                                    _goal_set_of(instance, r))
        if path is None:
            raise InstanceError(f"robot {r} cannot reach its goal")
        refs.append(path)
    return refs


def underestimate_T(instance: MppInstance, refs: list[list[int]] | None = None) -> int:
    """Max shortest-path length over all robots; for k < n, over the k shortest."""
    refs = refs if refs is not None else reference_paths(instance)
    if not refs:
        return 0
    lengths = sorted(len(p) - 1 for p in refs)
    if instance.k == instance.robot_count:
        return lengths[-1]
    return lengths[instance.k - 1]


# --- pruning heuristics -------------------------------------------------------

def tube_filter(graph: Graph, ref: list[int], h_t: int) -> KeepFilter:
    """Keep (t, v) only when v is within h_t hops of some reference-path vertex."""
    dist = graph.bfs_distances(set(ref))
    return lambda t, v: dist[v] != UNREACHABLE and dist[v] <= h_t


def sphere_filter(graph: Graph, ref: list[int], h_s: int, T: int) -> KeepFilter:
    """Keep (t, v) only when v is within h_s hops of the reference vertex paced
    to layer t (index t*|ref|/T, clamped to the goal at the end)."""
    if T <= 0:
        anchors = [ref[0]]
    else:
        anchors = [ref[min(t * len(ref) // T, len(ref) - 1)] for t in range(T + 1)]
    dmaps = {a: graph.bfs_distances([a]) for a in set(anchors)}
    return lambda t, v: (d := dmaps[anchors[t]][v]) != UNREACHABLE and d <= h_s


def apply_tube_heuristic(encoding: TimeExpandedEncoding, ref: list[int],
                         h_t: int) -> TimeExpandedEncoding:
    """Rebuild the encoding (fresh model) pruned to the tube around `ref`."""
    return encode_time_expanded(
        encoding.graph, encoding.starts, encoding.goals, encoding.horizon,
        reachability=encoding.reachability, robot=encoding.robot,
        keep=tube_filter(encoding.graph, ref, h_t), flow_units=encoding.flow_units)


def apply_sphere_heuristic(encoding: TimeExpandedEncoding, ref: list[int],
                           h_s: int) -> TimeExpandedEncoding:
    """Rebuild the encoding (fresh model) pruned to the reachability spheres."""
    return encode_time_expanded(
        encoding.graph, encoding.starts, encoding.goals, encoding.horizon,
        reachability=encoding.reachability, robot=encoding.robot,
        keep=sphere_filter(encoding.graph, ref, h_s, encoding.horizon),
        flow_units=encoding.flow_units)


def encode_k_colored(graph: Graph, starts, goals, T: int,
                     model: IpModel | None = None, robot: int | None = None,
                     reachability: str = REACH_BOTH) -> TimeExpandedEncoding:
    """Shared variable copy for m interchangeable robots: m^2 feedback edges
    over all (start, goal) pairs with their sum fixed to m."""
    group = len(tuple(starts))
    return encode_time_expanded(graph, starts, goals, T, reachability=reachability,
                                model=model, robot=robot, flow_units=group)


# --- model assembly -----------------------------------------------------------

@dataclass
class MppModel:
    model: IpModel
    T: int
    encodings: list[TimeExpandedEncoding]
    robots_of: list[tuple[int, ...]]           # robot ids handled by each encoding
    true_goal_fb: dict[int, int]               # robot -> its true-goal feedback var


def build_mpp_model(instance: MppInstance, T: int, config: MppConfig | None = None,
                    refs: list[list[int]] | None = None,
                    pruned: bool = True) -> MppModel:
    """Assemble the full IP: per-robot path encodings, collision rows, and for
    partial instances the at-least-k side constraint plus the goal-count
    objective."""
    config = config or MppConfig()
    refs = refs if refs is not None else reference_paths(instance)
    graph = instance.graph
    n = instance.robot_count
    partial = instance.k < n
    if partial and instance.groups:
        raise InstanceError("partial solutions with k-colored groups are not supported")

    model = IpModel(f"mpp-T{T}")
    encodings: list[TimeExpandedEncoding] = []
    robots_of: list[tuple[int, ...]] = []
    group_of = {r: tuple(g) for g in instance.groups for r in g}
    built: set[int] = set()
    for r in range(n):
        if r in built:
            continue
        robots = group_of.get(r, (r,))
        built.update(robots)
        starts = [instance.starts[i] for i in robots]
        if partial:
            if config.flexible_mode == FLEX_ANYWHERE:
                goals: list[int] = list(range(graph.vertex_count))
            else:
                ball = graph.bfs_distances([instance.goals[r]])
                goals = [v for v in range(graph.vertex_count)
                         if ball[v] != UNREACHABLE and ball[v] <= config.neighborhood_radius]
        else:
            goals = sorted({instance.goals[i] for i in robots})
        keep = None
        if pruned and config.heuristic and len(robots) == 1:
            if config.heuristic == TUBE:
                keep = tube_filter(graph, refs[r], config.h)
            elif config.heuristic == SPHERE:
                keep = sphere_filter(graph, refs[r], config.h, T)
            else:
                raise InstanceError(f"unknown heuristic {config.heuristic!r}")
        enc = encode_time_expanded(graph, starts, goals, T,
                                   reachability=config.reachability, model=model,
                                   robot=r + 1, keep=keep, flow_units=len(robots))
        encodings.append(enc)
        robots_of.append(robots)

    true_goal_fb: dict[int, int] = {}
    for enc, robots in zip(encodings, robots_of):
        for r in robots:
            vid = enc.feedback_vars.get((instance.goals[r], instance.starts[r]))
            if vid is not None:
                true_goal_fb[r] = vid

    _add_collision_rows(model, encodings, config.verbose_rows)

    if partial:
        if len(true_goal_fb) < instance.k:
            raise InfeasibleEncoding(
                f"only {len(true_goal_fb)} robots can reach their goals by T={T}")
        terms = [(1.0, vid) for _, vid in sorted(true_goal_fb.items())]
        model.add_constraint(terms, GE, float(instance.k))
        model.set_objective(MAX, terms)
    return MppModel(model, T, encodings, robots_of, true_goal_fb)


def _add_collision_rows(model: IpModel, encodings: list[TimeExpandedEncoding],
                        verbose: bool) -> None:
    """Vertex-occupancy rows (inflow per copy <= 1) and head-to-head edge rows.

    Solving mode emits a row only where two units of flow could actually meet;
    verbose mode emits every nonempty row, including the feedback-layer ones,
    mirroring the worked examples' layout.
    """
    if not encodings:
        return
    T = encodings[0].horizon
    graph = encodings[0].graph
    for t in range(T + 1):
        for v in range(graph.vertex_count):
            contrib = [(enc, enc.inflow(t, v)) for enc in encodings
                       if v in enc.kept[t]]
            contrib = [(enc, vids) for enc, vids in contrib if vids]
            if not contrib:
                continue
            needed = (len(contrib) >= 2
                      or any(enc.flow_units > 1 and len(vids) >= 2
                             for enc, vids in contrib))
            if verbose or needed:
                model.add_constraint(
                    [(1.0, vid) for _, vids in contrib for vid in vids], LE, 1.0)

    for t in range(0 if verbose else 1, T + 1):
        for vi in range(graph.vertex_count):
            for vj in (vi, *(w for w in graph.neighbors(vi) if w > vi)):
                fwd: list[tuple[TimeExpandedEncoding, int]] = []
                rev: list[tuple[TimeExpandedEncoding, int]] = []
                for enc in encodings:
                    if t == 0:
                        a = enc.feedback_vars.get((vi, vj))
                        b = enc.feedback_vars.get((vj, vi)) if vi != vj else None
                    else:
                        a = enc.edge_vars.get((t, vi, vj))
                        b = enc.edge_vars.get((t, vj, vi)) if vi != vj else None
                    if a is not None:
                        fwd.append((enc, a))
                    if b is not None:
                        rev.append((enc, b))
                if not fwd and not rev:
                    continue
                if not verbose:
                    crossing = any(e1 is not e2 for e1, _ in fwd for e2, _ in rev)
                    within = any(e1 is e2 and e1.flow_units > 1
                                 for e1, _ in fwd for e2, _ in rev)
                    if not crossing and not within:
                        continue
                model.add_constraint(
                    [(1.0, vid) for _, vid in (*fwd, *rev)], LE, 1.0)


# --- solving -------------------------------------------------------------------

def _trace_paths(built: MppModel, assignment) -> list[list[int]]:
    paths: dict[int, list[int]] = {}
    for enc, robots in zip(built.encodings, built.robots_of):
        for i, r in enumerate(robots):
            v = enc.starts[i]
            path = [v]
            for t in range(1, enc.horizon + 1):
                nxt = [w for w in (*enc.graph.neighbors(v), v)
                       if (vid := enc.edge_vars.get((t, v, w))) is not None
                       and assignment.get(vid, 0.0) > 0.5]
                if len(nxt) != 1:
                    raise InfeasibleEncoding(f"flow broken at copy ({t - 1}, {v})")
                v = nxt[0]
                path.append(v)
            paths[r] = path
    return [paths[r] for r in sorted(paths)]


def solve_mpp(instance: MppInstance, config: MppConfig | None = None) -> Solution:
    """Minimum-makespan collision-free routing of at least k robots."""
    config = config or MppConfig()
    start_time = time.monotonic()
    if instance.robot_count == 0:
        return Solution(paths=[], makespan=0, objective=0.0, status="optimal")
    refs = reference_paths(instance)
    t0 = underestimate_T(instance, refs)
    if config.max_T < t0:
        raise InstanceError(f"max_T={config.max_T} below the lower bound {t0}")

    nodes = 0.0
    iterations = 0.0
    for T in range(t0, config.max_T + 1):
        attempts = [True]
        if config.heuristic and config.fallback_to_exact:
            attempts.append(False)
        for pruned in attempts:
            if not pruned and config.heuristic is None:
                continue
            try:
                built = build_mpp_model(instance, T, config, refs, pruned=pruned)
            except InfeasibleEncoding:
                continue
            out = check_feasibility(built.model, config.solver)
            nodes += out.stats.get("nodes", 0)
            iterations += out.stats.get("simplex_iterations", 0)
            if out.status == "timeout":
                return Solution(status="timeout",
                                stats=_mpp_stats(built, nodes, iterations, start_time,
                                                 lower_bound=T))
            if out.feasible:
                sol = Solution(paths=_trace_paths(built, out.assignment),
                               makespan=T,
                               objective=float(T),
                               status="optimal",
                               stats=_mpp_stats(built, nodes, iterations, start_time))
                return sol
    return Solution(status="timeout",
                    stats={"nodes": nodes, "simplex_iterations": iterations,
                           "wall_time": time.monotonic() - start_time,
                           "lower_bound": config.max_T + 1})


def _mpp_stats(built: MppModel, nodes: float, iterations: float, start_time: float,
               lower_bound: int | None = None) -> dict[str, float]:
    stats = {"variable_count": built.model.variable_count,
             "constraint_count": built.model.constraint_count,
             "nodes": nodes,
             "simplex_iterations": iterations,
             "wall_time": time.monotonic() - start_time}
    if lower_bound is not None:
        stats["lower_bound"] = lower_bound
    return stats


def count_mpp_variables(instance: MppInstance, T: int,
                        config: MppConfig | None = None, pruned: bool = True) -> int:
    """Variable count of the (possibly pruned) model without assembling rows."""
    config = config or MppConfig()
    built = build_mpp_model(instance, T, config, pruned=pruned)
    return built.model.variable_count

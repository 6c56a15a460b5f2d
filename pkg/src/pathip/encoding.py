"""Path encodings over IP models: base-graph and time-expanded-graph flavors.

Base-graph encoding: one binary per directed edge; degree constraints force a
single non-cyclic start-goal path, optionally with Miller-Tucker-Zemlin-style
order variables that exclude disjoint subtours.

Time-expanded encoding: layered copies V^0..V^T with movement edges between
adjacent layers (neighbors plus a self-wait), closed by feedback edges from
goal copies at layer T back to start copies at layer 0. Feasible 0/1 flows
correspond one-to-one with paths of length at most T+1. Reachability tests
drop copies no path can use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .graph import Graph, UNREACHABLE
from .model import EQ, GE, LE, IpModel

REACH_BOTH = "both"
REACH_START = "start"
REACH_OFF = "off"


class EncodingError(ValueError):
    pass


class InfeasibleEncoding(EncodingError):
    """No surviving copy at a required layer; the model would be trivially infeasible."""


def _edge_name(robot: int | None, t: int | None, vi, vj) -> str:
    parts = [] if robot is None else [f"[{robot}]"]
    if t is not None:
        parts.append(f"[{t}]")
    return "x" + "".join(parts) + f"[{vi}][{vj}]"


# --- base-graph encoding ----------------------------------------------------

@dataclass
class BaseEncoding:
    model: IpModel
    graph: Graph
    start: int
    goal: int
    robot: int | None
    edge_vars: dict[tuple[int, int], int]   # directed (vi, vj) -> variable id
    order_vars: dict[int, int]              # vertex -> order variable id (subtour mode)


def encode_base(graph: Graph, start: int, goal: int, subtour_elimination: bool = False,
                model: IpModel | None = None, robot: int | None = None) -> BaseEncoding:
    """Single non-cyclic start-goal path on the original edge set.

    Emits, in order: one-outgoing-at-start / one-incoming-at-goal rows, the
    zero rows banning entering the start or leaving the goal, and per
    non-terminal vertex an out=in balance row plus an in<=1 row. With
    subtour elimination on, integer order variables in [3, |V|] and the
    pairwise rows over existing directed edges between non-terminals are
    added; graphs with |V| <= 3 have no room for a disjoint cycle and skip
    them.
    """
    if start == goal:
        raise EncodingError("start equals goal: split the vertex first (split_start_goal)")
    model = model or IpModel("base-encoding")
    edge_vars: dict[tuple[int, int], int] = {}
    for u, v in graph.sorted_edges():
        edge_vars[(u, v)] = model.add_binary(_edge_name(robot, None, u, v))
        edge_vars[(v, u)] = model.add_binary(_edge_name(robot, None, v, u))

    def out_of(v):
        return [edge_vars[(v, w)] for w in graph.neighbors(v)]

    def into(v):
        return [edge_vars[(w, v)] for w in graph.neighbors(v)]

    model.add_constraint([(1.0, e) for e in out_of(start)], EQ, 1.0)
    model.add_constraint([(1.0, e) for e in into(goal)], EQ, 1.0)
    model.add_constraint([(1.0, e) for e in into(start)], EQ, 0.0)
    model.add_constraint([(1.0, e) for e in out_of(goal)], EQ, 0.0)
    interior = [v for v in range(graph.vertex_count) if v not in (start, goal)]
    for v in interior:
        model.add_constraint([(1.0, e) for e in out_of(v)]
                             + [(-1.0, e) for e in into(v)], EQ, 0.0)
        model.add_constraint([(1.0, e) for e in into(v)], LE, 1.0)

    order_vars: dict[int, int] = {}
    if subtour_elimination and graph.vertex_count > 3:
        n = graph.vertex_count
        for v in interior:
            order_vars[v] = model.add_integer(3, n, f"u[{v}]")
        coef = float(n - 3)
        for vi in interior:
            for vj in graph.neighbors(vi):
                if vj in (start, goal):
                    continue
                # u_i - u_j + 1 <= (|V|-3)(1 - x_ij)
                model.add_constraint(
                    [(1.0, order_vars[vi]), (-1.0, order_vars[vj]),
                     (coef, edge_vars[(vi, vj)])], LE, coef - 1.0)
    return BaseEncoding(model, graph, start, goal, robot, edge_vars, order_vars)


@dataclass
class SplitGraph:
    """Start==goal helper: x split into v_out (reuses x's id) and v_in (new last id)."""

    graph: Graph
    original_vertex: int
    v_out: int
    v_in: int

    def to_original(self, path: Sequence[int]) -> list[int]:
        """Map a v_out..v_in path back to a cycle through the split vertex."""
        if len(path) < 3 or path[0] != self.v_out or path[-1] != self.v_in:
            raise EncodingError("expected a v_out..v_in path with nonempty interior")
        x = self.original_vertex
        return [x, *path[1:-1], x]


def split_start_goal(graph: Graph, x: int) -> SplitGraph:
    """Split x into v_out/v_in, both adjacent to N(x); acyclic v_out-v_in paths
    in the new graph correspond to cycles through x in the original."""
    v_in = graph.vertex_count
    edges = [e for e in graph.sorted_edges() if x not in e]
    for w in graph.neighbors(x):
        edges.append((x, w))       # x keeps its id and plays v_out
        edges.append((w, v_in))
    return SplitGraph(Graph.from_edges(graph.vertex_count + 1, edges,
                                       require_connected=False),
                      x, x, v_in)


# --- time-expanded encoding --------------------------------------------------

KeepFilter = Callable[[int, int], bool]


def kept_layers(graph: Graph, starts: Sequence[int], goals: Sequence[int], T: int,
                reachability: str = REACH_BOTH,
                keep: KeepFilter | None = None) -> list[set[int]]:
    """Surviving copies per layer: (t,v) kept iff dist(starts,v) <= t and,
    unless goal-side filtering is off, dist(v,goals) <= T-t; an extra keep
    predicate (heuristic pruning) intersects."""
    if T < 0:
        raise EncodingError("horizon must be nonnegative")
    if reachability not in (REACH_BOTH, REACH_START, REACH_OFF):
        raise EncodingError(f"unknown reachability mode {reachability!r}")
    d_start = graph.bfs_distances(starts)
    d_goal = graph.bfs_distances(goals)
    layers: list[set[int]] = []
    for t in range(T + 1):
        layer = set()
        for v in range(graph.vertex_count):
            if reachability in (REACH_BOTH, REACH_START):
                if d_start[v] == UNREACHABLE or d_start[v] > t:
                    continue
            if reachability == REACH_BOTH:
                if d_goal[v] == UNREACHABLE or d_goal[v] > T - t:
                    continue
            if keep is not None and not keep(t, v):
                continue
            layer.add(v)
        layers.append(layer)
    return layers


@dataclass
class TimeExpandedEncoding:
    model: IpModel
    graph: Graph
    horizon: int
    robot: int | None
    starts: tuple[int, ...]
    goals: tuple[int, ...]
    kept: list[set[int]]
    edge_vars: dict[tuple[int, int, int], int]   # (t, vi, vj): edge (t-1,vi)->(t,vj)
    feedback_vars: dict[tuple[int, int], int]    # (goal, start) -> variable id
    reachability: str = REACH_BOTH
    flow_units: int = 1

    def inflow(self, t: int, v: int) -> list[int]:
        """Variables of edges entering copy (t, v); feedback edges at t=0."""
        if t == 0:
            return [vid for (g, s), vid in self.feedback_vars.items() if s == v]
        return [vid for u in (*self.graph.neighbors(v), v)
                if (vid := self.edge_vars.get((t, u, v))) is not None]

    def outflow(self, t: int, v: int) -> list[int]:
        """Variables of edges leaving copy (t, v); feedback edges at t=T."""
        if t == self.horizon:
            return [vid for (g, s), vid in self.feedback_vars.items() if g == v]
        return [vid for u in (*self.graph.neighbors(v), v)
                if (vid := self.edge_vars.get((t + 1, v, u))) is not None]


def encode_time_expanded(graph: Graph, starts: Sequence[int], goals: Sequence[int],
                         T: int, reachability: str | bool = REACH_BOTH,
                         model: IpModel | None = None, robot: int | None = None,
                         keep: KeepFilter | None = None,
                         flow_units: int = 1) -> TimeExpandedEncoding:
    """Layered path encoding with feedback edges for every (goal, start) pair.

    Emits one feedback variable per (start, goal) pair surviving the layer
    filters, the feedback-sum row, and flow conservation at every kept copy.
    Raises InfeasibleEncoding when a required layer dies out.

    flow_units > 1 turns the encoding into a shared copy for that many
    interchangeable robots (one unit of circulation each).
    """
    if isinstance(reachability, bool):
        reachability = REACH_BOTH if reachability else REACH_OFF
    starts = tuple(dict.fromkeys(starts))
    goals = tuple(dict.fromkeys(goals))
    if not starts or not goals:
        raise EncodingError("need at least one start and one goal")
    kept = kept_layers(graph, starts, goals, T, reachability, keep)
    if any(not layer for layer in kept):
        dead = next(t for t, layer in enumerate(kept) if not layer)
        raise InfeasibleEncoding(f"no copies survive at layer {dead}")
    live_starts = [s for s in starts if s in kept[0]]
    live_goals = [g for g in goals if g in kept[T]]
    if not live_starts or not live_goals:
        raise InfeasibleEncoding("no start/goal copy survives filtering")

    model = model or IpModel("time-expanded")
    feedback_vars: dict[tuple[int, int], int] = {}
    for g in sorted(live_goals):
        for s in sorted(live_starts):
            feedback_vars[(g, s)] = model.add_binary(_edge_name(robot, 0, g, s))
    edge_vars: dict[tuple[int, int, int], int] = {}
    for t in range(1, T + 1):
        for vi in sorted(kept[t - 1]):
            for vj in (*graph.neighbors(vi), vi):
                if vj in kept[t]:
                    edge_vars[(t, vi, vj)] = model.add_binary(_edge_name(robot, t, vi, vj))

    enc = TimeExpandedEncoding(model, graph, T, robot, starts, goals, kept,
                               edge_vars, feedback_vars, reachability, flow_units)
    model.add_constraint([(1.0, vid) for vid in feedback_vars.values()],
                         EQ, float(flow_units))
    for t in range(T + 1):
        for v in sorted(kept[t]):
            terms = [(1.0, vid) for vid in enc.outflow(t, v)]
            terms += [(-1.0, vid) for vid in enc.inflow(t, v)]
            merged = {}
            for coef, vid in terms:
                merged[vid] = merged.get(vid, 0.0) + coef
            if any(c != 0.0 for c in merged.values()):
                model.add_constraint(terms, EQ, 0.0)
    return enc


# --- assignments <-> paths ---------------------------------------------------

def _value(assignment, vid: int) -> float:
    if isinstance(assignment, Mapping):
        return float(assignment.get(vid, 0.0))
    return float(assignment[vid])


def extract_path(encoding, assignment) -> list[int]:
    """Follow positive edge variables from the start; defensive about flow errors."""
    if isinstance(encoding, BaseEncoding):
        return _extract_base(encoding, assignment)
    return _extract_expanded(encoding, assignment)


def _extract_base(enc: BaseEncoding, assignment) -> list[int]:
    path = [enc.start]
    seen = {enc.start}
    v = enc.start
    while v != enc.goal:
        nxt = [w for w in enc.graph.neighbors(v)
               if _value(assignment, enc.edge_vars[(v, w)]) > 0.5]
        if len(nxt) != 1:
            raise EncodingError(f"flow conservation violated at vertex {v}")
        v = nxt[0]
        if v in seen:
            raise EncodingError(f"assignment revisits vertex {v}")
        seen.add(v)
        path.append(v)
    return path


def _extract_expanded(enc: TimeExpandedEncoding, assignment) -> list[int]:
    active = [(g, s) for (g, s), vid in enc.feedback_vars.items()
              if _value(assignment, vid) > 0.5]
    if len(active) != 1:
        raise EncodingError(f"expected one active feedback edge, found {len(active)}")
    goal, start = active[0]
    path = [start]
    v = start
    for t in range(1, enc.horizon + 1):
        nxt = [w for w in (*enc.graph.neighbors(v), v)
               if (vid := enc.edge_vars.get((t, v, w))) is not None
               and _value(assignment, vid) > 0.5]
        if len(nxt) != 1:
            raise EncodingError(f"flow conservation violated at copy ({t - 1}, {v})")
        v = nxt[0]
        path.append(v)
    if v != goal:
        raise EncodingError(f"path ends at {v} but feedback edge claims {goal}")
    return path


def encode_assignment(encoding, path: Sequence[int]) -> dict[int, int]:
    """Assignment using exactly the edges of `path` (inverse of extract_path)."""
    if isinstance(encoding, BaseEncoding):
        if len(set(path)) != len(path):
            raise EncodingError("base encoding admits non-cyclic paths only")
        if path[0] != encoding.start or path[-1] != encoding.goal:
            raise EncodingError("path endpoints do not match the encoding")
        values = dict.fromkeys(encoding.edge_vars.values(), 0)
        for a, b in zip(path, path[1:]):
            if (a, b) not in encoding.edge_vars:
                raise EncodingError(f"({a},{b}) is not a graph edge")
            values[encoding.edge_vars[(a, b)]] = 1
        if encoding.order_vars:
            for v, vid in encoding.order_vars.items():
                values[vid] = 3
            rank = 3
            for v in path[1:-1]:
                values[encoding.order_vars[v]] = rank
                rank += 1
        return values

    enc: TimeExpandedEncoding = encoding
    if len(path) != enc.horizon + 1:
        raise EncodingError(f"path length {len(path)} does not match horizon {enc.horizon}")
    values = dict.fromkeys(enc.feedback_vars.values(), 0)
    values.update(dict.fromkeys(enc.edge_vars.values(), 0))
    key = (path[-1], path[0])
    if key not in enc.feedback_vars:
        raise EncodingError(f"no feedback edge for goal {path[-1]} / start {path[0]}")
    values[enc.feedback_vars[key]] = 1
    for t, (a, b) in enumerate(zip(path, path[1:]), start=1):
        if (t, a, b) not in enc.edge_vars:
            raise EncodingError(f"movement edge ({t},{a},{b}) was pruned or invalid")
        values[enc.edge_vars[(t, a, b)]] = 1
    return values

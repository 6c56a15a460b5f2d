"""Multi-robot minimum constraint removal over the region graph.

Vertices with identical obstacle membership collapse into connected regions;
each robot gets a base-graph path encoding on the region graph (no subtour
elimination: detours never lower the objective), indicator constraints tie
traversed regions to the obstacles containing them, and the objective counts
removed obstacles.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .encoding import BaseEncoding, encode_base
from .graph import UNREACHABLE, Graph
from .instances import MmcrInstance, Solution
from .model import GE, MAX, MIN, IpModel
from .solver import SolveConfig, SolverError, solve


@dataclass
class RegionGraph:
    regions: list[frozenset[int]]            # partition of V, each connected in G
    graph: Graph                             # one vertex per region
    vertex_to_region: list[int]
    region_obstacles: list[frozenset[int]]   # obstacle indices covering each region


def build_region_graph(graph: Graph, obstacles, seed: int | None = None) -> RegionGraph:
    """Group connected vertices sharing the same obstacle membership.

    The BFS exploration order may be randomized (matching the construction's
    description); the result is canonicalized by ordering regions on their
    minimum vertex, so any seed yields the same partition and labels.
    """
    signature = [frozenset(i for i, o in enumerate(obstacles) if v in o)
                 for v in range(graph.vertex_count)]
    order = list(range(graph.vertex_count))
    if seed is not None:
        random.Random(seed).shuffle(order)
    region_of = [UNREACHABLE] * graph.vertex_count
    raw_regions: list[set[int]] = []
    for v0 in order:
        if region_of[v0] != UNREACHABLE:
            continue
        rid = len(raw_regions)
        members = {v0}
        region_of[v0] = rid
        queue = [v0]
        while queue:
            v = queue.pop()
            for w in graph.neighbors(v):
                if region_of[w] == UNREACHABLE and signature[w] == signature[v0]:
                    region_of[w] = rid
                    members.add(w)
                    queue.append(w)
        raw_regions.append(members)

    rank = sorted(range(len(raw_regions)), key=lambda r: min(raw_regions[r]))
    relabel = {old: new for new, old in enumerate(rank)}
    regions = [frozenset(raw_regions[old]) for old in rank]
    vertex_to_region = [relabel[r] for r in region_of]
    edges = {(min(a, b), max(a, b))
             for u, v in graph.edges
             for a, b in [(vertex_to_region[u], vertex_to_region[v])] if a != b}
    rgraph = Graph.from_edges(len(regions), edges)
    return RegionGraph(regions, rgraph, vertex_to_region,
                       [signature[min(r)] for r in regions])


def vertex_region_graph(graph: Graph, obstacles) -> RegionGraph:
    """Degenerate region graph with one region per vertex (models built on G
    directly; the region abstraction must give the same optimum)."""
    signature = [frozenset(i for i, o in enumerate(obstacles) if v in o)
                 for v in range(graph.vertex_count)]
    return RegionGraph([frozenset([v]) for v in range(graph.vertex_count)],
                       graph, list(range(graph.vertex_count)), signature)


@dataclass
class MmcrModel:
    model: IpModel
    region_graph: RegionGraph
    encodings: list[BaseEncoding | None]     # None for short-circuited robots
    region_vars: list[int]
    obstacle_vars: list[int]
    forced: frozenset[int]


def build_mmcr_model(instance: MmcrInstance, region_graph: RegionGraph | None = None) -> MmcrModel:
    """Region-graph IP: per-robot base encodings, region and obstacle
    indicators, removed-obstacle-count objective."""
    rg = region_graph or build_region_graph(instance.graph, instance.obstacles)
    n = instance.robot_count
    model = IpModel("mmcr")
    forced: set[int] = set()
    terminals = []
    for r in range(n):
        sreg = rg.vertex_to_region[instance.starts[r]]
        greg = rg.vertex_to_region[instance.goals[r]]
        forced |= rg.region_obstacles[sreg] | rg.region_obstacles[greg]
        terminals.append((sreg, greg))

    encodings: list[BaseEncoding | None] = []
    for r, (sreg, greg) in enumerate(terminals):
        if sreg == greg:
            # trivially solved robot: only its own region's obstacles matter
            encodings.append(None)
        else:
            encodings.append(encode_base(rg.graph, sreg, greg,
                                         subtour_elimination=False,
                                         model=model, robot=r + 1))

    region_vars = [model.add_binary(f"xV[{i}]") for i in range(len(rg.regions))]
    obstacle_vars = [model.add_binary(f"xO[{i}]") for i in range(len(instance.obstacles))]

    active = [e for e in encodings if e is not None]
    for i in range(len(rg.regions)):
        terms = [(float(2 * len(active) * rg.graph.degree(i)), region_vars[i])]
        for enc in active:
            for j in rg.graph.neighbors(i):
                terms.append((-1.0, enc.edge_vars[(i, j)]))
                terms.append((-1.0, enc.edge_vars[(j, i)]))
        if len(terms) > 1:
            model.add_constraint(terms, GE, 0.0)
    for o in range(len(instance.obstacles)):
        inside = [i for i in range(len(rg.regions)) if o in rg.region_obstacles[i]]
        if inside:
            terms = [(float(len(inside)), obstacle_vars[o])]
            terms += [(-1.0, region_vars[i]) for i in inside]
            model.add_constraint(terms, GE, 0.0)
    for o in sorted(forced):
        model.fix_variable(obstacle_vars[o], 1.0)
    model.set_objective(MIN, [(1.0, v) for v in obstacle_vars])
    return MmcrModel(model, rg, encodings, region_vars, obstacle_vars,
                     frozenset(forced))


def extract_witness_paths(instance: MmcrInstance, removed) -> list[list[int]]:
    """Per-robot BFS paths in G avoiding every kept obstacle's vertices."""
    blocked: set[int] = set()
    for i, obs in enumerate(instance.obstacles):
        if i not in removed:
            blocked.update(obs)
    paths = []
    for s, g in zip(instance.starts, instance.goals):
        path = instance.graph.shortest_path(s, g, blocked)
        if path is None:
            raise ValueError(f"no witness path from {s} to {g}: removal set not valid")
        paths.append(path)
    return paths


def solve_mmcr(instance: MmcrInstance, config: SolveConfig | None = None,
               use_regions: bool = True) -> Solution:
    """Minimum-cardinality obstacle removal connecting every robot.

    Depth-first node order by default: these models have weak LP bounds, so
    reaching integral incumbents early prunes far better than best-bound.
    """
    start_time = time.monotonic()
    rg = (build_region_graph(instance.graph, instance.obstacles) if use_regions
          else vertex_region_graph(instance.graph, instance.obstacles))
    built = build_mmcr_model(instance, rg)
    if config is None:
        config = SolveConfig(node_order="depth-first")
    if all(e is None for e in built.encodings):
        removed = built.forced
        status = "optimal"
        stats = {"variable_count": 0, "constraint_count": 0, "nodes": 0,
                 "simplex_iterations": 0}
    else:
        out = solve(built.model, config)
        if not out.feasible:
            raise SolverError(f"mmcr model unexpectedly {out.status}")
        removed = frozenset(o for o, vid in enumerate(built.obstacle_vars)
                            if out.assignment.get(vid, 0.0) > 0.5)
        status = out.status
        stats = {"variable_count": built.model.variable_count,
                 "constraint_count": built.model.constraint_count,
                 **out.stats}
    paths = extract_witness_paths(instance, removed)
    stats["wall_time"] = time.monotonic() - start_time
    return Solution(paths=paths, removed_obstacles=removed,
                    objective=float(len(removed)), status=status, stats=stats)

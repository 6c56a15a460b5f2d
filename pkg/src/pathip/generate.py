"""Seeded random instance generators (grid worlds, as in the experiments)."""

from __future__ import annotations

import random

from .graph import Graph, grid_graph
from .instances import (InstanceError, MmcrInstance, MppInstance,
                        ProblemInstance, RcpInstance, make_mmcr, make_mpp,
                        make_rcp)

_MAX_RESAMPLES = 1000


def _removed_cells(rng: random.Random, rows: int, cols: int, removal: float) -> list[int]:
    """Remove the requested fraction of cells, resampling until the free
    space stays connected."""
    cells = rows * cols
    count = int(removal * cells)
    if cells - count <= 0:
        raise InstanceError(f"removal {removal} leaves no free cells")
    for _ in range(_MAX_RESAMPLES):
        removed = rng.sample(range(cells), count)
        try:
            grid_graph(rows, cols, removed)
        except Exception:
            continue
        return removed
    raise InstanceError(f"could not find a connected {rows}x{cols} grid "
                        f"with {count} cells removed")


def generate_mpp(rows: int, cols: int, n: int, removal: float = 0.0,
                 k: int | None = None, seed: int = 0) -> MppInstance:
    rng = random.Random(seed)
    removed = _removed_cells(rng, rows, cols, removal) if removal else []
    graph, _ = grid_graph(rows, cols, removed)
    if 2 * n > 2 * graph.vertex_count or n > graph.vertex_count:
        raise InstanceError(f"{n} robots do not fit in {graph.vertex_count} free cells")
    starts = rng.sample(range(graph.vertex_count), n)
    goals = rng.sample(range(graph.vertex_count), n)
    return make_mpp(graph, starts, goals, k)


def generate_mmcr(rows: int, cols: int, n: int, obstacle_count: int,
                  seed: int = 0, max_side: int = 4) -> MmcrInstance:
    rng = random.Random(seed)
    graph, _ = grid_graph(rows, cols)
    obstacles = []
    for _ in range(obstacle_count):
        r0 = rng.randrange(rows)
        c0 = rng.randrange(cols)
        h = rng.randint(1, max_side)
        w = rng.randint(1, max_side)
        obstacles.append([r * cols + c
                          for r in range(r0, min(rows, r0 + h))
                          for c in range(c0, min(cols, c0 + w))])
    starts = rng.sample(range(graph.vertex_count), n)
    goals = rng.sample(range(graph.vertex_count), n)
    return make_mmcr(graph, starts, goals, obstacles)


def generate_rcp(rows: int, cols: int, variant: str, budget: float,
                 seed: int = 0, start_count: int = 2) -> RcpInstance:
    """Unit-cost grid with uniform-random rewards or rates in (0, 1]."""
    rng = random.Random(seed)
    graph, _ = grid_graph(rows, cols)
    costs = {e: 1.0 for e in graph.sorted_edges()}
    starts = rng.sample(range(graph.vertex_count), min(start_count, graph.vertex_count))
    weights = [round(1.0 - rng.random(), 9) for _ in range(graph.vertex_count)]
    if variant == "qcop":
        return make_rcp(graph, costs, budget, starts, list(range(graph.vertex_count)),
                        "qcop", rewards=weights)
    if variant == "otp":
        return make_rcp(graph, costs, budget, starts, starts, "otp", rates=weights)
    raise InstanceError(f"unknown RCP variant {variant!r}")


def generate_instance(problem: str, rows: int, cols: int, n: int = 0,
                      removal: float = 0.0, obstacle_count: int = 0,
                      budget: float = 0.0, k: int | None = None,
                      seed: int = 0) -> ProblemInstance:
    if problem == "mpp":
        return generate_mpp(rows, cols, n, removal, k, seed)
    if problem == "mmcr":
        return generate_mmcr(rows, cols, n, obstacle_count, seed)
    if problem in ("qcop", "otp"):
        return generate_rcp(rows, cols, problem, budget, seed)
    raise InstanceError(f"unknown problem kind {problem!r}")

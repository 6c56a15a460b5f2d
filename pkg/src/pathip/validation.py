"""Solution validators and reward/cost evaluators; all pure functions."""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import Graph, is_valid_path
from .instances import MmcrInstance, MppInstance, RcpInstance, Solution


@dataclass
class Verdict:
    ok: bool
    violations: list[str] = field(default_factory=list)
    goals_reached: int = 0


def _goal_groups(instance: MppInstance) -> list[tuple[tuple[int, ...], set[int]]]:
    """(robot indices, goal set) per interchangeable group; singletons for the rest."""
    grouped: set[int] = set()
    out = []
    for g in instance.groups:
        out.append((tuple(g), {instance.goals[r] for r in g}))
        grouped.update(g)
    for r in range(instance.robot_count):
        if r not in grouped:
            out.append(((r,), {instance.goals[r]}))
    return out


def count_goals_reached(instance: MppInstance, finals: list[int]) -> int:
    """Robots ending on their goals; within a group goals count as a set."""
    total = 0
    for robots, goal_set in _goal_groups(instance):
        ends = [finals[r] for r in robots]
        # finals are pairwise distinct in a collision-free solution, so this
        # counts distinct covered goals
        total += len(set(ends) & goal_set)
    return total


def validate_mpp_solution(instance: MppInstance, sol: Solution) -> Verdict:
    """Check move validity, vertex collisions, edge swaps, and the k-goal condition.

    All violations are reported, not just the first.
    """
    v = Verdict(ok=True)
    n = instance.robot_count
    if len(sol.paths) != n:
        return Verdict(False, [f"expected {n} paths, got {len(sol.paths)}"])
    lengths = {len(p) for p in sol.paths}
    if len(lengths) != 1 or 0 in lengths:
        return Verdict(False, ["paths must be nonempty and share one length"])
    horizon = lengths.pop() - 1

    for r, path in enumerate(sol.paths):
        if path[0] != instance.starts[r]:
            v.violations.append(f"robot {r} starts at {path[0]}, not {instance.starts[r]}")
        if not is_valid_path(instance.graph, path):
            v.violations.append(f"robot {r} makes an invalid move")

    for t in range(horizon + 1):
        occupied: dict[int, int] = {}
        for r, path in enumerate(sol.paths):
            if path[t] in occupied:
                v.violations.append(
                    f"vertex collision at t={t}, vertex {path[t]}: "
                    f"robots {occupied[path[t]]} and {r}")
            occupied[path[t]] = r
    for t in range(1, horizon + 1):
        moves = {}
        for r, path in enumerate(sol.paths):
            if path[t - 1] != path[t]:
                moves[(path[t - 1], path[t])] = r
        for (a, b), r in moves.items():
            r2 = moves.get((b, a))
            if r2 is not None and r2 > r:
                v.violations.append(
                    f"edge swap at t={t} on ({a},{b}): robots {r} and {r2}")

    v.goals_reached = count_goals_reached(instance, [p[-1] for p in sol.paths])
    if v.goals_reached < instance.k:
        v.violations.append(
            f"only {v.goals_reached} robots at goals, need k={instance.k}")
    v.ok = not v.violations
    return v


def validate_mmcr_solution(instance: MmcrInstance, sol: Solution) -> Verdict:
    """Each robot must have a start-goal path avoiding all kept obstacles (by BFS)."""
    removed = sol.removed_obstacles or frozenset()
    bad = [i for i in removed if not 0 <= i < len(instance.obstacles)]
    if bad:
        return Verdict(False, [f"removed obstacle indices out of range: {sorted(bad)}"])
    blocked: set[int] = set()
    for i, obstacle in enumerate(instance.obstacles):
        if i not in removed:
            blocked.update(obstacle)
    v = Verdict(ok=True)
    for r in range(instance.robot_count):
        if instance.graph.shortest_path(instance.starts[r], instance.goals[r], blocked) is None:
            v.violations.append(f"robot {r} blocked: no path outside kept obstacles")
            break
    v.ok = not v.violations
    return v


@dataclass(frozen=True)
class RcpValue:
    reward: float
    cost: float


def qcop_reward(graph: Graph, rewards, visited: set[int]) -> float:
    """Full reward for visited vertices plus partial rewards from unvisited
    neighbors, weighted 1/|N(j)| and granted once per (visited i, unvisited j)
    ordered pair."""
    total = sum(rewards[i] for i in visited)
    for i in visited:
        for j in graph.neighbors(i):
            if j not in visited:
                total += rewards[j] / graph.degree(j)
    return total


def evaluate_rcp(instance: RcpInstance, path: list[int],
                 dwell: dict[int, float] | None = None) -> RcpValue:
    """Reward and cost of a walk (plus dwell times for OTP)."""
    if not is_valid_path(instance.graph, path):
        raise ValueError(f"path {path} invalid in graph")
    visited = set(path)
    move_cost = sum(instance.cost(a, b) for a, b in zip(path, path[1:]))
    dwell = dwell or {}
    for v, t in dwell.items():
        if t < 0:
            raise ValueError(f"negative dwell at vertex {v}")
        if t > 0 and v not in visited:
            raise ValueError(f"dwell {t} at unvisited vertex {v}")
    if instance.variant == "qcop":
        return RcpValue(qcop_reward(instance.graph, instance.rewards, visited), move_cost)
    reward = sum(instance.rates[v] * t for v, t in dwell.items())
    return RcpValue(reward, move_cost + sum(dwell.values()))

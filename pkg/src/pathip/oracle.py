"""Brute-force ground-truth solvers for tests and acceptance.

Deliberately naive: joint-state breadth-first search for MPP, obstacle-subset
enumeration for MMCR, exhaustive walk enumeration for RCP. Shares only the
graph/instance layer with the IP pipeline so bugs cannot correlate.
"""

from __future__ import annotations

from itertools import combinations

from .graph import UNREACHABLE
from .instances import MmcrInstance, MppInstance, RcpInstance
from .validation import count_goals_reached, qcop_reward


class OracleLimitError(RuntimeError):
    """State space or enumeration budget exceeded."""


def mpp_oracle(instance: MppInstance, max_T: int,
               state_cap: int = 1_000_000) -> int | None:
    """Optimal makespan by BFS over joint robot configurations, or None if no
    solution exists within max_T steps."""
    n = instance.robot_count
    if n == 0:
        return 0
    graph = instance.graph
    start = tuple(instance.starts)

    def reaches_goal(state) -> bool:
        return count_goals_reached(instance, list(state)) >= instance.k

    if reaches_goal(start):
        return 0
    seen = {start}
    frontier = [start]
    for T in range(1, max_T + 1):
        next_frontier = []
        for state in frontier:
            for succ in _joint_moves(graph, state):
                if succ not in seen:
                    seen.add(succ)
                    if len(seen) > state_cap:
                        raise OracleLimitError(f"joint state cap {state_cap} exceeded")
                    next_frontier.append(succ)
                    if reaches_goal(succ):
                        return T
        if not next_frontier:
            return None
        frontier = next_frontier
    return None


def _joint_moves(graph, state):
    """All simultaneous successor configurations without vertex or swap collisions."""
    n = len(state)
    out: list[tuple[int, ...]] = []
    partial: list[int] = []

    def rec(i: int):
        if i == n:
            out.append(tuple(partial))
            return
        here = state[i]
        for nxt in (here, *graph.neighbors(here)):
            if nxt in partial:
                continue  # vertex collision with an already-moved robot
            collision = False
            for j in range(i):
                if partial[j] == here and state[j] == nxt and nxt != here:
                    collision = True  # head-to-head swap on an edge
                    break
            if collision:
                continue
            partial.append(nxt)
            rec(i + 1)
            partial.pop()

    rec(0)
    return out


def mmcr_oracle(instance: MmcrInstance, obstacle_cap: int = 15) -> int:
    """Minimum number of removed obstacles, by ascending-cardinality subset
    enumeration with per-robot connectivity checks."""
    m = len(instance.obstacles)
    if m > obstacle_cap:
        raise OracleLimitError(f"{m} obstacles exceed the oracle cap {obstacle_cap}")
    graph = instance.graph

    def routable(removed: set[int]) -> bool:
        blocked: set[int] = set()
        for i, obs in enumerate(instance.obstacles):
            if i not in removed:
                blocked.update(obs)
        for s, g in zip(instance.starts, instance.goals):
            if s in blocked or g in blocked:
                return False
            dist = graph.bfs_distances([s], blocked)
            if dist[g] == UNREACHABLE:
                return False
        return True

    for size in range(m + 1):
        for removed in combinations(range(m), size):
            if routable(set(removed)):
                return size
    return m


def rcp_oracle(instance: RcpInstance, T: int,
               expansion_cap: int = 5_000_000) -> float:
    """Optimal reward over all budget-feasible walks of at most T moves.

    OTP dwell is allocated in closed form: every unit of budget slack goes to
    the highest-rate visited vertex, exact for linear dwell rewards.
    """
    graph = instance.graph
    goals = set(instance.goal_set)
    budget = instance.budget
    best = float("-inf")
    expansions = 0

    def otp_value(visited: frozenset[int], cost: float) -> float:
        return (budget - cost) * max(instance.rates[v] for v in visited)

    def dfs(entry: int, v: int, moves_left: int, cost: float, visited: frozenset[int]):
        nonlocal best, expansions
        expansions += 1
        if expansions > expansion_cap:
            raise OracleLimitError(f"walk enumeration cap {expansion_cap} exceeded")
        if instance.variant == "qcop":
            if v in goals:
                best = max(best, qcop_reward(graph, instance.rewards, set(visited)))
        elif v == entry:
            best = max(best, otp_value(visited, cost))
        if moves_left == 0:
            return
        for w in graph.neighbors(v):
            c = cost + instance.cost(v, w)
            if c <= budget + 1e-12:
                dfs(entry, w, moves_left - 1, c, visited | {w})

    for s in instance.start_set:
        dfs(s, s, T, 0.0, frozenset([s]))
    return best

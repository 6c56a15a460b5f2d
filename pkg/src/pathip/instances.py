"""Problem instances, solutions, and their structured-text document format.

The document format is line oriented and diff friendly: scalar and vector
fields sit on one `key value...` line, list-of-list fields (`edges`,
`groups`, `obstacles`, `edge_costs`) open a block terminated by `end`.
Blank lines and `#` comments are ignored. Vertices are 0-based integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, TextIO, Union

from .graph import Graph, GraphError

PROBLEM_KINDS = ("mpp", "mmcr", "qcop", "otp")


class ParseError(ValueError):
    """Malformed instance/solution document; message carries the line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class InstanceError(ValueError):
    """A structurally valid document describing an invalid instance."""


@dataclass(frozen=True)
class MppInstance:
    graph: Graph
    starts: tuple[int, ...]
    goals: tuple[int, ...]
    k: int
    groups: tuple[tuple[int, ...], ...] = ()

    problem = "mpp"

    @property
    def robot_count(self) -> int:
        return len(self.starts)


@dataclass(frozen=True)
class MmcrInstance:
    graph: Graph
    starts: tuple[int, ...]
    goals: tuple[int, ...]
    obstacles: tuple[frozenset[int], ...]

    problem = "mmcr"

    @property
    def robot_count(self) -> int:
        return len(self.starts)


@dataclass(frozen=True)
class RcpInstance:
    graph: Graph
    edge_costs: dict[tuple[int, int], float] = field(hash=False)
    budget: float = 0.0
    start_set: tuple[int, ...] = ()
    goal_set: tuple[int, ...] = ()
    variant: str = "qcop"
    rewards: tuple[float, ...] = ()   # qcop: reward r_i per vertex
    rates: tuple[float, ...] = ()     # otp: linear dwell reward rate a_i per vertex

    @property
    def problem(self) -> str:
        return self.variant

    def cost(self, u: int, v: int) -> float:
        if u == v:
            return 0.0
        return self.edge_costs[(min(u, v), max(u, v))]


ProblemInstance = Union[MppInstance, MmcrInstance, RcpInstance]


@dataclass
class Solution:
    """Solver output shared by all three problem layers; unused fields stay None."""

    paths: list[list[int]] = field(default_factory=list)
    makespan: int | None = None
    removed_obstacles: frozenset[int] | None = None
    reward: float | None = None
    dwell_times: dict[int, float] | None = None
    objective: float | None = None
    status: str = "optimal"
    stats: dict[str, float] = field(default_factory=dict)


def _validate_terminals(graph: Graph, starts: Sequence[int], goals: Sequence[int]) -> None:
    n = len(starts)
    if len(goals) != n:
        raise InstanceError(f"{n} starts but {len(goals)} goals")
    if n == 0:
        return
    for name, vs in (("start", starts), ("goal", goals)):
        for v in vs:
            if not 0 <= v < graph.vertex_count:
                raise InstanceError(f"{name} vertex {v} out of range")
    if len(set(starts)) != n:
        raise InstanceError("starts not pairwise distinct")
    if len(set(goals)) != n:
        raise InstanceError("goals not pairwise distinct")


def make_mpp(graph: Graph, starts: Sequence[int], goals: Sequence[int], k: int | None = None,
             groups: Sequence[Sequence[int]] = ()) -> MppInstance:
    _validate_terminals(graph, starts, goals)
    n = len(starts)
    if k is None:
        k = n
    if not (1 <= k <= n or k == n == 0):
        raise InstanceError(f"k={k} outside 1..{n}")
    seen: set[int] = set()
    for group in groups:
        for r in group:
            if not 0 <= r < n:
                raise InstanceError(f"group robot index {r} out of range")
            if r in seen:
                raise InstanceError(f"robot {r} in more than one group")
            seen.add(r)
    return MppInstance(graph, tuple(starts), tuple(goals), k,
                       tuple(tuple(g) for g in groups))


def make_mmcr(graph: Graph, starts: Sequence[int], goals: Sequence[int],
              obstacles: Sequence[Sequence[int]]) -> MmcrInstance:
    _validate_terminals(graph, starts, goals)
    obs = []
    for i, o in enumerate(obstacles):
        if not o:
            raise InstanceError(f"obstacle {i} is empty")
        for v in o:
            if not 0 <= v < graph.vertex_count:
                raise InstanceError(f"obstacle {i} vertex {v} out of range")
        obs.append(frozenset(o))
    return MmcrInstance(graph, tuple(starts), tuple(goals), tuple(obs))


def make_rcp(graph: Graph, edge_costs: dict[tuple[int, int], float], budget: float,
             start_set: Sequence[int], goal_set: Sequence[int], variant: str,
             rewards: Sequence[float] = (), rates: Sequence[float] = ()) -> RcpInstance:
    if variant not in ("qcop", "otp"):
        raise InstanceError(f"unknown RCP variant {variant!r}")
    costs: dict[tuple[int, int], float] = {}
    for (u, v), c in edge_costs.items():
        if c < 0:
            raise InstanceError(f"negative cost on edge ({u},{v})")
        costs[(min(u, v), max(u, v))] = float(c)
    for u, v in graph.sorted_edges():
        if (u, v) not in costs:
            raise InstanceError(f"missing cost for edge ({u},{v})")
    if budget < 0:
        raise InstanceError("negative budget")
    if not start_set:
        raise InstanceError("empty start set")
    if not goal_set:
        raise InstanceError("empty goal set")
    for v in (*start_set, *goal_set):
        if not 0 <= v < graph.vertex_count:
            raise InstanceError(f"terminal vertex {v} out of range")
    if variant == "qcop":
        if len(rewards) != graph.vertex_count:
            raise InstanceError("rewards must list one value per vertex")
        if any(r < 0 for r in rewards):
            raise InstanceError("negative reward")
    else:
        if len(rates) != graph.vertex_count:
            raise InstanceError("rates must list one value per vertex")
        if any(a < 0 for a in rates):
            raise InstanceError("negative rate")
        if sorted(set(start_set)) != sorted(set(goal_set)):
            raise InstanceError("otp requires start set == goal set")
    return RcpInstance(graph, costs, float(budget), tuple(start_set), tuple(goal_set),
                       variant, tuple(float(r) for r in rewards),
                       tuple(float(a) for a in rates))


# --- document parsing -------------------------------------------------------

_BLOCK_KEYS = ("edges", "groups", "obstacles", "edge_costs")


def _tokenize(text: str):
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line_no, line.split()


def _parse_fields(text: str) -> dict[str, object]:
    fields: dict[str, object] = {}
    block_key: str | None = None
    block_line = 0
    for line_no, tokens in _tokenize(text):
        if block_key is not None:
            if tokens == ["end"]:
                block_key = None
                continue
            fields[block_key].append((line_no, tokens))  # type: ignore[union-attr]
            continue
        key = tokens[0]
        if key in fields:
            raise ParseError(line_no, f"duplicate field {key!r}")
        if key in _BLOCK_KEYS:
            if len(tokens) != 1:
                raise ParseError(line_no, f"{key!r} opens a block; no inline values")
            fields[key] = []
            block_key = key
            block_line = line_no
        else:
            fields[key] = (line_no, tokens[1:])
    if block_key is not None:
        raise ParseError(block_line, f"unterminated {block_key!r} block")
    return fields


def _ints(line_no: int, tokens: list[str], key: str) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(line_no, f"field {key!r}: expected integers, got {tokens}") from None


def _floats(line_no: int, tokens: list[str], key: str) -> list[float]:
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise ParseError(line_no, f"field {key!r}: expected numbers, got {tokens}") from None


def load_instance(text: str) -> ProblemInstance:
    """Parse and validate an instance document.

    Raises ParseError for malformed documents (with line numbers) and
    InstanceError/GraphError naming the violated invariant otherwise.
    """
    fields = _parse_fields(text)

    def take(key, required=True):
        if key not in fields:
            if required:
                raise ParseError(0, f"missing field {key!r}")
            return None
        return fields.pop(key)

    line_no, tokens = take("problem")
    if len(tokens) != 1 or tokens[0] not in PROBLEM_KINDS:
        raise ParseError(line_no, f"problem must be one of {PROBLEM_KINDS}")
    problem = tokens[0]

    line_no, tokens = take("vertices")
    if len(tokens) != 1:
        raise ParseError(line_no, "vertices takes a single count")
    vertex_count = _ints(line_no, tokens, "vertices")[0]
    if vertex_count <= 0:
        raise ParseError(line_no, "vertex count must be positive")

    edge_rows = take("edges")
    edges = []
    for line_no, tokens in edge_rows:
        vals = _ints(line_no, tokens, "edges")
        if len(vals) != 2:
            raise ParseError(line_no, "edge lines are 'u v' pairs")
        edges.append((vals[0], vals[1]))
    try:
        graph = Graph.from_edges(vertex_count, edges)
    except GraphError:
        raise

    def vertex_list(key, required=True):
        row = take(key, required)
        if row is None:
            return None
        line_no, tokens = row
        return _ints(line_no, tokens, key)

    if problem == "mpp":
        starts = vertex_list("starts")
        goals = vertex_list("goals")
        row = take("k", required=False)
        k = _ints(*row, "k")[0] if row else None
        groups = [_ints(ln, t, "groups") for ln, t in (take("groups", False) or [])]
        instance: ProblemInstance = make_mpp(graph, starts, goals, k, groups)
    elif problem == "mmcr":
        starts = vertex_list("starts")
        goals = vertex_list("goals")
        obstacles = [_ints(ln, t, "obstacles") for ln, t in take("obstacles")]
        instance = make_mmcr(graph, starts, goals, obstacles)
    else:
        start_set = vertex_list("starts")
        goal_set = vertex_list("goals")
        line_no, tokens = take("budget")
        budget = _floats(line_no, tokens, "budget")[0]
        costs = {}
        for line_no, tokens in take("edge_costs"):
            if len(tokens) != 3:
                raise ParseError(line_no, "edge_costs lines are 'u v cost' triples")
            u, v = _ints(line_no, tokens[:2], "edge_costs")
            costs[(u, v)] = _floats(line_no, tokens[2:], "edge_costs")[0]
        rewards = rates = ()
        if problem == "qcop":
            row = take("rewards")
            rewards = _floats(*row, "rewards")
        else:
            row = take("rates")
            rates = _floats(*row, "rates")
        instance = make_rcp(graph, costs, budget, start_set, goal_set, problem,
                            rewards, rates)

    if fields:
        line_no = min(v[0][0] if isinstance(v, list) else v[0] for v in fields.values())
        raise ParseError(line_no, f"unexpected fields for {problem}: {sorted(fields)}")
    return instance


def save_instance(instance: ProblemInstance) -> str:
    """Serialize an instance; load_instance(save_instance(x)) == x."""
    lines = [f"problem {instance.problem}", f"vertices {instance.graph.vertex_count}"]
    lines.append("edges")
    lines.extend(f"{u} {v}" for u, v in instance.graph.sorted_edges())
    lines.append("end")
    if isinstance(instance, (MppInstance, MmcrInstance)):
        lines.append("starts " + " ".join(map(str, instance.starts)))
        lines.append("goals " + " ".join(map(str, instance.goals)))
    if isinstance(instance, MppInstance):
        lines.append(f"k {instance.k}")
        if instance.groups:
            lines.append("groups")
            lines.extend(" ".join(map(str, g)) for g in instance.groups)
            lines.append("end")
    elif isinstance(instance, MmcrInstance):
        lines.append("obstacles")
        lines.extend(" ".join(map(str, sorted(o))) for o in instance.obstacles)
        lines.append("end")
    else:
        lines.append("starts " + " ".join(map(str, instance.start_set)))
        lines.append("goals " + " ".join(map(str, instance.goal_set)))
        lines.append(f"budget {instance.budget!r}")
        lines.append("edge_costs")
        lines.extend(f"{u} {v} {c!r}" for (u, v), c in sorted(instance.edge_costs.items()))
        lines.append("end")
        if instance.variant == "qcop":
            lines.append("rewards " + " ".join(repr(r) for r in instance.rewards))
        else:
            lines.append("rates " + " ".join(repr(a) for a in instance.rates))
    return "\n".join(lines) + "\n"


def save_solution(solution: Solution, problem: str) -> str:
    lines = [f"solution {problem}", f"status {solution.status}"]
    if solution.makespan is not None:
        lines.append(f"makespan {solution.makespan}")
    for r, path in enumerate(solution.paths):
        lines.append(f"path {r} " + " ".join(map(str, path)))
    if solution.removed_obstacles is not None:
        lines.append("removed " + " ".join(map(str, sorted(solution.removed_obstacles))))
    if solution.reward is not None:
        lines.append(f"reward {solution.reward!r}")
    if solution.dwell_times:
        for v in sorted(solution.dwell_times):
            lines.append(f"dwell {v} {solution.dwell_times[v]!r}")
    if solution.objective is not None:
        lines.append(f"objective {solution.objective!r}")
    for key in sorted(solution.stats):
        lines.append(f"stat {key} {solution.stats[key]!r}")
    return "\n".join(lines) + "\n"


def load_solution(text: str) -> tuple[Solution, str]:
    """Parse a solution document; returns (solution, problem kind)."""
    sol = Solution()
    problem = ""
    paths: dict[int, list[int]] = {}
    for line_no, tokens in _tokenize(text):
        key, rest = tokens[0], tokens[1:]
        if key == "solution":
            if len(rest) != 1 or rest[0] not in PROBLEM_KINDS:
                raise ParseError(line_no, f"solution kind must be one of {PROBLEM_KINDS}")
            problem = rest[0]
        elif key == "status":
            sol.status = rest[0]
        elif key == "makespan":
            sol.makespan = _ints(line_no, rest, key)[0]
        elif key == "path":
            vals = _ints(line_no, rest, key)
            paths[vals[0]] = vals[1:]
        elif key == "removed":
            sol.removed_obstacles = frozenset(_ints(line_no, rest, key))
        elif key == "reward":
            sol.reward = _floats(line_no, rest, key)[0]
        elif key == "dwell":
            v = _ints(line_no, rest[:1], key)[0]
            sol.dwell_times = sol.dwell_times or {}
            sol.dwell_times[v] = _floats(line_no, rest[1:], key)[0]
        elif key == "objective":
            sol.objective = _floats(line_no, rest, key)[0]
        elif key == "stat":
            sol.stats[rest[0]] = float(rest[1])
        else:
            raise ParseError(line_no, f"unknown solution field {key!r}")
    if not problem:
        raise ParseError(0, "missing 'solution' header")
    if paths:
        sol.paths = [paths[r] for r in sorted(paths)]
        if sorted(paths) != list(range(len(paths))):
            raise ParseError(0, "path robot indices must be 0..n-1")
    if problem == "mmcr" and sol.removed_obstacles is None:
        sol.removed_obstacles = frozenset()
    return sol, problem


def read_instance(f: TextIO) -> ProblemInstance:
    return load_instance(f.read())

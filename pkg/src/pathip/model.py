"""Integer-programming model container: variables, linear constraints, and a
linear+quadratic objective, with McCormick linearization of binary products."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

BINARY = "binary"
INTEGER = "integer"
CONTINUOUS = "continuous"

LE, EQ, GE = "<=", "=", ">="
_SENSES = (LE, EQ, GE)

MIN, MAX = "min", "max"


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Variable:
    id: int
    kind: str
    lower: float
    upper: float
    name: str

    @property
    def is_integer(self) -> bool:
        return self.kind in (BINARY, INTEGER)


@dataclass(frozen=True)
class LinearConstraint:
    id: int
    terms: tuple[tuple[float, int], ...]  # (coefficient, variable id), ids unique
    sense: str
    rhs: float

    def activity(self, assignment: Sequence[float]) -> float:
        return sum(c * assignment[v] for c, v in self.terms)

    def satisfied(self, assignment: Sequence[float], tol: float = 1e-9) -> bool:
        a = self.activity(assignment)
        if self.sense == LE:
            return a <= self.rhs + tol
        if self.sense == GE:
            return a >= self.rhs - tol
        return abs(a - self.rhs) <= tol


@dataclass
class Objective:
    sense: str = MIN
    linear: dict[int, float] = field(default_factory=dict)
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)  # i <= j

    def value(self, assignment: Sequence[float]) -> float:
        total = sum(c * assignment[v] for v, c in self.linear.items())
        total += sum(c * assignment[i] * assignment[j]
                     for (i, j), c in self.quadratic.items())
        return total


class IpModel:
    """Mutable while being built; treat as immutable once handed to a solver."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[LinearConstraint] = []
        self.objective = Objective()
        self._names: dict[str, int] = {}

    # --- variables -----------------------------------------------------

    def add_variable(self, kind: str, lower: float | None = None,
                     upper: float | None = None, name: str | None = None) -> int:
        if kind == BINARY:
            lower, upper = 0.0, 1.0
        else:
            if kind not in (INTEGER, CONTINUOUS):
                raise ModelError(f"unknown variable kind {kind!r}")
            if lower is None or upper is None:
                raise ModelError(f"{kind} variable requires explicit bounds")
            if not (math.isfinite(lower) and math.isfinite(upper)):
                raise ModelError(f"{kind} variable requires finite bounds")
            if lower > upper:
                raise ModelError(f"lower bound {lower} > upper bound {upper}")
            if kind == INTEGER and (lower, upper) == (0.0, 1.0):
                kind = BINARY
        vid = len(self.variables)
        if name is None:
            name = f"v{vid}"
        if name in self._names:
            raise ModelError(f"duplicate variable name {name!r}")
        self._names[name] = vid
        self.variables.append(Variable(vid, kind, float(lower), float(upper), name))
        return vid

    def add_binary(self, name: str | None = None) -> int:
        return self.add_variable(BINARY, name=name)

    def add_integer(self, lower: float, upper: float, name: str | None = None) -> int:
        return self.add_variable(INTEGER, lower, upper, name)

    def add_continuous(self, lower: float, upper: float, name: str | None = None) -> int:
        return self.add_variable(CONTINUOUS, lower, upper, name)

    def var_by_name(self, name: str) -> Variable:
        return self.variables[self._names[name]]

    def fix_variable(self, vid: int, value: float) -> None:
        v = self.variables[vid]
        if not v.lower - 1e-12 <= value <= v.upper + 1e-12:
            raise ModelError(f"cannot fix {v.name} to {value} outside [{v.lower},{v.upper}]")
        self.variables[vid] = Variable(v.id, v.kind, value, value, v.name)

    # --- constraints and objective --------------------------------------

    def _merge(self, terms: Iterable[tuple[float, int]]) -> tuple[tuple[float, int], ...]:
        merged: dict[int, float] = {}
        for coef, vid in terms:
            if not 0 <= vid < len(self.variables):
                raise ModelError(f"unknown variable id {vid}")
            merged[vid] = merged.get(vid, 0.0) + float(coef)
        return tuple((c, v) for v, c in sorted(merged.items()) if c != 0.0)

    def add_constraint(self, terms: Iterable[tuple[float, int]], sense: str,
                       rhs: float) -> int:
        if sense not in _SENSES:
            raise ModelError(f"unknown sense {sense!r}")
        cid = len(self.constraints)
        self.constraints.append(
            LinearConstraint(cid, self._merge(terms), sense, float(rhs)))
        return cid

    def set_objective(self, sense: str,
                      linear: Iterable[tuple[float, int]] = (),
                      quadratic: Iterable[tuple[float, int, int]] = ()) -> None:
        if sense not in (MIN, MAX):
            raise ModelError(f"objective sense must be {MIN!r} or {MAX!r}")
        obj = Objective(sense)
        for coef, vid in linear:
            if not 0 <= vid < len(self.variables):
                raise ModelError(f"unknown variable id {vid}")
            obj.linear[vid] = obj.linear.get(vid, 0.0) + float(coef)
        for coef, i, j in quadratic:
            for vid in (i, j):
                if not 0 <= vid < len(self.variables):
                    raise ModelError(f"unknown variable id {vid}")
                if self.variables[vid].kind != BINARY:
                    raise ModelError(
                        f"quadratic term over non-binary variable "
                        f"{self.variables[vid].name}")
            key = (min(i, j), max(i, j))
            obj.quadratic[key] = obj.quadratic.get(key, 0.0) + float(coef)
        obj.linear = {v: c for v, c in obj.linear.items() if c != 0.0}
        obj.quadratic = {k: c for k, c in obj.quadratic.items() if c != 0.0}
        self.objective = obj

    # --- queries ---------------------------------------------------------

    @property
    def variable_count(self) -> int:
        return len(self.variables)

    @property
    def constraint_count(self) -> int:
        return len(self.constraints)

    def is_pure_linear(self) -> bool:
        return not self.objective.quadratic

    def objective_value(self, assignment: Sequence[float]) -> float:
        return self.objective.value(assignment)

    def is_feasible(self, assignment: Sequence[float], tol: float = 1e-9) -> bool:
        for v in self.variables:
            x = assignment[v.id]
            if not v.lower - tol <= x <= v.upper + tol:
                return False
            if v.is_integer and abs(x - round(x)) > tol:
                return False
        return all(c.satisfied(assignment, tol) for c in self.constraints)

    # --- linearization ---------------------------------------------------

    def linearize(self) -> "IpModel":
        """Replace binary products x_i*x_j with fresh binaries y constrained by
        y <= x_i, y <= x_j, y >= x_i + x_j - 1; identity when already linear.

        A squared binary collapses to the variable itself.
        """
        if self.is_pure_linear():
            return self
        out = IpModel(self.name)
        out.variables = list(self.variables)
        out.constraints = list(self.constraints)
        out._names = dict(self._names)
        linear = dict(self.objective.linear)
        for (i, j), coef in sorted(self.objective.quadratic.items()):
            if i == j:
                linear[i] = linear.get(i, 0.0) + coef
                continue
            y = out.add_binary(f"y[{self.variables[i].name}][{self.variables[j].name}]")
            out.add_constraint([(1.0, y), (-1.0, i)], LE, 0.0)
            out.add_constraint([(1.0, y), (-1.0, j)], LE, 0.0)
            out.add_constraint([(1.0, y), (-1.0, i), (-1.0, j)], GE, -1.0)
            linear[y] = linear.get(y, 0.0) + coef
        out.objective = Objective(self.objective.sense,
                                  {v: c for v, c in linear.items() if c != 0.0}, {})
        return out

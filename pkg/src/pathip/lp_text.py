"""LP-style plain-text export/import of pure-linear models.

Grammar (a restricted CPLEX-LP dialect; see README for the full description):

    Minimize|Maximize
     obj: [+-] coef name [+-] coef name ...
    Subject To
     cname: terms <=|=|>= rhs
    Bounds
     lb <= name <= ub
    Generals
     name ...
    Binaries
     name ...
    End

Tokens are whitespace separated; `\\` starts a comment line. Coefficients may
be omitted when 1. Variable names must not start with a digit or sign and must
not contain whitespace or the characters + - < > = :
"""

from __future__ import annotations

from .model import BINARY, CONTINUOUS, EQ, GE, INTEGER, LE, MAX, MIN, IpModel, ModelError

_FORBIDDEN = set("+-<>=:")


def _check_name(name: str) -> str:
    if not name or name[0].isdigit() or name[0] in "+-." or _FORBIDDEN & set(name):
        raise ModelError(f"variable name {name!r} not representable in LP text")
    return name


def _fmt(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() and abs(x) < 1e15 else repr(x)


def _terms_text(terms) -> str:
    parts = []
    for coef, name in terms:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        if parts or sign == "-":
            parts.append(sign)
        parts.append(name if mag == 1 else f"{_fmt(mag)} {name}")
    return " ".join(parts) if parts else "0 " + terms_placeholder()


def terms_placeholder() -> str:
    return "__zero__"


def write_lp(model: IpModel) -> str:
    """Serialize a pure-linear model; raises on quadratic objectives."""
    if not model.is_pure_linear():
        raise ModelError("quadratic objective: linearize before export")
    names = [_check_name(v.name) for v in model.variables]
    lines = [f"\\ {model.name}"]
    lines.append("Maximize" if model.objective.sense == MAX else "Minimize")
    obj_terms = [(c, names[v]) for v, c in sorted(model.objective.linear.items())]
    lines.append(" obj: " + _terms_text(obj_terms))
    lines.append("Subject To")
    for c in model.constraints:
        terms = [(coef, names[v]) for coef, v in c.terms]
        lines.append(f" c{c.id}: {_terms_text(terms)} {c.sense} {_fmt(c.rhs)}")
    lines.append("Bounds")
    for v in model.variables:
        if v.kind != BINARY:
            lines.append(f" {_fmt(v.lower)} <= {v.name} <= {_fmt(v.upper)}")
    generals = [v.name for v in model.variables if v.kind == INTEGER]
    if generals:
        lines.append("Generals")
        lines.append(" " + " ".join(generals))
    binaries = [v.name for v in model.variables if v.kind == BINARY]
    if binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(binaries))
    lines.append("End")
    return "\n".join(lines) + "\n"


class _Tokens:
    def __init__(self, text: str):
        self.items: list[str] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("\\"):
                continue
            # split relational operators out even when glued to operands
            for op in ("<=", ">=", "="):
                line = line.replace(op, f" {op} ")
            line = line.replace("> =", ">=").replace("< =", "<=")
            self.items.extend(line.split())
        self.pos = 0

    def peek(self) -> str | None:
        return self.items[self.pos] if self.pos < len(self.items) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ModelError("unexpected end of LP text")
        self.pos += 1
        return tok


_SECTIONS = {"subject", "st", "s.t.", "bounds", "generals", "general",
             "binaries", "binary", "end"}


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def _parse_terms(toks: _Tokens) -> list[tuple[float, str]]:
    terms: list[tuple[float, str]] = []
    sign = 1.0
    pending: float | None = None
    while True:
        tok = toks.peek()
        if tok is None or tok in ("<=", ">=", "=") or tok.lower() in _SECTIONS:
            if pending is not None:
                raise ModelError("dangling coefficient in LP terms")
            return terms
        toks.next()
        if tok == "+":
            sign = 1.0
        elif tok == "-":
            sign = -1.0 if sign > 0 else 1.0
        elif _is_number(tok):
            if pending is not None:
                raise ModelError(f"two coefficients in a row near {tok!r}")
            pending = float(tok)
        else:
            coef = sign * (1.0 if pending is None else pending)
            if tok != terms_placeholder():
                terms.append((coef, tok))
            sign, pending = 1.0, None


def parse_lp(text: str) -> IpModel:
    """Parse LP text back into an IpModel (inverse of write_lp on its output)."""
    toks = _Tokens(text)
    head = toks.next().lower()
    if head not in ("minimize", "maximize", "min", "max"):
        raise ModelError(f"LP text must start with Minimize/Maximize, got {head!r}")
    sense = MAX if head.startswith("max") else MIN

    label = toks.next()
    if not label.endswith(":"):
        raise ModelError("objective requires a 'name:' label")
    obj_terms = _parse_terms(toks)

    tok = toks.next().lower()
    if tok == "subject":
        if toks.next().lower() != "to":
            raise ModelError("expected 'Subject To'")
    elif tok not in ("st", "s.t."):
        raise ModelError("expected constraint section")

    rows: list[tuple[list[tuple[float, str]], str, float]] = []
    bounds: dict[str, tuple[float, float]] = {}
    integers: set[str] = set()
    binaries: set[str] = set()
    section = "rows"
    while True:
        tok = toks.peek()
        if tok is None:
            break
        low = tok.lower()
        if low == "end":
            toks.next()
            break
        if low in ("bounds", "generals", "general", "binaries", "binary"):
            toks.next()
            section = "bounds" if low == "bounds" else ("generals" if low.startswith("g") else "binaries")
            continue
        if section == "rows":
            label = toks.next()
            if not label.endswith(":"):
                raise ModelError(f"constraint requires a 'name:' label, got {label!r}")
            terms = _parse_terms(toks)
            op = toks.next()
            if op not in ("<=", ">=", "="):
                raise ModelError(f"expected relation, got {op!r}")
            rhs = float(toks.next())
            rows.append((terms, {"<=": LE, ">=": GE, "=": EQ}[op], rhs))
        elif section == "bounds":
            lo = float(toks.next())
            if toks.next() != "<=":
                raise ModelError("bounds lines are 'lb <= name <= ub'")
            name = toks.next()
            if toks.next() != "<=":
                raise ModelError("bounds lines are 'lb <= name <= ub'")
            hi = float(toks.next())
            bounds[name] = (lo, hi)
        elif section == "generals":
            integers.add(toks.next())
        else:
            binaries.add(toks.next())

    model = IpModel("parsed")
    order: list[str] = []
    seen: set[str] = set()
    for _, name in obj_terms:
        if name not in seen:
            order.append(name)
            seen.add(name)
    for terms, _, _ in rows:
        for _, name in terms:
            if name not in seen:
                order.append(name)
                seen.add(name)
    for name in (*bounds, *sorted(integers), *sorted(binaries)):
        if name not in seen:
            order.append(name)
            seen.add(name)

    ids: dict[str, int] = {}
    for name in order:
        if name in binaries and name not in bounds:
            ids[name] = model.add_binary(name)
            continue
        lo, hi = bounds.get(name, (0.0, float("inf")))
        kind = INTEGER if (name in integers or name in binaries) else CONTINUOUS
        ids[name] = model.add_variable(kind, lo, hi, name)
    for terms, sense_op, rhs in rows:
        model.add_constraint([(c, ids[n]) for c, n in terms], sense_op, rhs)
    model.set_objective(sense, [(c, ids[n]) for c, n in obj_terms])
    return model

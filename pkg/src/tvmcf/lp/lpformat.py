"""Reader and writer for the CPLEX-style ``.lp`` text dialect.

Only the subset this package emits is supported: one linear objective,
linear constraints, finite bounds and a ``Binaries`` section.
"""

from __future__ import annotations

import math
import re

from .model import BINARY, CONTINUOUS, EQ, GE, LE, MAXIMIZE, MINIMIZE, LinearProgram, ModelError

_NAME_RE = re.compile(r"^[A-Za-z!\"#$%&()/,;?@_`'{}|~][A-Za-z0-9!\"#$%&()/,.;?@_`'{}|~]*$")
_EXPONENT_LIKE = re.compile(r"^[eE][0-9.+\-eE]*$")
_KEYWORDS = {
    "max", "maximize", "maximise", "maximum", "min", "minimize", "minimise", "minimum",
    "st", "s.t.", "subject", "such", "bounds", "bound", "binary", "binaries", "bin",
    "general", "generals", "gen", "end", "free", "inf", "infinity",
}
_LINE_WIDTH = 250


class LPNameError(ModelError):
    """A variable or constraint name cannot be written in the LP dialect."""


def check_name(name: str) -> None:
    if len(name) > 255 or not _NAME_RE.match(name) or _EXPONENT_LIKE.match(name) \
            or name.lower() in _KEYWORDS:
        raise LPNameError(f"name {name!r} is not representable in LP format")


def _num(x: float) -> str:
    if x == 0:
        return "0"
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _expr(terms, names) -> list[str]:
    out = []
    for k, (j, a) in enumerate(terms):
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        body = names[j] if mag == 1 else f"{_num(mag)} {names[j]}"
        if k == 0:
            out.append(body if sign == "+" else f"- {body}")
        else:
            out.append(f"{sign} {body}")
    return out


def _wrap(head: str, tokens: list[str]) -> list[str]:
    lines, cur = [], head
    for tok in tokens:
        if len(cur) + 1 + len(tok) > _LINE_WIDTH and cur.strip():
            lines.append(cur)
            cur = "   " + tok
        else:
            cur = f"{cur} {tok}" if cur else tok
    lines.append(cur)
    return lines


def export_lp_text(lp: LinearProgram) -> str:
    """Render ``lp`` as LP-format text (deterministic, LF line endings)."""
    lp.validate()
    names = [v.name for v in lp.variables]
    for name in names:
        check_name(name)
    for con in lp.constraints:
        check_name(con.name)

    lines = ["Maximize" if lp.direction == MAXIMIZE else "Minimize"]
    obj_terms = sorted(lp.objective.items())
    if not obj_terms and names:
        obj_terms = [(0, 0.0)]
    if obj_terms and obj_terms[0][1] == 0.0:
        lines.append(f" obj: 0 {names[obj_terms[0][0]]}")
    else:
        lines.extend(_wrap(" obj:", _expr(obj_terms, names)))
    if lp.constraints:
        lines.append("Subject To")
        for con in lp.constraints:
            terms = sorted(con.coeffs.items())
            toks = _expr(terms, names) if terms else [f"0 {names[0]}"]
            toks += [con.sense, _num(con.rhs)]
            lines.extend(_wrap(f" {con.name}:", toks))
    if lp.variables:
        lines.append("Bounds")
        for v in lp.variables:
            if v.lb == v.ub:
                lines.append(f" {v.name} = {_num(v.lb)}")
            else:
                lines.append(f" {_num(v.lb)} <= {v.name} <= {_num(v.ub)}")
    bins = [v.name for v in lp.variables if v.kind == BINARY]
    if bins:
        lines.append("Binaries")
        lines.extend(" " + line for line in _wrap("", bins))
    lines.append("End")
    return "\n".join(lines) + "\n"


_TOKEN = re.compile(
    r"\s*(?:(?P<num>[0-9]*\.?[0-9]+(?:[eE][+\-]?[0-9]+)?|[0-9]+\.)"
    r"|(?P<op><=|>=|=<|=>|<|>|=)"
    r"|(?P<sign>[+\-])"
    r"|(?P<colon>:)"
    r"|(?P<name>[A-Za-z!\"#$%&()/,.;?@_`'{}|~\[\]][A-Za-z0-9!\"#$%&()/,.;?@_`'{}|~\[\]]*))"
)

_SECTION = {
    "maximize": "obj", "maximise": "obj", "maximum": "obj", "max": "obj",
    "minimize": "obj", "minimise": "obj", "minimum": "obj", "min": "obj",
    "subject to": "st", "such that": "st", "st": "st", "s.t.": "st",
    "bounds": "bounds", "bound": "bounds",
    "binaries": "bin", "binary": "bin", "bin": "bin",
    "end": "end",
}


def _tokens(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ModelError(f"cannot tokenize LP text near {text[pos:pos + 20]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


def _parse_linear(toks):
    """Parse ``[name:] terms [op rhs]``; returns (label, terms, op, rhs)."""
    label = None
    if len(toks) >= 2 and toks[0][0] == "name" and toks[1][0] == "colon":
        label, toks = toks[0][1], toks[2:]
    terms: list[tuple[str, float]] = []
    op = rhs = None
    sign, coef = 1.0, None
    i = 0
    while i < len(toks):
        kind, val = toks[i]
        if kind == "sign":
            sign = -sign if val == "-" else sign
        elif kind == "num":
            coef = float(val)
        elif kind == "name":
            terms.append((val, sign * (1.0 if coef is None else coef)))
            sign, coef = 1.0, None
        elif kind == "op":
            op = {"=<": LE, "<": LE, "=>": GE, ">": GE}.get(val, val)
            rest = toks[i + 1:]
            rsign = 1.0
            for k, v in rest:
                if k == "sign":
                    rsign = -rsign if v == "-" else rsign
                elif k == "num":
                    rhs = rsign * float(v)
                elif k == "name" and v.lower() in ("inf", "infinity"):
                    rhs = rsign * math.inf
            break
        i += 1
    return label, terms, op, rhs


def read_lp_text(text: str) -> LinearProgram:
    """Parse LP text written by :func:`export_lp_text` back into a model."""
    sections: dict[str, list[str]] = {"obj": [], "st": [], "bounds": [], "bin": []}
    direction = MAXIMIZE
    current = None
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].rstrip()
        if not line.strip():
            continue
        key = line.strip().lower()
        if key in _SECTION and not raw.startswith(" "):
            current = _SECTION[key]
            if current == "obj":
                direction = MAXIMIZE if key.startswith("max") else MINIMIZE
            if current == "end":
                break
            continue
        if current is None:
            raise ModelError(f"LP text has content before any section: {line!r}")
        if raw.startswith("   ") and sections[current]:
            sections[current][-1] += " " + line.strip()
        else:
            sections[current].append(line.strip())

    order: list[str] = []
    bounds: dict[str, tuple[float, float]] = {}
    for line in sections["bounds"]:
        toks = _tokens(line)
        names = [v for k, v in toks if k == "name" and v.lower() not in ("inf", "infinity", "free")]
        if len(names) != 1:
            raise ModelError(f"bad bound line {line!r}")
        name = names[0]
        lo, hi = bounds.get(name, (0.0, math.inf))
        if any(v.lower() == "free" for k, v in toks if k == "name"):
            lo, hi = -math.inf, math.inf
        else:
            idx = next(i for i, (k, v) in enumerate(toks) if k == "name" and v == name)
            left, right = toks[:idx], toks[idx + 1:]
            if left:
                lo = _bound_value(left[:-1])
            if right:
                op = right[0][1]
                val = _bound_value(right[1:])
                if op == "=":
                    lo = hi = val
                elif op in ("<=", "=<", "<"):
                    hi = val
                else:
                    lo = val
            if left and right and right[0][1] not in ("<=", "=<", "<"):
                raise ModelError(f"bad bound line {line!r}")
        bounds[name] = (lo, hi)
        if name not in order:
            order.append(name)
    binaries = {tok for line in sections["bin"] for tok in line.split()}

    obj_label, obj_terms, _, _ = _parse_linear(_tokens(" ".join(sections["obj"])))
    cons = []
    for line in sections["st"]:
        label, terms, op, rhs = _parse_linear(_tokens(line))
        if op is None or rhs is None:
            raise ModelError(f"constraint without sense or rhs: {line!r}")
        cons.append((label, terms, op, rhs))
    for _, terms, _, _ in [(None, obj_terms, None, None)] + cons:
        for name, _ in terms:
            if name not in order:
                order.append(name)
    for name in binaries:
        if name not in order:
            order.append(name)

    lp = LinearProgram()
    for name in order:
        kind = BINARY if name in binaries else CONTINUOUS
        lo, hi = bounds.get(name, (0.0, 1.0 if kind == BINARY else math.inf))
        lp.add_var(name, lo, hi, kind)
    lp.set_objective(_collect(lp, obj_terms), direction)
    for label, terms, op, rhs in cons:
        lp.add_constraint(_collect(lp, terms), op, rhs, label)
    return lp


def _bound_value(toks) -> float:
    sign = 1.0
    for k, v in toks:
        if k == "sign":
            sign = -sign if v == "-" else sign
        elif k == "num":
            return sign * float(v)
        elif k == "name" and v.lower() in ("inf", "infinity"):
            return sign * math.inf
    raise ModelError("missing bound value")


def _collect(lp: LinearProgram, terms) -> dict[int, float]:
    row: dict[int, float] = {}
    for name, a in terms:
        j = lp.index(name)
        row[j] = row.get(j, 0.0) + a
    return row

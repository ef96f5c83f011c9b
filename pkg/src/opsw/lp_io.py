"""LP text format export and import for :class:`~opsw.milp.MilpModel`.

The writer emits the standard CPLEX-style LP layout (objective, Subject To,
Bounds, Binaries) with model metadata as leading comments.  The reader parses
exactly the subset the writer produces, so ``export -> parse -> export`` is
byte-identical; this is what keeps golden LP files stable.

Coefficients are written with :func:`repr`, the shortest representation that
round-trips through ``float``.
"""

from __future__ import annotations

import re

from .milp import BINARY, CONTINUOUS, Constraint, MilpModel, Variable


class LpFormatError(ValueError):
    """Raised for models or files the LP subset cannot represent."""


def _terms_text(terms) -> str:
    parts = []
    for name, coeff in terms:
        if coeff == 0.0:
            continue
        sign = "-" if coeff < 0 else "+"
        parts.append(f"{sign} {repr(abs(coeff))} {name}")
    return " ".join(parts) if parts else "0"


def export_lp(m: MilpModel) -> str:
    """Model as LP text; errors on a model with no variables."""
    if not m.variables:
        raise LpFormatError("cannot export a model with no variables")
    lines = ["\\ opsw model"]
    for key, value in m.metadata:
        lines.append(f"\\ {key}: {value}")
    lines.append("Maximize")
    lines.append(f" obj: {_terms_text(m.objective)}")
    lines.append("Subject To")
    for c in m.constraints:
        sense = {"<=": "<=", ">=": ">=", "=": "="}[c.sense]
        lines.append(f" {c.name}: {_terms_text(c.terms)} {sense} {repr(c.rhs)}")
    lines.append("Bounds")
    for v in m.variables:
        if v.kind == CONTINUOUS:
            lines.append(f" {repr(v.lb)} <= {v.name} <= {repr(v.ub)}")
    lines.append("Binaries")
    binaries = [v.name for v in m.variables if v.kind == BINARY]
    if binaries:
        lines.append(" " + " ".join(binaries))
    lines.append("End")
    return "\n".join(lines) + "\n"


_TERM_RE = re.compile(r"([+-])\s+(\S+)\s+(\S+)")
_BOUND_RE = re.compile(r"^(\S+) <= (\S+) <= (\S+)$")


def _parse_terms(text: str) -> tuple[tuple[str, float], ...]:
    text = text.strip()
    if text == "0":
        return ()
    terms = []
    pos = 0
    for match in _TERM_RE.finditer(text):
        if match.start() != pos:
            raise LpFormatError(f"cannot parse expression near {text[pos:]!r}")
        sign, coeff_s, name = match.groups()
        coeff = float(coeff_s)
        terms.append((name, -coeff if sign == "-" else coeff))
        pos = match.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    if pos != len(text):
        raise LpFormatError(f"trailing junk in expression: {text[pos:]!r}")
    return tuple(terms)


def parse_lp(text: str) -> MilpModel:
    """Inverse of :func:`export_lp` for the subset it writes."""
    metadata: list[tuple[str, str]] = []
    objective: tuple[tuple[str, float], ...] = ()
    constraints: list[Constraint] = []
    continuous: list[Variable] = []
    binaries: list[str] = []
    section = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            body = line[1:].strip()
            if ":" in body:
                key, _, value = body.partition(":")
                metadata.append((key.strip(), value.strip()))
            continue
        lowered = line.lower()
        if lowered == "maximize":
            section = "objective"
            continue
        if lowered == "subject to":
            section = "constraints"
            continue
        if lowered == "bounds":
            section = "bounds"
            continue
        if lowered == "binaries":
            section = "binaries"
            continue
        if lowered == "end":
            section = None
            continue
        if section == "objective":
            _, _, expr = line.partition(":")
            objective = _parse_terms(expr)
        elif section == "constraints":
            name, sep, body = line.partition(":")
            if not sep:
                raise LpFormatError(f"constraint without name: {line!r}")
            match = re.match(r"^(.*?)\s*(<=|>=|=)\s*(\S+)$", body.strip())
            if not match:
                raise LpFormatError(f"cannot parse constraint: {line!r}")
            expr, sense, rhs = match.groups()
            constraints.append(Constraint(name.strip(), _parse_terms(expr), sense, float(rhs)))
        elif section == "bounds":
            match = _BOUND_RE.match(line)
            if not match:
                raise LpFormatError(f"cannot parse bound: {line!r}")
            lb, name, ub = match.groups()
            continuous.append(Variable(name, CONTINUOUS, float(lb), float(ub)))
        elif section == "binaries":
            binaries.extend(line.split())
        else:
            raise LpFormatError(f"unexpected line outside any section: {line!r}")

    variables = tuple(Variable(name, BINARY) for name in binaries) + tuple(continuous)
    if not variables:
        raise LpFormatError("LP file declares no variables")
    return MilpModel(variables, tuple(constraints), objective, tuple(metadata))

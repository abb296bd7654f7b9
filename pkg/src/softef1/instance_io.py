"""Text formats for instances and allocations (1-based ids, UTF-8, ``#`` comments).

Instance::

    agents 3
    goods 4
    valuations
    1 1 1 0
    1 1 1 0
    1 1 1 0
    edges
    1 4
    2 4 0.5

Allocation: one ``<good> <agent>`` line per good, then a ``# report:`` block of
``# key=value`` lines.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable

from .core import UNASSIGNED, Allocation, AllocationReport, Instance

_DECIMAL = re.compile(r"^\d+(\.\d{1,9})?$")
_SCALE = 10**9


class ParseError(ValueError):
    def __init__(self, lineno: int | None, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)


def _lines(text: str) -> Iterable[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield lineno, body.split()


def _number(tok: str, lineno: int, what: str) -> Fraction:
    if tok.startswith("-"):
        raise ParseError(lineno, f"negative {what} {tok}")
    if not _DECIMAL.match(tok):
        raise ParseError(lineno, f"malformed {what} {tok!r} (expected a decimal with at most 9 fractional digits)")
    return Fraction(tok)


def _int_field(tokens, lineno, keyword) -> int:
    if len(tokens) != 2 or tokens[0] != keyword or not tokens[1].isdigit():
        raise ParseError(lineno, f"expected '{keyword} <count>'")
    return int(tokens[1])


def parse_instance(text: str) -> Instance:
    lines = list(_lines(text))
    it = iter(lines)

    def need(what):
        try:
            return next(it)
        except StopIteration:
            raise ParseError(lines[-1][0] if lines else 1, f"unexpected end of input, expected {what}") from None

    lineno, tokens = need("'agents <n>'")
    n = _int_field(tokens, lineno, "agents")
    if n < 1:
        raise ParseError(lineno, "need at least one agent")
    lineno, tokens = need("'goods <m>'")
    m = _int_field(tokens, lineno, "goods")
    lineno, tokens = need("'valuations'")
    if tokens != ["valuations"]:
        raise ParseError(lineno, "expected 'valuations'")
    rows = []
    for i in range(n):
        lineno, tokens = need(f"valuation row {i + 1}")
        if len(tokens) != m:
            raise ParseError(lineno, f"valuation row {i + 1} has {len(tokens)} entries, expected {m}")
        rows.append(tuple(_number(t, lineno, "valuation") for t in tokens))

    edges, weights, seen = [], [], {}
    rest = list(it)
    if rest:
        lineno, tokens = rest[0]
        if tokens != ["edges"]:
            raise ParseError(lineno, "expected 'edges'")
        for lineno, tokens in rest[1:]:
            if len(tokens) not in (2, 3) or not tokens[0].isdigit() or not tokens[1].isdigit():
                raise ParseError(lineno, "expected '<u> <v> [w]'")
            u, v = int(tokens[0]), int(tokens[1])
            for g in (u, v):
                if not 1 <= g <= m:
                    raise ParseError(lineno, f"good {g} out of range [1, {m}]")
            if u == v:
                raise ParseError(lineno, f"self-loop at line {lineno}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ParseError(lineno, f"duplicate edge {u} {v} (first at line {seen[key]})")
            seen[key] = lineno
            edges.append((u - 1, v - 1))
            weights.append(_number(tokens[2], lineno, "weight") if len(tokens) == 3 else Fraction(1))
    return Instance(tuple(rows), tuple(edges), tuple(weights) if edges else None)


def format_number(x) -> str:
    """Exact decimal text for a value with a power-of-ten denominator."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    if _SCALE % x.denominator:
        raise ValueError(f"{x} has no exact decimal form with at most 9 digits")
    whole, frac = divmod(x.numerator * (_SCALE // x.denominator), _SCALE)
    return f"{whole}.{frac:09d}".rstrip("0")


def render_instance(instance: Instance) -> str:
    out = [f"agents {instance.n}", f"goods {instance.m}", "valuations"]
    for row in instance.valuations:
        out.append(" ".join(format_number(x) for x in row))
    out.append("edges")
    for e, (u, v) in enumerate(instance.edges):
        if instance.weights is None:
            out.append(f"{u + 1} {v + 1}")
        else:
            out.append(f"{u + 1} {v + 1} {format_number(instance.weights[e])}")
    return "\n".join(out) + "\n"


def parse_allocation(text: str, instance: Instance) -> Allocation:
    owner = [UNASSIGNED] * instance.m
    for lineno, tokens in _lines(text):
        if len(tokens) != 2 or not all(t.isdigit() for t in tokens):
            raise ParseError(lineno, "expected '<good> <agent>'")
        g, a = int(tokens[0]), int(tokens[1])
        if not 1 <= g <= instance.m:
            raise ParseError(lineno, f"good {g} out of range [1, {instance.m}]")
        if not 1 <= a <= instance.n:
            raise ParseError(lineno, f"agent {a} out of range [1, {instance.n}]")
        if owner[g - 1] != UNASSIGNED:
            raise ParseError(lineno, f"good {g} assigned twice")
        owner[g - 1] = a - 1
    missing = [g + 1 for g, a in enumerate(owner) if a == UNASSIGNED]
    if missing:
        raise ParseError(None, f"goods without an owner: {missing[:10]}")
    return Allocation(instance.n, tuple(owner))


def _rational(x) -> str:
    return str(Fraction(x))


def report_lines(rep: AllocationReport) -> list[str]:
    return [
        "# report:",
        f"# violations={_rational(rep.violations)}",
        f"# baseline={_rational(rep.baseline)}",
        f"# ef1={str(rep.ef1).lower()}",
        f"# balanced={str(rep.balanced).lower()}",
        f"# bundle_sizes={','.join(map(str, rep.bundle_sizes))}",
        "# bundle_values=" + ";".join(",".join(_rational(x) for x in row) for row in rep.bundle_values),
    ]


def render_allocation(allocation: Allocation, rep: AllocationReport | None = None, extra: dict | None = None) -> str:
    out = [f"{g + 1} {a + 1}" for g, a in enumerate(allocation.owner)]
    if rep is not None:
        out.extend(report_lines(rep))
    if extra:
        out.append("# solver:")
        out.extend(f"# {k}={v}" for k, v in extra.items())
    return "\n".join(out) + "\n"


def parse_report_block(text: str) -> dict[str, str]:
    """The ``key=value`` pairs of the ``# report:`` block."""
    fields, inside = {}, False
    for raw in text.splitlines():
        line = raw.strip()
        if line == "# report:":
            inside = True
        elif line.startswith("# ") and line.endswith(":"):
            inside = False
        elif inside and line.startswith("# ") and "=" in line:
            k, v = line[2:].split("=", 1)
            fields[k] = v
    return fields

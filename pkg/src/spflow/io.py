"""Line-oriented text documents for instances and solutions.

Instance document::

    spflow-instance 1
    vertices 5
    supply 0 2 1/1
    demand 2 3 1/1

Blank lines and text after ``#`` are ignored.  Weights are exact
rationals written ``num/den`` in lowest terms; plain integers are
accepted on input.
"""

from __future__ import annotations

from fractions import Fraction

from .core import Graph, GraphError, Instance

INSTANCE_HEADER = "spflow-instance 1"
SOLUTION_HEADER = "spflow-solution 1"


class DocumentError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


def format_fraction(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str, line: int | None = None) -> Fraction:
    try:
        num, sep, den = text.partition("/")
        if not num.strip().lstrip("-").isdigit() or (sep and not den.strip().isdigit()):
            raise ValueError
        return Fraction(int(num), int(den) if sep else 1)
    except (ValueError, ZeroDivisionError):
        raise DocumentError(f"bad rational {text!r}", line) from None


def _records(text: str):
    for k, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield k, body.split()


def write_instance(instance: Instance) -> str:
    lines = [INSTANCE_HEADER, f"vertices {instance.n}"]
    for (a, b), c in zip(instance.supply.edges, instance.capacities):
        lines.append(f"supply {a} {b} {format_fraction(c)}")
    for (a, b), d in zip(instance.demand.edges, instance.demands):
        lines.append(f"demand {a} {b} {format_fraction(d)}")
    return "\n".join(lines) + "\n"


def read_instance(text: str) -> Instance:
    records = list(_records(text))
    if not records or " ".join(records[0][1]) != INSTANCE_HEADER:
        raise DocumentError(f"expected header {INSTANCE_HEADER!r}", records[0][0] if records else 1)
    n = None
    sup, caps, dem, dems = [], [], [], []
    for line, fields in records[1:]:
        key = fields[0]
        if key == "vertices":
            if n is not None or len(fields) != 2 or not fields[1].isdigit():
                raise DocumentError("expected one 'vertices <count>' line", line)
            n = int(fields[1])
        elif key in ("supply", "demand"):
            if n is None:
                raise DocumentError("'vertices' must come before edges", line)
            if len(fields) != 4 or not fields[1].isdigit() or not fields[2].isdigit():
                raise DocumentError(f"expected '{key} <a> <b> <weight>'", line)
            a, b = int(fields[1]), int(fields[2])
            if a >= n or b >= n or a == b:
                raise DocumentError(f"bad endpoints {a} {b}", line)
            w = parse_fraction(fields[3], line)
            if w < 0:
                raise DocumentError("weights must be nonnegative", line)
            (sup if key == "supply" else dem).append((a, b))
            (caps if key == "supply" else dems).append(w)
        else:
            raise DocumentError(f"unknown record {key!r}", line)
    if n is None:
        raise DocumentError("missing 'vertices' line")
    return Instance(Graph(n, tuple(sup)), Graph(n, tuple(dem)), tuple(caps), tuple(dems))


def write_solution(instance: Instance, paths, congestion, mode: str) -> str:
    """Path flows plus a per-edge load section that can be checked without an LP."""
    lines = [SOLUTION_HEADER, f"mode {mode}", f"congestion {format_fraction(congestion)}"]
    loads = [Fraction(0)] * instance.supply.m
    for p in paths:
        verts = ",".join(map(str, p.vertices))
        edges = ",".join(map(str, p.edges))
        lines.append(f"path {p.demand} {format_fraction(p.amount)} {verts} {edges}")
        for e in p.edges:
            loads[e] += p.amount
    for e, (x, c) in enumerate(zip(loads, instance.capacities)):
        lines.append(f"load {e} {format_fraction(x)} {format_fraction(c)}")
    return "\n".join(lines) + "\n"


def read_solution(text: str) -> dict:
    from .lp.multiflow import PathFlow

    records = list(_records(text))
    if not records or " ".join(records[0][1]) != SOLUTION_HEADER:
        raise DocumentError(f"expected header {SOLUTION_HEADER!r}", 1)
    out = {"mode": None, "congestion": None, "paths": [], "loads": []}
    for line, fields in records[1:]:
        key = fields[0]
        if key == "mode" and len(fields) == 2:
            out["mode"] = fields[1]
        elif key == "congestion" and len(fields) == 2:
            out["congestion"] = parse_fraction(fields[1], line)
        elif key == "path" and len(fields) == 5:
            verts = tuple(int(x) for x in fields[3].split(","))
            edges = tuple(int(x) for x in fields[4].split(",")) if fields[4] else ()
            out["paths"].append(PathFlow(int(fields[1]), verts, edges, parse_fraction(fields[2], line)))
        elif key == "load" and len(fields) == 4:
            out["loads"].append((int(fields[1]), parse_fraction(fields[2], line), parse_fraction(fields[3], line)))
        else:
            raise DocumentError(f"malformed {key!r} record", line)
    return out

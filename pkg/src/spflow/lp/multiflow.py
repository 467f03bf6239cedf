"""Minimum congestion via the edge formulation, its dual metric and path decompositions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..core import Graph, GraphError, Instance
from .model import LinearProgram, LPError, solve_lp

ZERO = Fraction(0)


@dataclass(frozen=True)
class PathFlow:
    demand: int
    vertices: tuple[int, ...]
    edges: tuple[int, ...]
    amount: Fraction


@dataclass(frozen=True)
class MetricAssignment:
    lengths: tuple[Fraction, ...]
    distances: tuple[Fraction, ...]
    objective: Fraction


@dataclass(frozen=True)
class MultiflowSolution:
    instance: Instance
    congestion: Fraction
    paths: tuple[PathFlow, ...]
    edge_flows: tuple[dict, ...]  # per demand: edge id -> signed flow (positive = low-to-high label)
    loads: tuple[Fraction, ...]
    metric: MetricAssignment | None = None
    primal_objective: Fraction | None = None
    dual_objective: Fraction | None = None

    @property
    def residual_capacities(self) -> tuple[Fraction, ...]:
        return tuple(c - x for c, x in zip(self.instance.capacities, self.loads))

    def delivered(self, demand: int) -> Fraction:
        return sum((p.amount for p in self.paths if p.demand == demand), ZERO)

    def paths_for(self, demand: int) -> list[PathFlow]:
        return [p for p in self.paths if p.demand == demand]


def shortest_distances(graph: Graph, lengths, source: int) -> list[Fraction | None]:
    """Exact Dijkstra; ``None`` marks unreachable vertices."""
    dist: list[Fraction | None] = [None] * graph.n
    dist[source] = ZERO
    done = [False] * graph.n
    for _ in range(graph.n):
        x = None
        for v in range(graph.n):
            if not done[v] and dist[v] is not None and (x is None or dist[v] < dist[x]):
                x = v
        if x is None:
            break
        done[x] = True
        for y, eid in graph.incidence[x]:
            nd = dist[x] + lengths[eid]
            if dist[y] is None or nd < dist[y]:
                dist[y] = nd
    return dist


def _positive_component(instance: Instance, a: int) -> set[int]:
    g = instance.supply
    keep = [i for i, c in enumerate(instance.capacities) if c > 0]
    return g.with_edges(g.edges[i] for i in keep).reachable(a)


def decompose(graph: Graph, flow: dict, s: int, t: int, demand: int = 0) -> list[PathFlow]:
    """Split a signed edge flow from ``s`` to ``t`` into paths; cycles are dropped."""
    residual = {}
    for eid, f in flow.items():
        if f:
            a, b = graph.edges[eid]
            residual[eid] = (a, b, f) if f > 0 else (b, a, -f)
    out = []
    while True:
        out_arcs: dict[int, list[int]] = {}
        for eid in sorted(residual):
            out_arcs.setdefault(residual[eid][0], []).append(eid)
        if not out_arcs.get(s):
            break
        walk, arcs, pos = [s], [], {s: 0}
        while walk[-1] != t:
            x = walk[-1]
            eid = out_arcs[x][0]
            y = residual[eid][1]
            arcs.append(eid)
            if y in pos:
                cyc = arcs[pos[y]:]
                amount = min(residual[e][2] for e in cyc)
                _subtract(residual, cyc, amount)
                walk, arcs = walk[: pos[y] + 1], arcs[: pos[y]]
                pos = {v: i for i, v in enumerate(walk)}
                out_arcs = {}
                for e in sorted(residual):
                    out_arcs.setdefault(residual[e][0], []).append(e)
                if not out_arcs.get(walk[-1]):
                    raise AssertionError("flow conservation broken during decomposition")
                continue
            pos[y] = len(walk)
            walk.append(y)
            if not out_arcs.get(y) and y != t:
                raise AssertionError("flow conservation broken during decomposition")
        amount = min(residual[e][2] for e in arcs)
        _subtract(residual, arcs, amount)
        out.append(PathFlow(demand, tuple(walk), tuple(arcs), amount))
    return out


def _subtract(residual, arcs, amount):
    for e in arcs:
        a, b, f = residual[e]
        if f == amount:
            del residual[e]
        else:
            residual[e] = (a, b, f - amount)


def path_flow_edges(graph: Graph, paths, demand_edges) -> list[dict]:
    """Signed per-edge flows reconstructed from paths."""
    out = [dict() for _ in demand_edges]
    for p in paths:
        for x, eid in zip(p.vertices, p.edges):
            a, _ = graph.edges[eid]
            sign = 1 if x == a else -1
            out[p.demand][eid] = out[p.demand].get(eid, ZERO) + sign * p.amount
    return [{e: f for e, f in d.items() if f} for d in out]


def loads_of(graph: Graph, paths) -> tuple[Fraction, ...]:
    loads = [ZERO] * graph.m
    for p in paths:
        for eid in p.edges:
            loads[eid] += p.amount
    return tuple(loads)


def min_congestion(instance: Instance, engine: str = "auto") -> MultiflowSolution:
    """Exact minimum congestion with a path decomposition and the dual metric."""
    g, h = instance.supply, instance.demand
    for i, (a, b) in enumerate(h.edges):
        if instance.demands[i] > 0 and b not in _positive_component(instance, a):
            raise GraphError(f"demand {i} joins vertices not connected by positive capacity")
    active = [i for i, d in enumerate(instance.demands) if d > 0]
    total_cap = sum(instance.capacities, ZERO)
    if not active:
        lengths = tuple((Fraction(1) / total_cap if total_cap else ZERO) for _ in g.edges)
        metric = MetricAssignment(lengths, _distances(instance, lengths), ZERO)
        return MultiflowSolution(instance, ZERO, (), tuple({} for _ in h.edges), (ZERO,) * g.m, metric, ZERO, ZERO)

    lp = LinearProgram("min")
    alpha = lp.add_var("alpha", 1)
    var = {}
    for i in active:
        for e in range(g.m):
            var[i, e, 1] = lp.add_var(("f", i, e, 1))
            var[i, e, -1] = lp.add_var(("f", i, e, -1))
    for i in active:
        s, t = h.edges[i]
        for v in range(g.n):
            if v == t:
                continue
            coeffs = {}
            for _, eid in g.incidence[v]:
                a, _b = g.edges[eid]
                out_dir = 1 if v == a else -1
                coeffs[var[i, eid, out_dir]] = coeffs.get(var[i, eid, out_dir], 0) + 1
                coeffs[var[i, eid, -out_dir]] = coeffs.get(var[i, eid, -out_dir], 0) - 1
            lp.add_row(coeffs, "==", instance.demands[i] if v == s else 0)
    cap_rows = []
    for e in range(g.m):
        coeffs = {alpha: -instance.capacities[e]}
        for i in active:
            coeffs[var[i, e, 1]] = 1
            coeffs[var[i, e, -1]] = 1
        cap_rows.append(lp.add_row(coeffs, "<=", 0))
    res = solve_lp(lp, engine)
    if res.status != "optimal":
        raise LPError(f"congestion LP is {res.status}")
    x, y = res.x, res.duals
    congestion = x[alpha]
    lengths = tuple(-y[r] for r in cap_rows)
    assert sum((c * l for c, l in zip(instance.capacities, lengths)), ZERO) == 1

    raw = [dict() for _ in h.edges]
    for i in active:
        for e in range(g.m):
            f = x[var[i, e, 1]] - x[var[i, e, -1]]
            if f:
                raw[i][e] = f
    paths = []
    for i in active:
        s, t = h.edges[i]
        paths.extend(decompose(g, raw[i], s, t, i))
    for i in active:
        got = sum((p.amount for p in paths if p.demand == i), ZERO)
        assert got == instance.demands[i], "decomposition lost flow"
    edge_flows = path_flow_edges(g, paths, h.edges)
    loads = loads_of(g, paths)
    assert all(l <= c * congestion for l, c in zip(loads, instance.capacities))
    distances = _distances(instance, lengths)
    dual_obj = sum((d * dist for d, dist in zip(instance.demands, distances)), ZERO)
    assert dual_obj == congestion, "dual metric objective differs from congestion"
    metric = MetricAssignment(lengths, distances, dual_obj)
    return MultiflowSolution(instance, congestion, tuple(paths), tuple(edge_flows), loads, metric, res.objective, dual_obj)


def _distances(instance: Instance, lengths) -> tuple[Fraction, ...]:
    out = []
    cache = {}
    for a, b in instance.demand.edges:
        if a not in cache:
            cache[a] = shortest_distances(instance.supply, lengths, a)
        d = cache[a][b]
        out.append(d if d is not None else ZERO)
    return tuple(out)


def dual_metric(instance: Instance) -> MetricAssignment:
    """Optimal lengths and distances: sum c_e l_e = 1, objective = congestion."""
    return min_congestion(instance).metric


def verify_multiflow(instance: Instance, paths, congestion=1, integral: bool = False, scale=None) -> list[str]:
    """Independent check of a path flow; returns a list of problems (empty when valid)."""
    problems = []
    g, h = instance.supply, instance.demand
    loads = [ZERO] * g.m
    delivered = [ZERO] * h.m
    for k, p in enumerate(paths):
        amount = Fraction(p.amount)
        if amount < 0:
            problems.append(f"path {k} has negative flow")
        if integral and (amount * (scale or 1)).denominator != 1:
            problems.append(f"path {k} flow {amount} is not in the required lattice")
        verts, edges = p.vertices, p.edges
        a, b = h.edges[p.demand]
        if {verts[0], verts[-1]} != {a, b}:
            problems.append(f"path {k} does not join the endpoints of demand {p.demand}")
        if len(set(verts)) != len(verts):
            problems.append(f"path {k} is not simple")
        if len(edges) != len(verts) - 1:
            problems.append(f"path {k} has inconsistent length")
        for x, y, eid in zip(verts, verts[1:], edges):
            if set(g.edges[eid]) != {x, y}:
                problems.append(f"path {k} uses edge {eid} which does not join {x} and {y}")
            loads[eid] += amount
        delivered[p.demand] += amount
    for e in range(g.m):
        if loads[e] > instance.capacities[e] * congestion:
            problems.append(f"edge {e} load {loads[e]} exceeds {instance.capacities[e] * congestion}")
    for i in range(h.m):
        if delivered[i] != instance.demands[i]:
            problems.append(f"demand {i} receives {delivered[i]} instead of {instance.demands[i]}")
    return problems

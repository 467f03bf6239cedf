"""Integral routing of Eulerian cut-sufficient series-parallel instances.

One unit of a demand d = (u, v) is routed at a time.  A fractional
solution is decomposed into noncrossing paths P1..Pk in an embedding with
u and v on the outer face; d is pushed to every vertex shared by P1 and
Pk, which creates a chain Q of unit demands; Q is then routed along a
path P that takes, on every cycle of P1 u Pk, the side with no interior
vertex linked to v.  Every intermediate instance is audited.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import Graph, GraphError, Instance, Pair, surplus_of_mask
from .cutcheck import _all_sides, central_sides, check_cut_condition, is_eulerian, surplus_vector
from .lp.multiflow import PathFlow, min_congestion, verify_multiflow
from .spgraph import PHANTOM, NotSeriesParallelError, embed_with_outer_pair, has_k4_minor, k4_witness
from .sufficiency import decide_cut_sufficiency

AUDIT_MAX_VERTICES = 14
ONE = Fraction(1)


class RoutingRefused(Exception):
    """A precondition fails; ``certificate`` shows why."""

    def __init__(self, kind: str, certificate, message: str):
        super().__init__(message)
        self.kind = kind  # "not-integral", "violated-cut", "odd-parity" or "spindle"
        self.certificate = certificate


class RoutingFailure(AssertionError):
    """An internal invariant broke; this indicates a bug, not a bad input."""


# ---------------------------------------------------------------------------
# Working copy with provenance


@dataclass
class _Work:
    instance: Instance
    edge_origin: list[int]
    demand_origin: list[int]

    def normalized(self) -> "_Work":
        inst = self.instance
        keep_e = [e for e, c in enumerate(inst.capacities) if c > 0]
        keep_d = [i for i, d in enumerate(inst.demands) if d > 0]
        sup = Graph(inst.n, tuple(inst.supply.edges[e] for e in keep_e))
        dem = Graph(inst.n, tuple(inst.demand.edges[i] for i in keep_d))
        new = Instance(sup, dem, tuple(inst.capacities[e] for e in keep_e), tuple(inst.demands[i] for i in keep_d))
        return _Work(new, [self.edge_origin[e] for e in keep_e], [self.demand_origin[i] for i in keep_d])


def _audit(inst: Instance, label: str, audit: bool) -> None:
    if not audit or inst.n > AUDIT_MAX_VERTICES:
        return
    report = check_cut_condition(inst)
    if not report.satisfied:
        raise RoutingFailure(f"{label}: cut condition broken, surplus {report.min_surplus} on {report.worst_cut.side}")
    if not is_eulerian(inst):
        raise RoutingFailure(f"{label}: parity broken")


def route_along(inst: Instance, demand: int, edges, units: int = 1) -> Instance:
    caps = list(inst.capacities)
    for e in edges:
        caps[e] -= units
        if caps[e] < 0:
            raise RoutingFailure(f"capacity underflow on edge {e}")
    dems = list(inst.demands)
    dems[demand] -= units
    if dems[demand] < 0:
        raise RoutingFailure(f"demand {demand} routed beyond its value")
    return inst.with_weights(capacities=caps, demands=dems)


def push_unit(inst: Instance, demand: int, w: int, ends: tuple[int, int] | None = None) -> Instance:
    """Move one unit of ``demand`` = (a, b) onto the unit demands (a, w) and (w, b).

    ``ends`` fixes the orientation (a, b); it defaults to the stored edge.
    """
    a, b = ends if ends is not None else inst.demand.edges[demand]
    if {a, b} != set(inst.demand.edges[demand]) or w in (a, b):
        raise GraphError(f"cannot push demand {demand} to vertex {w}")
    dems = list(inst.demands)
    dems[demand] -= 1
    if dems[demand] < 0:
        raise GraphError(f"demand {demand} has no unit to push")
    edges = inst.demand.edges + ((a, w), (w, b))
    return Instance(inst.supply, Graph(inst.n, edges), inst.capacities, tuple(dems) + (ONE, ONE))


# ---------------------------------------------------------------------------
# Noncrossing decomposition


@dataclass(frozen=True)
class EmbeddedPath:
    vertices: tuple[int, ...]
    edges: tuple[int, ...]
    amount: Fraction


def directed_flow(graph: Graph, paths) -> dict:
    """Net arc flow ``(tail, eid) -> amount`` of a set of paths, with directed cycles cancelled."""
    net: dict[int, Fraction] = {}
    for p in paths:
        for x, e in zip(p.vertices, p.edges):
            sign = 1 if graph.edges[e][0] == x else -1
            net[e] = net.get(e, Fraction(0)) + sign * p.amount
    arcs = {}
    for e, f in net.items():
        a, b = graph.edges[e]
        if f > 0:
            arcs[(a, e)] = f
        elif f < 0:
            arcs[(b, e)] = -f
    while True:
        cycle = _find_cycle(graph, arcs)
        if cycle is None:
            return arcs
        low = min(arcs[a] for a in cycle)
        for a in cycle:
            arcs[a] -= low
            if arcs[a] == 0:
                del arcs[a]


def _find_cycle(graph: Graph, arcs):
    out: dict[int, list] = {}
    for tail, e in sorted(arcs):
        out.setdefault(tail, []).append((tail, e))
    color: dict[int, int] = {}
    for root in sorted(out):
        if color.get(root):
            continue
        stack = [(root, iter(out.get(root, ())))]
        trail: list = []
        color[root] = 1
        while stack:
            x, it = stack[-1]
            arc = next(it, None)
            if arc is None:
                color[x] = 2
                stack.pop()
                if trail:
                    trail.pop()
                continue
            y = graph.other(arc[1], x)
            if color.get(y) == 1:
                k = len(trail)
                while k > 0 and trail[k - 1][0] != y:
                    k -= 1
                return trail[k - 1:] + [arc] if k > 0 else [arc]
            if not color.get(y):
                color[y] = 1
                trail.append(arc)
                stack.append((y, iter(out.get(y, ()))))
    return None


def noncrossing_decomposition(emb, arcs: dict, u: int, v: int) -> list[EmbeddedPath]:
    """Leftmost-first path extraction from an acyclic ``u``-``v`` arc flow.

    At ``u`` the scan starts clockwise after the phantom ``u``-``v`` edge; at
    every later vertex it starts clockwise after the arriving edge.
    """
    g = emb.graph
    arcs = dict(arcs)
    paths = []
    while any(t == u for t, _ in arcs):
        verts, edges = [u], []
        x, came = u, PHANTOM
        while x != v:
            rot = emb.rotation[x]
            k = rot.index(came)
            nxt = None
            for j in range(1, len(rot) + 1):
                e = rot[(k + j) % len(rot)]
                if e != PHANTOM and arcs.get((x, e), 0) > 0:
                    nxt = e
                    break
            if nxt is None:
                raise RoutingFailure(f"flow stops at vertex {x}")
            edges.append(nxt)
            x = g.other(nxt, x)
            came = nxt
            if x in verts:
                raise RoutingFailure("extracted walk revisits a vertex")
            verts.append(x)
        amount = min(arcs[(a, e)] for a, e in zip(verts, edges))
        for a, e in zip(verts, edges):
            arcs[(a, e)] -= amount
            if arcs[(a, e)] == 0:
                del arcs[(a, e)]
        paths.append(EmbeddedPath(tuple(verts), tuple(edges), amount))
    if arcs:
        raise RoutingFailure("flow left over after extraction")
    return paths


def path_sides(emb, path: EmbeddedPath) -> dict[int, int]:
    """Side (+1 or -1) of every vertex off ``path`` that is joined to it, via components of G - P."""
    g = emb.graph
    on = set(path.vertices)
    blocked_mask = sum(1 << x for x in on)
    rest = ((1 << g.n) - 1) & ~blocked_mask
    sides: dict[int, int] = {}
    n = len(path.vertices)
    for comp in g.components(rest) if rest else []:
        side = 0
        for k, x in enumerate(path.vertices):
            e_in = PHANTOM if k == 0 else path.edges[k - 1]
            e_out = PHANTOM if k == n - 1 else path.edges[k]
            for y, e in g.incidence[x]:
                if comp >> y & 1:
                    side = emb.side_of(x, e_in, e_out, e)
                    break
            if side:
                break
        for y in range(g.n):
            if comp >> y & 1 and side:
                sides[y] = side
    return sides


def crosses(emb, p: EmbeddedPath, q: EmbeddedPath) -> bool:
    """``q`` has vertices strictly on both sides of ``p``."""
    sides = path_sides(emb, p)
    seen = {sides[x] for x in q.vertices if x in sides}
    return len(seen) == 2


# ---------------------------------------------------------------------------
# Cycle chains


@dataclass(frozen=True)
class Piece:
    a: int
    b: int
    first: tuple[tuple[int, ...], tuple[int, ...]]  # (vertices, edges) along P1
    last: tuple[tuple[int, ...], tuple[int, ...]]  # along Pk

    @property
    def is_cycle(self) -> bool:
        return self.first[1] != self.last[1]

    @property
    def vertices(self) -> set[int]:
        return set(self.first[0]) | set(self.last[0])


@dataclass(frozen=True)
class CycleChain:
    paths: tuple[EmbeddedPath, ...]
    shared: tuple[int, ...]  # vertices of P1 n Pk in order from u to v
    pieces: tuple[Piece, ...]

    @property
    def cycles(self) -> list[Piece]:
        return [p for p in self.pieces if p.is_cycle]


@dataclass(frozen=True)
class PushLedger:
    demand: tuple[int, int]
    chain: tuple[tuple[int, int], ...]  # unit demands of Q


def build_chain(paths: list[EmbeddedPath]) -> CycleChain:
    p1, pk = paths[0], paths[-1]
    on_k = set(pk.vertices)
    shared = [x for x in p1.vertices if x in on_k]
    order_k = [x for x in pk.vertices if x in set(shared)]
    if order_k != shared:
        raise RoutingFailure("P1 and Pk meet in different orders")
    for p in paths:
        if not set(shared) <= set(p.vertices):
            raise RoutingFailure("a flow path avoids a vertex shared by P1 and Pk")
    pieces = []
    for a, b in zip(shared, shared[1:]):
        i, j = p1.vertices.index(a), p1.vertices.index(b)
        s, t = pk.vertices.index(a), pk.vertices.index(b)
        pieces.append(Piece(a, b, (p1.vertices[i:j + 1], p1.edges[i:j]), (pk.vertices[s:t + 1], pk.edges[s:t])))
    cyc = [p for p in pieces if p.is_cycle]
    for x, y in zip(cyc, cyc[1:]):
        if len(x.vertices & y.vertices) > 1:
            raise RoutingFailure("cycles of P1 u Pk overlap")
    return CycleChain(tuple(paths), tuple(shared), tuple(pieces))


def linked_to(graph: Graph, cycle: set[int], x: int, target: int) -> bool:
    """A path from ``x`` to ``target`` meeting the cycle only at ``x``."""
    return target in graph.reachable(x, cycle - {x})


def choose_sides(chain: CycleChain, graph: Graph, v: int) -> tuple[tuple[int, ...], tuple[int, ...], list[str]]:
    """The path P: per cycle, the side whose interior has no vertex linked to ``v``."""
    verts: list[int] = [chain.shared[0]]
    edges: list[int] = []
    picks = []
    for piece in chain.pieces:
        if not piece.is_cycle:
            side = piece.first
            picks.append("shared")
        else:
            cyc = piece.vertices
            if v in cyc:
                side, tag = piece.first, "first"
            else:
                bad_first = any(linked_to(graph, cyc, x, v) for x in piece.first[0][1:-1])
                bad_last = any(linked_to(graph, cyc, x, v) for x in piece.last[0][1:-1])
                if not bad_first:
                    side, tag = piece.first, "first"
                elif not bad_last:
                    side, tag = piece.last, "last"
                else:
                    raise RoutingFailure(f"both sides of the cycle at ({piece.a},{piece.b}) are linked to v")
            picks.append(tag)
        verts.extend(side[0][1:])
        edges.extend(side[1])
    return tuple(verts), tuple(edges), picks


def max_double_crossings(inst: Instance, chain: CycleChain, path_edges) -> int:
    """Largest number of cycles whose P-side is crossed twice by one central cut."""
    g = inst.supply
    if not g.is_connected():
        return 0
    chosen = set(path_edges)
    per_cycle = []
    for piece in chain.cycles:
        side = piece.first if set(piece.first[1]) <= chosen else piece.last
        per_cycle.append([g.edges[e] for e in side[1]])
    worst = 0
    for m in central_sides(g).tolist():
        count = 0
        for es in per_cycle:
            hits = sum(1 for a, b in es if ((m >> a) ^ (m >> b)) & 1)
            if hits == 2:
                count += 1
        worst = max(worst, count)
    return worst


# ---------------------------------------------------------------------------
# Drivers


@dataclass
class IntegralRouting:
    instance: Instance
    paths: tuple[PathFlow, ...]
    scale: int = 1  # flows lie in (1/scale) Z
    floor_units: int = 0
    unit_steps: int = 0
    log: list = field(default_factory=list)

    def loads(self) -> tuple[Fraction, ...]:
        out = [Fraction(0)] * self.instance.supply.m
        for p in self.paths:
            for e in p.edges:
                out[e] += p.amount
        return tuple(out)

    def verify(self) -> list[str]:
        return verify_multiflow(self.instance, self.paths, 1, integral=True, scale=self.scale)


def _component_pairs(pair: Pair):
    g = pair.supply
    for comp in g.components():
        verts = [x for x in range(g.n) if comp >> x & 1]
        local = {x: k for k, x in enumerate(verts)}
        sup = tuple((local[a], local[b]) for a, b in g.edges if a in local)
        dem = tuple((local[a], local[b]) for a, b in pair.demand.edges if a in local and b in local)
        if dem:
            yield verts, Pair(Graph(len(verts), sup), Graph(len(verts), dem))


def check_preconditions(instance: Instance, require_eulerian: bool = True, check_sufficiency: bool = True) -> None:
    if not instance.is_integral():
        raise RoutingRefused("not-integral", None, "capacities and demands must be integers")
    g = instance.supply
    if has_k4_minor(g.n, g.edges):
        raise NotSeriesParallelError("supply graph is not series-parallel", k4_branch_sets=k4_witness(g))
    report = check_cut_condition(instance)
    if not report.satisfied:
        raise RoutingRefused("violated-cut", report.worst_cut, f"cut condition fails with surplus {report.min_surplus}")
    if require_eulerian and not is_eulerian(instance):
        odd = _odd_vertices(instance)
        raise RoutingRefused("odd-parity", odd, f"instance is not Eulerian at vertices {odd}")
    if check_sufficiency:
        support = Instance(
            g, instance.demand, instance.capacities, instance.demands
        )
        work = _Work(support, list(range(g.m)), list(range(instance.demand.m))).normalized().instance
        for verts, sub in _component_pairs(work.pair):
            verdict = decide_cut_sufficiency(sub)
            if not verdict.cut_sufficient:
                raise RoutingRefused(
                    "spindle",
                    (tuple(verts), verdict.witness),
                    f"pair has an odd {verdict.witness.p}-spindle minor",
                )


def _odd_vertices(instance: Instance) -> list[int]:
    total = [Fraction(0)] * instance.n
    for (a, b), c in zip(instance.supply.edges, instance.capacities):
        total[a] += c
        total[b] += c
    for (a, b), d in zip(instance.demand.edges, instance.demands):
        total[a] += d
        total[b] += d
    return [x for x in range(instance.n) if total[x].denominator != 1 or total[x].numerator % 2]


def _component_view(graph: Graph, root: int):
    comp = graph.reachable(root)
    verts = sorted(comp)
    local = {x: k for k, x in enumerate(verts)}
    eids = [e for e, (a, b) in enumerate(graph.edges) if a in local]
    sub = Graph(len(verts), tuple((local[graph.edges[e][0]], local[graph.edges[e][1]]) for e in eids))
    return sub, verts, eids, local


def route_one_unit(work: _Work, demand: int, audit: bool = True, log=None, lp_log=None) -> tuple[_Work, PathFlow]:
    """Push one unit of ``demand`` to a chain Q and route Q; returns the residual and the path used."""
    inst = work.instance
    u, v = inst.demand.edges[demand]
    sol = min_congestion(inst)
    if lp_log is not None:
        lp_log.append(inst)
    if sol.congestion > 1:
        raise RoutingFailure(f"fractional congestion {sol.congestion} exceeds 1")
    sub, verts, eids, local = _component_view(inst.supply, u)
    lu, lv = local[u], local[v]
    emap = {e: k for k, e in enumerate(eids)}
    local_paths = [
        EmbeddedPath(tuple(local[x] for x in p.vertices), tuple(emap[e] for e in p.edges), p.amount)
        for p in sol.paths_for(demand)
    ]
    for p in local_paths:
        if p.vertices[0] != lu:
            raise RoutingFailure("flow path is not oriented from u")
    arcs = directed_flow(sub, local_paths)
    emb = embed_with_outer_pair(sub, lu, lv)
    paths = noncrossing_decomposition(emb, arcs, lu, lv)
    if audit:
        for i in range(len(paths)):
            for j in range(len(paths)):
                if i != j and crosses(emb, paths[i], paths[j]):
                    raise RoutingFailure(f"decomposition paths {i} and {j} cross")
    chain = build_chain(paths)
    shared = [verts[x] for x in chain.shared]
    q = tuple(zip(shared, shared[1:]))

    # push the unit to every shared vertex, one vertex at a time
    cur = inst
    target = demand
    for k in range(1, len(shared) - 1):
        w = shared[k]
        cur = push_unit(cur, target, w, ends=(shared[k - 1], v))
        _audit(cur, f"push to {w}", audit)
        target = cur.demand.m - 1
    ledger = PushLedger((u, v), q)

    lverts, ledges, picks = choose_sides(chain, sub, lv)
    p_verts = tuple(verts[x] for x in lverts)
    p_edges = tuple(eids[e] for e in ledges)
    if audit and inst.n <= AUDIT_MAX_VERTICES and max_double_crossings(Instance(
        sub, Graph(sub.n, ()), tuple(inst.capacities[e] for e in eids), ()
    ), chain, ledges) > 1:
        raise RoutingFailure("a central cut crosses two chosen cycle sides twice")

    new = route_along(inst, demand, p_edges)
    if audit and inst.n <= AUDIT_MAX_VERTICES:
        sides = _all_sides(inst.n)
        before, k0 = surplus_vector(inst, sides)
        after, k1 = surplus_vector(new, sides)
        if k0 != 1 or k1 != 1 or ((before - after) % 2).any():
            raise RoutingFailure("a cut surplus changed by an odd amount")
    _audit(new, "route unit", audit)
    if log is not None:
        log.append({"demand": work.demand_origin[demand], "pushed": ledger.chain, "path": p_verts, "sides": picks})
    path = PathFlow(work.demand_origin[demand], p_verts, tuple(work.edge_origin[e] for e in p_edges), ONE)
    nxt = _Work(new, work.edge_origin, work.demand_origin).normalized()
    return nxt, path


def _demand_order(inst: Instance) -> list[int]:
    return sorted(
        (i for i, d in enumerate(inst.demands) if d > 0),
        key=lambda i: (tuple(sorted(inst.demand.edges[i])), i),
    )


def floor_preroute(work: _Work, bulk: bool = False, audit: bool = True, out=None, lp_log=None) -> tuple[_Work, int]:
    """Send the integral part of every fractional path, unit by unit unless ``bulk``."""
    inst = work.instance
    if not any(d > 0 for d in inst.demands):
        return work, 0
    sol = min_congestion(inst)
    if lp_log is not None:
        lp_log.append(inst)
    if sol.congestion > 1:
        raise RoutingFailure(f"fractional congestion {sol.congestion} exceeds 1")
    units = 0
    for i in _demand_order(inst):
        for p in sol.paths_for(i):
            whole = p.amount.numerator // p.amount.denominator
            if whole <= 0:
                continue
            steps = [whole] if bulk else [1] * whole
            for s in steps:
                inst = route_along(inst, i, p.edges, s)
                _audit(inst, "floor routing", audit)
                units += s
                if out is not None:
                    out.append(
                        PathFlow(work.demand_origin[i], p.vertices, tuple(work.edge_origin[e] for e in p.edges), Fraction(s))
                    )
    return _Work(inst, work.edge_origin, work.demand_origin).normalized(), units


def _merge(paths) -> tuple[PathFlow, ...]:
    total: dict = {}
    for p in paths:
        key = (p.demand, p.vertices, p.edges)
        total[key] = total.get(key, Fraction(0)) + p.amount
    return tuple(PathFlow(d, vs, es, a) for (d, vs, es), a in sorted(total.items()))


def solve_integral(
    instance: Instance,
    audit: bool = True,
    floor: bool = True,
    bulk_floor: bool = False,
    check_sufficiency: bool = True,
    lp_log: list | None = None,
) -> IntegralRouting:
    """Integral routing of an Eulerian, cut-sufficient series-parallel instance meeting the cut condition."""
    check_preconditions(instance, require_eulerian=True, check_sufficiency=check_sufficiency)
    work = _Work(instance, list(range(instance.supply.m)), list(range(instance.demand.m))).normalized()
    routed: list[PathFlow] = []
    log: list = []
    floor_units = 0
    if floor:
        work, floor_units = floor_preroute(work, bulk=bulk_floor, audit=audit, out=routed, lp_log=lp_log)
    steps = 0
    total = sum(work.instance.demands, Fraction(0))
    while True:
        order = _demand_order(work.instance)
        if not order:
            break
        work, path = route_one_unit(work, order[0], audit=audit, log=log, lp_log=lp_log)
        routed.append(path)
        steps += 1
        left = sum(work.instance.demands, Fraction(0))
        if left >= total:
            raise RoutingFailure("total demand did not decrease")
        total = left
    result = IntegralRouting(instance, _merge(routed), 1, floor_units, steps, log)
    problems = result.verify()
    if problems:
        raise RoutingFailure("; ".join(problems))
    return result


def solve_half_integral(
    instance: Instance,
    audit: bool = True,
    floor: bool = True,
    check_sufficiency: bool = True,
    lp_log: list | None = None,
) -> IntegralRouting:
    """Double every weight, route integrally, halve the flows."""
    if not instance.is_integral():
        raise RoutingRefused("not-integral", None, "capacities and demands must be integers")
    doubled = instance.scaled(2, 2)
    inner = solve_integral(doubled, audit=audit, floor=floor, check_sufficiency=check_sufficiency, lp_log=lp_log)
    half = tuple(PathFlow(p.demand, p.vertices, p.edges, p.amount / 2) for p in inner.paths)
    result = IntegralRouting(instance, half, 2, inner.floor_units, inner.unit_steps, inner.log)
    problems = result.verify()
    if problems:
        raise RoutingFailure("; ".join(problems))
    return result


def surplus_after_routing(instance: Instance, demand: int, edges, mask: int) -> Fraction:
    """Surplus of ``mask`` after routing one unit of ``demand`` along ``edges``."""
    return surplus_of_mask(route_along(instance, demand, edges), mask)

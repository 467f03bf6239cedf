"""Graphs, instances, cuts and pair minors.

Vertices are dense integers ``0..n-1``.  Edges are identified by their
position in the edge tuple, so parallel edges stay distinct objects.  All
weights are :class:`fractions.Fraction`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

Edge = tuple[int, int]


class GraphError(ValueError):
    pass


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floating-point weights are not accepted; use Fraction or int")
    return Fraction(value)


@dataclass(frozen=True)
class Graph:
    """Undirected multigraph without self-loops."""

    n: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        norm = []
        for a, b in self.edges:
            a, b = int(a), int(b)
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise GraphError(f"edge ({a},{b}) has an endpoint outside 0..{self.n - 1}")
            if a == b:
                raise GraphError(f"self-loop at vertex {a}")
            norm.append((a, b) if a < b else (b, a))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def incidence(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """``incidence[v]`` lists ``(neighbor, edge_id)`` pairs."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for i, (a, b) in enumerate(self.edges):
            adj[a].append((b, i))
            adj[b].append((a, i))
        return tuple(tuple(x) for x in adj)

    @cached_property
    def neighbor_masks(self) -> tuple[int, ...]:
        masks = [0] * self.n
        for a, b in self.edges:
            masks[a] |= 1 << b
            masks[b] |= 1 << a
        return tuple(masks)

    def degree(self, v: int) -> int:
        return len(self.incidence[v])

    def other(self, edge_id: int, v: int) -> int:
        a, b = self.edges[edge_id]
        if v == a:
            return b
        if v == b:
            return a
        raise GraphError(f"vertex {v} is not an endpoint of edge {edge_id}")

    def with_edges(self, edges: Iterable[Edge]) -> "Graph":
        return Graph(self.n, tuple(edges))

    def without_edges(self, drop: Iterable[int]) -> "Graph":
        drop = set(drop)
        return Graph(self.n, tuple(e for i, e in enumerate(self.edges) if i not in drop))

    def components(self, mask: int | None = None) -> list[int]:
        """Connected components (as bitmasks) of the subgraph induced by ``mask``."""
        if mask is None:
            mask = (1 << self.n) - 1
        nbr = self.neighbor_masks
        comps = []
        rest = mask
        while rest:
            low = rest & -rest
            comp = low
            frontier = low
            while frontier:
                grow = 0
                f = frontier
                while f:
                    b = f & -f
                    grow |= nbr[b.bit_length() - 1]
                    f ^= b
                grow &= mask & ~comp
                comp |= grow
                frontier = grow
            comps.append(comp)
            rest &= ~comp
        return comps

    def is_connected(self, mask: int | None = None) -> bool:
        if mask is None:
            mask = (1 << self.n) - 1
        if mask == 0:
            return False
        return len(self.components(mask)) == 1

    def reachable(self, start: int, blocked: Iterable[int] = ()) -> set[int]:
        blocked = set(blocked)
        if start in blocked:
            return set()
        seen = {start}
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y, _ in self.incidence[x]:
                if y not in seen and y not in blocked:
                    seen.add(y)
                    queue.append(y)
        return seen


def vertex_mask(vertices: Iterable[int], n: int) -> int:
    mask = 0
    for v in vertices:
        v = int(v)
        if not 0 <= v < n:
            raise GraphError(f"unknown vertex {v}")
        mask |= 1 << v
    return mask


def mask_vertices(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        b = mask & -mask
        out.append(b.bit_length() - 1)
        mask ^= b
    return tuple(out)


@dataclass(frozen=True)
class Pair:
    """A supply graph and a demand graph on the same vertex set."""

    supply: Graph
    demand: Graph

    def __post_init__(self):
        if self.supply.n != self.demand.n:
            raise GraphError("supply and demand graphs must share the vertex set")

    @property
    def n(self) -> int:
        return self.supply.n


@dataclass(frozen=True)
class Instance:
    """A multiflow instance ``(G, H, c, D)``."""

    supply: Graph
    demand: Graph
    capacities: tuple[Fraction, ...]
    demands: tuple[Fraction, ...]

    def __post_init__(self):
        if self.supply.n != self.demand.n:
            raise GraphError("supply and demand graphs must share the vertex set")
        caps = tuple(as_fraction(c) for c in self.capacities)
        dems = tuple(as_fraction(d) for d in self.demands)
        if len(caps) != self.supply.m:
            raise GraphError("every supply edge needs exactly one capacity")
        if len(dems) != self.demand.m:
            raise GraphError("every demand edge needs exactly one demand")
        if any(c < 0 for c in caps) or any(d < 0 for d in dems):
            raise GraphError("capacities and demands must be nonnegative")
        object.__setattr__(self, "capacities", caps)
        object.__setattr__(self, "demands", dems)

    @classmethod
    def build(cls, n: int, supply: Sequence, demand: Sequence) -> "Instance":
        """Build from ``(a, b, weight)`` triples."""
        return cls(
            Graph(n, tuple((a, b) for a, b, _ in supply)),
            Graph(n, tuple((a, b) for a, b, _ in demand)),
            tuple(w for _, _, w in supply),
            tuple(w for _, _, w in demand),
        )

    @property
    def n(self) -> int:
        return self.supply.n

    @property
    def pair(self) -> Pair:
        return Pair(self.supply, self.demand)

    @property
    def total_demand(self) -> Fraction:
        return sum(self.demands, Fraction(0))

    def scaled(self, cap_factor=1, dem_factor=1) -> "Instance":
        cf, df = as_fraction(cap_factor), as_fraction(dem_factor)
        return Instance(
            self.supply,
            self.demand,
            tuple(c * cf for c in self.capacities),
            tuple(d * df for d in self.demands),
        )

    def with_weights(self, capacities=None, demands=None) -> "Instance":
        return Instance(
            self.supply,
            self.demand,
            self.capacities if capacities is None else tuple(capacities),
            self.demands if demands is None else tuple(demands),
        )

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.capacities) and all(
            d.denominator == 1 for d in self.demands
        )


def _crosses(edge: Edge, mask: int) -> bool:
    return ((mask >> edge[0]) ^ (mask >> edge[1])) & 1 == 1


def surplus(instance: Instance, side: Iterable[int]) -> Fraction:
    """Capacity crossing the cut minus demand crossing it."""
    mask = vertex_mask(side, instance.n)
    return surplus_of_mask(instance, mask)


def surplus_of_mask(instance: Instance, mask: int) -> Fraction:
    total = Fraction(0)
    for e, c in zip(instance.supply.edges, instance.capacities):
        if _crosses(e, mask):
            total += c
    for e, d in zip(instance.demand.edges, instance.demands):
        if _crosses(e, mask):
            total -= d
    return total


def pair_surplus(instance: Instance, xs: Iterable[int], ys: Iterable[int]) -> Fraction:
    """Surplus between two disjoint vertex sets."""
    xm = vertex_mask(xs, instance.n)
    ym = vertex_mask(ys, instance.n)
    if xm & ym:
        raise GraphError("pair_surplus needs disjoint vertex sets")

    def between(e: Edge) -> bool:
        a, b = 1 << e[0], 1 << e[1]
        return bool((a & xm and b & ym) or (a & ym and b & xm))

    total = Fraction(0)
    for e, c in zip(instance.supply.edges, instance.capacities):
        if between(e):
            total += c
    for e, d in zip(instance.demand.edges, instance.demands):
        if between(e):
            total -= d
    return total


@dataclass(frozen=True)
class Cut:
    side: frozenset[int]
    crossing_supply: tuple[int, ...]
    crossing_demand: tuple[int, ...]
    surplus: Fraction

    @property
    def mask(self) -> int:
        return vertex_mask(self.side, 1 + max(self.side, default=0))


def make_cut(instance: Instance, side: Iterable[int]) -> Cut:
    mask = vertex_mask(side, instance.n)
    cs = tuple(i for i, e in enumerate(instance.supply.edges) if _crosses(e, mask))
    cd = tuple(i for i, e in enumerate(instance.demand.edges) if _crosses(e, mask))
    value = sum((instance.capacities[i] for i in cs), Fraction(0)) - sum(
        (instance.demands[i] for i in cd), Fraction(0)
    )
    return Cut(frozenset(mask_vertices(mask)), cs, cd, value)


def canonical_side(mask: int, n: int) -> int:
    """Representative of ``{C, V - C}``: the smaller side, ties by sorted vertex tuple."""
    full = (1 << n) - 1
    comp = full & ~mask
    a = (bin(mask).count("1"), mask_vertices(mask))
    b = (bin(comp).count("1"), mask_vertices(comp))
    return mask if a <= b else comp


def is_central(graph_or_instance, side: Iterable[int]) -> bool:
    """Both sides of the cut induce connected subgraphs of the supply graph."""
    graph = graph_or_instance.supply if isinstance(graph_or_instance, Instance) else graph_or_instance
    mask = vertex_mask(side, graph.n)
    full = (1 << graph.n) - 1
    if mask == 0 or mask == full:
        raise GraphError("a central cut needs a nonempty proper side")
    return graph.is_connected(mask) and graph.is_connected(full & ~mask)


# ---------------------------------------------------------------------------
# Pair minors

CONTRACT = "contract-supply-edge"
DELETE_SUPPLY = "delete-supply-edge"
DELETE_DEMAND = "delete-demand-edge"
STEP_KINDS = (CONTRACT, DELETE_SUPPLY, DELETE_DEMAND)


@dataclass(frozen=True)
class MinorStep:
    kind: str
    edge: int

    def __post_init__(self):
        if self.kind not in STEP_KINDS:
            raise ValueError(f"unknown minor step kind {self.kind!r}")


@dataclass
class MinorTrace:
    """Provenance of a minor: where each current object came from."""

    vertex_map: list[int]  # original vertex -> current vertex
    supply_origin: list[int]  # current supply edge -> original edge id
    demand_origin: list[int]
    contracted: set[int] = field(default_factory=set)  # original supply ids
    deleted_supply: set[int] = field(default_factory=set)
    deleted_demand: set[int] = field(default_factory=set)

    @classmethod
    def identity(cls, pair: Pair) -> "MinorTrace":
        return cls(list(range(pair.n)), list(range(pair.supply.m)), list(range(pair.demand.m)))


def _contract_relabel(n: int, a: int, b: int) -> list[int]:
    """Vertex relabeling when ``b`` is merged into ``a`` (``a < b``)."""
    out = []
    for x in range(n):
        if x == b:
            out.append(a)
        elif x > b:
            out.append(x - 1)
        else:
            out.append(x)
    return out


def apply_minor_step(pair: Pair, step: MinorStep, trace: MinorTrace | None = None) -> Pair:
    """Apply one contraction/deletion; updates ``trace`` in place when given."""
    if step.kind == DELETE_DEMAND:
        if not 0 <= step.edge < pair.demand.m:
            raise GraphError(f"no demand edge {step.edge}")
        if trace is not None:
            trace.deleted_demand.add(trace.demand_origin.pop(step.edge))
        return Pair(pair.supply, pair.demand.without_edges([step.edge]))
    if not 0 <= step.edge < pair.supply.m:
        raise GraphError(f"no supply edge {step.edge}")
    if step.kind == DELETE_SUPPLY:
        if trace is not None:
            trace.deleted_supply.add(trace.supply_origin.pop(step.edge))
        return Pair(pair.supply.without_edges([step.edge]), pair.demand)

    a, b = pair.supply.edges[step.edge]
    relabel = _contract_relabel(pair.n, a, b)
    n2 = pair.n - 1

    def remap(graph: Graph, origin: list[int] | None, skip: int | None, sink: set | None):
        kept, kept_origin = [], []
        for i, (x, y) in enumerate(graph.edges):
            x2, y2 = relabel[x], relabel[y]
            if i == skip:
                continue
            if x2 == y2:
                if origin is not None and sink is not None:
                    sink.add(origin[i])
                continue
            kept.append((x2, y2))
            if origin is not None:
                kept_origin.append(origin[i])
        return Graph(n2, tuple(kept)), kept_origin

    if trace is not None:
        trace.contracted.add(trace.supply_origin[step.edge])
        supply, s_origin = remap(pair.supply, trace.supply_origin, step.edge, trace.contracted)
        demand, d_origin = remap(pair.demand, trace.demand_origin, None, trace.deleted_demand)
        trace.supply_origin = s_origin
        trace.demand_origin = d_origin
        trace.vertex_map = [relabel[v] for v in trace.vertex_map]
    else:
        supply, _ = remap(pair.supply, None, step.edge, None)
        demand, _ = remap(pair.demand, None, None, None)
    return Pair(supply, demand)


def apply_minor_steps(pair: Pair, steps: Iterable[MinorStep]) -> tuple[Pair, MinorTrace]:
    trace = MinorTrace.identity(pair)
    for step in steps:
        pair = apply_minor_step(pair, step, trace)
    return pair, trace


def pullback_instance(pair: Pair, steps: Sequence[MinorStep], minor: Instance) -> Instance:
    """Lift weights of a minor instance back onto ``pair``.

    Deleted objects get weight 0, contracted supply edges get
    ``1 + total demand`` so they never bind, survivors copy the minor's weight.
    """
    reached, trace = apply_minor_steps(pair, steps)
    if reached.supply.edges != minor.supply.edges or reached.demand.edges != minor.demand.edges:
        raise GraphError("minor instance does not match the replayed minor")
    big = 1 + minor.total_demand
    caps = [Fraction(0)] * pair.supply.m
    dems = [Fraction(0)] * pair.demand.m
    for orig in trace.contracted:
        caps[orig] = big
    for cur, orig in enumerate(trace.supply_origin):
        caps[orig] = minor.capacities[cur]
    for cur, orig in enumerate(trace.demand_origin):
        dems[orig] = minor.demands[cur]
    return Instance(pair.supply, pair.demand, tuple(caps), tuple(dems))


# ---------------------------------------------------------------------------
# Canonical form of small pairs (colour refinement + individualisation)

CANONICAL_MAX_VERTICES = 16


def _multiplicity(graph: Graph) -> list[list[int]]:
    mat = [[0] * graph.n for _ in range(graph.n)]
    for a, b in graph.edges:
        mat[a][b] += 1
        mat[b][a] += 1
    return mat


def _refine(colors: list[int], smat, dmat) -> list[int]:
    n = len(colors)
    while True:
        sigs = []
        for v in range(n):
            nb = sorted(
                (colors[u], smat[v][u], dmat[v][u])
                for u in range(n)
                if u != v and (smat[v][u] or dmat[v][u])
            )
            sigs.append((colors[v], tuple(nb)))
        order = sorted(set(sigs))
        rank = {s: i for i, s in enumerate(order)}
        new = [rank[s] for s in sigs]
        if len(order) == len(set(colors)):
            return new
        colors = new


def canonical_form(pair: Pair):
    """Isomorphism-invariant label of a (supply, demand) pair.

    Two pairs get equal labels iff they are isomorphic as edge-coloured
    multigraphs.  Exhaustive over the refinement tree, hence the size guard.
    """
    n = pair.n
    if n > CANONICAL_MAX_VERTICES:
        raise GraphError(f"canonical_form supports at most {CANONICAL_MAX_VERTICES} vertices")
    smat = _multiplicity(pair.supply)
    dmat = _multiplicity(pair.demand)
    best = None

    def encode(colors):
        order = sorted(range(n), key=lambda v: colors[v])
        return tuple(tuple(smat[a][b] for b in order) for a in order) + tuple(
            tuple(dmat[a][b] for b in order) for a in order
        )

    def search(colors):
        nonlocal best
        colors = _refine(colors, smat, dmat)
        counts: dict[int, int] = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        target = next((c for c in sorted(counts) if counts[c] > 1), None)
        if target is None:
            code = encode(colors)
            if best is None or code < best:
                best = code
            return
        for v in range(n):
            if colors[v] != target:
                continue
            # individualise v: it keeps a colour strictly below the rest of its cell
            indiv = [2 * c + (1 if (c == target and u != v) else 0) for u, c in enumerate(colors)]
            search(indiv)

    search([0] * n)
    return (n, best)

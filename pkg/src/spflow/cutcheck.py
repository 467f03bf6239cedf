"""Cut condition, Eulerian parity, tight cuts and bubbles."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm

import numpy as np

from .core import (
    Cut,
    Graph,
    GraphError,
    Instance,
    canonical_side,
    make_cut,
    mask_vertices,
)
from .spgraph import EDGE, SERIES, SpNode, is_biconnected, recognize_series_parallel, NotSeriesParallelError

BRUTE_FORCE_MAX = 20
PATH_GUARD = 100_000
TIGHT_CAP = 10_000


@dataclass(frozen=True)
class CutReport:
    satisfied: bool
    worst_cut: Cut | None
    min_surplus: Fraction
    tight_cuts: tuple[Cut, ...]
    engine: str


@dataclass(frozen=True)
class Bubble:
    demand: int
    side: frozenset[int]


# ---------------------------------------------------------------------------
# Enumeration


def connected_sets(graph: Graph, root: int, within: int | None = None):
    """Yield every connected vertex set (bitmask) containing ``root``, once each."""
    if within is None:
        within = (1 << graph.n) - 1
    nbr = graph.neighbor_masks

    def grow(current, candidates, excluded):
        yield current
        cands = candidates
        while cands:
            low = cands & -cands
            v = low.bit_length() - 1
            cands ^= low
            excluded |= low
            ext = (nbr[v] & within) & ~current & ~excluded
            yield from grow(current | low, cands | ext, excluded)

    start = 1 << root
    yield from grow(start, nbr[root] & within & ~start, start)


@lru_cache(maxsize=256)
def _central_sides(graph: Graph) -> np.ndarray:
    """Sides containing vertex 0 of all central cuts of a connected graph."""
    full = (1 << graph.n) - 1
    out = []
    for mask in connected_sets(graph, 0):
        if mask != full and graph.is_connected(full & ~mask):
            out.append(mask)
    out.sort()
    return np.array(out, dtype=np.int64)


def central_sides(graph: Graph) -> np.ndarray:
    if graph.n > BRUTE_FORCE_MAX:
        raise GraphError(f"enumeration is limited to {BRUTE_FORCE_MAX} vertices")
    if not graph.is_connected():
        raise GraphError("central cuts need a connected supply graph")
    if graph.n < 2:
        return np.zeros(0, dtype=np.int64)
    return _central_sides(graph)


@lru_cache(maxsize=64)
def _all_sides(n: int) -> np.ndarray:
    # every proper side containing vertex 0
    return np.arange(1, 1 << n, 2, dtype=np.int64)[:-1] if n > 1 else np.zeros(0, dtype=np.int64)


def _scale(instance: Instance) -> tuple[int, list[int], list[int]]:
    dens = [x.denominator for x in instance.capacities + instance.demands] or [1]
    k = lcm(*dens)
    caps = [int(c * k) for c in instance.capacities]
    dems = [int(d * k) for d in instance.demands]
    if sum(caps) + sum(dems) >= 1 << 62:
        raise OverflowError("weights too large for the vectorised cut engine")
    return k, caps, dems


def crossing_totals(instance: Instance, sides: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Scaled crossing capacity and crossing demand per side; divide by the factor."""
    k, caps, dems = _scale(instance)
    cap = np.zeros(len(sides), dtype=np.int64)
    dem = np.zeros(len(sides), dtype=np.int64)
    for (a, b), c in zip(instance.supply.edges, caps):
        if c:
            cap += c * (((sides >> a) ^ (sides >> b)) & 1)
    for (a, b), d in zip(instance.demand.edges, dems):
        if d:
            dem += d * (((sides >> a) ^ (sides >> b)) & 1)
    return cap, dem, k


def surplus_vector(instance: Instance, sides: np.ndarray) -> tuple[np.ndarray, int]:
    """Scaled surpluses of the given sides; divide by the returned factor."""
    k, caps, dems = _scale(instance)
    total = np.zeros(len(sides), dtype=np.int64)
    for (a, b), c in zip(instance.supply.edges, caps):
        if c:
            total += c * (((sides >> a) ^ (sides >> b)) & 1)
    for (a, b), d in zip(instance.demand.edges, dems):
        if d:
            total -= d * (((sides >> a) ^ (sides >> b)) & 1)
    return total, k


def _brute_force(instance: Instance, tight_cap: int) -> CutReport:
    g = instance.supply
    connected = g.is_connected()
    sides = central_sides(g) if connected else _all_sides(g.n)
    if len(sides) == 0:
        return CutReport(True, None, Fraction(0), (), "brute-force")
    values, k = surplus_vector(instance, sides)
    best = int(values.min())
    # canonical representatives of the minimisers, smallest by (size, vertices)
    reps = (canonical_side(int(m), g.n) for m in sides[values == best])
    worst = make_cut(instance, mask_vertices(min(reps, key=lambda m: (bin(m).count("1"), mask_vertices(m)))))
    tight = []
    if connected:
        masks = [canonical_side(int(m), g.n) for m in sides[values == 0]]
        masks.sort(key=lambda m: (bin(m).count("1"), mask_vertices(m)))
        tight = [make_cut(instance, mask_vertices(m)) for m in masks[:tight_cap]]
    return CutReport(
        best >= 0, worst, Fraction(best, k), tuple(tight), "brute-force" if connected else "brute-force-all-cuts"
    )


# ---------------------------------------------------------------------------
# Dynamic program over the decomposition tree


def _postorder(root: SpNode) -> list[SpNode]:
    out, stack = [], [(root, False)]
    while stack:
        node, done = stack.pop()
        if done or node.kind == EDGE:
            out.append(node)
            continue
        stack.append((node, True))
        for c in reversed(node.children):
            stack.append((c, False))
    return out


def tree_min_surplus(instance: Instance, root: SpNode) -> tuple[Fraction, int]:
    """Minimum surplus over central cuts and a minimising side (containing vertex 0)."""
    order = _postorder(root)
    index = {id(x): i for i, x in enumerate(order)}
    vmask: dict[int, int] = {}
    start: dict[int, int] = {}
    for i, node in enumerate(order):
        if node.kind == EDGE:
            vmask[id(node)] = (1 << node.s) | (1 << node.t)
            start[id(node)] = i
        else:
            vmask[id(node)] = vmask[id(node.children[0])] | vmask[id(node.children[1])]
            start[id(node)] = start[id(node.children[0])]

    k, caps, dems = _scale(instance)
    charge_at: dict[int, list[int]] = {}
    charge_idx: list[int] = []
    for j, (a, b) in enumerate(instance.demand.edges):
        both = (1 << a) | (1 << b)
        pos = next(i for i, x in enumerate(order) if vmask[id(x)] & both == both)
        charge_idx.append(pos)
        if dems[j]:
            charge_at.setdefault(pos, []).append(j)

    def need(node: SpNode) -> frozenset[int]:
        i = index[id(node)]
        lo = start[id(node)]
        interior = vmask[id(node)] & ~((1 << node.s) | (1 << node.t))
        out = set()
        for j, (a, b) in enumerate(instance.demand.edges):
            if not dems[j] or lo <= charge_idx[j] <= i:
                continue
            for x in (a, b):
                if interior >> x & 1:
                    out.add(x)
        return frozenset(out)

    # state: (side_s, side_t, sconn, closed0, closed1, tracked) -> (value, mask)
    tables: dict[int, dict] = {}

    def put(table, key, value, mask):
        old = table.get(key)
        if old is None or (value, mask) < old:
            table[key] = (value, mask)

    for i, node in enumerate(order):
        table: dict = {}
        keep = need(node)
        if node.kind == EDGE:
            for x in (0, 1):
                for y in (0, 1):
                    if (node.s == 0 and x != 1) or (node.t == 0 and y != 1):
                        continue
                    val = caps[node.edge] if x != y else 0
                    sides = {node.s: x, node.t: y}
                    for j in charge_at.get(i, ()):
                        a, b = instance.demand.edges[j]
                        if sides[a] != sides[b]:
                            val -= dems[j]
                    mask = (x << node.s) | (y << node.t)
                    put(table, (x, y, x == y, False, False, ()), val, mask)
            tables[id(node)] = table
            continue

        left, right = node.children
        tl, tr = tables.pop(id(left)), tables.pop(id(right))
        for ka, (va, ma) in tl.items():
            for kb, (vb, mb) in tr.items():
                sa, ta, ca, a0, a1, tra = ka
                sb, tb, cb, b0, b1, trb = kb
                if (a0 and b0) or (a1 and b1):
                    continue
                closed = [a0 or b0, a1 or b1]
                if node.kind == SERIES:
                    if ta != sb:
                        continue
                    sm = ta
                    side_s, side_t = sa, tb
                    touches_s = sa == sm and ca
                    touches_t = tb == sm and cb
                    if not touches_s and not touches_t:
                        if closed[sm]:
                            continue
                        closed[sm] = True
                    sconn = side_s == side_t == sm and ca and cb
                    known = {node.s: sa, left.t: sm, node.t: tb}
                else:
                    if (sa, ta) != (sb, tb):
                        continue
                    side_s, side_t = sa, ta
                    sconn = side_s == side_t and (ca or cb)
                    known = {node.s: sa, node.t: ta}
                if (closed[0] and 0 in (side_s, side_t)) or (closed[1] and 1 in (side_s, side_t)):
                    continue
                known.update(tra)
                known.update(trb)
                val = va + vb
                for j in charge_at.get(i, ()):
                    a, b = instance.demand.edges[j]
                    if known[a] != known[b]:
                        val -= dems[j]
                tracked = tuple(sorted((x, known[x]) for x in keep))
                put(
                    table,
                    (side_s, side_t, sconn if side_s == side_t else False, closed[0], closed[1], tracked),
                    val,
                    ma | mb,
                )
        tables[id(node)] = table

    best = None
    for (ss, st, sconn, c0, c1, _), (val, mask) in tables[id(root)].items():
        ok = True
        for x, closed in ((0, c0), (1, c1)):
            count = (ss == x) + (st == x)
            if closed:
                continue
            if count == 0 or (count == 2 and not sconn):
                ok = False
        if ok and (best is None or (val, mask) < best):
            best = (val, mask)
    if best is None:
        raise AssertionError("no central cut found")
    return Fraction(best[0], k), best[1]


# ---------------------------------------------------------------------------
# Public operations


def check_cut_condition(instance: Instance, engine: str = "auto", tight_cap: int = TIGHT_CAP) -> CutReport:
    """Minimum surplus over central cuts, with the worst cut and tight cuts."""
    if engine not in ("auto", "brute-force", "tree"):
        raise ValueError(f"unknown engine {engine!r}")
    n = instance.n
    if n < 2:
        return CutReport(True, None, Fraction(0), (), "trivial")
    if engine == "brute-force" or (engine == "auto" and n <= BRUTE_FORCE_MAX):
        if n > BRUTE_FORCE_MAX:
            raise GraphError(f"brute-force engine is limited to {BRUTE_FORCE_MAX} vertices")
        return _brute_force(instance, tight_cap)
    if not is_biconnected(instance.supply):
        raise GraphError("tree engine needs a biconnected series-parallel supply graph")
    try:
        tree = recognize_series_parallel(instance.supply)
    except NotSeriesParallelError as err:
        raise GraphError("size guard exceeded and the supply graph is not series-parallel") from err
    value, mask = tree_min_surplus(instance, tree.root)
    return CutReport(value >= 0, make_cut(instance, mask_vertices(mask)), value, (), "tree")


def is_eulerian(instance: Instance) -> bool:
    if not instance.is_integral():
        return False
    total = [0] * instance.n
    for (a, b), c in zip(instance.supply.edges, instance.capacities):
        total[a] += int(c)
        total[b] += int(c)
    for (a, b), d in zip(instance.demand.edges, instance.demands):
        total[a] += int(d)
        total[b] += int(d)
    return all(x % 2 == 0 for x in total)


def is_eulerian_by_cuts(instance: Instance) -> bool:
    """Every cut surplus even; exhaustive over all cuts (small graphs)."""
    if not instance.is_integral():
        return False
    if instance.n > 16:
        raise GraphError("cut-parity enumeration is limited to 16 vertices")
    sides = _all_sides(instance.n)
    if len(sides) == 0:
        return True
    values, k = surplus_vector(instance, sides)
    assert k == 1
    return bool(np.all(values % 2 == 0))


def enumerate_tight_central_cuts(instance: Instance, cap: int = TIGHT_CAP) -> list[Cut]:
    if instance.n > BRUTE_FORCE_MAX:
        raise GraphError(f"enumeration is limited to {BRUTE_FORCE_MAX} vertices")
    sides = central_sides(instance.supply)
    if len(sides) == 0:
        return []
    values, _ = surplus_vector(instance, sides)
    masks = [canonical_side(int(m), instance.n) for m in sides[values == 0]]
    masks.sort(key=lambda m: (bin(m).count("1"), mask_vertices(m)))
    return [make_cut(instance, mask_vertices(m)) for m in masks[:cap]]


def bubbles_for(instance: Instance, demand_edge: int) -> list[Bubble]:
    """Central tight sets avoiding both endpoints of the demand."""
    if not 0 <= demand_edge < instance.demand.m:
        raise GraphError(f"no demand edge {demand_edge}")
    u, v = instance.demand.edges[demand_edge]
    full = (1 << instance.n) - 1
    out = []
    for cut in enumerate_tight_central_cuts(instance):
        m = sum(1 << x for x in cut.side)
        for side in (m, full & ~m):
            if not (side >> u & 1 or side >> v & 1):
                out.append(Bubble(demand_edge, frozenset(mask_vertices(side))))
    out.sort(key=lambda b: (len(b.side), sorted(b.side)))
    return out


def simple_paths(graph: Graph, a: int, b: int, guard: int = PATH_GUARD) -> list[tuple[int, ...]]:
    """All simple vertex paths from ``a`` to ``b``."""
    out: list[tuple[int, ...]] = []
    nbr = graph.neighbor_masks
    path = [a]

    def walk(x, used):
        if x == b:
            out.append(tuple(path))
            if len(out) > guard:
                raise GraphError(f"more than {guard} simple paths")
            return
        rest = nbr[x] & ~used
        while rest:
            low = rest & -rest
            y = low.bit_length() - 1
            rest ^= low
            path.append(y)
            walk(y, used | low)
            path.pop()

    walk(a, 1 << a)
    return out


def crossings(path, side_mask: int) -> int:
    return sum(((side_mask >> x) ^ (side_mask >> y)) & 1 for x, y in zip(path, path[1:]))


@dataclass(frozen=True)
class Coverage:
    covered: bool
    uncovered_path: tuple[int, ...] | None
    odd_cut: frozenset[int] | None = None


def is_covered_by_bubbles(instance: Instance, demand_edge: int, assert_odd_cross: bool = False) -> Coverage:
    """Does every simple path between the demand's endpoints cross a bubble?

    With ``assert_odd_cross`` an uncovered path must cross some tight cut an
    odd number of times greater than one; the offending cut is returned.
    """
    u, v = instance.demand.edges[demand_edge]
    masks = [sum(1 << x for x in b.side) for b in bubbles_for(instance, demand_edge)]
    for path in simple_paths(instance.supply, u, v):
        if any(crossings(path, m) for m in masks):
            continue
        odd = None
        if assert_odd_cross:
            for cut in enumerate_tight_central_cuts(instance):
                m = sum(1 << x for x in cut.side)
                c = crossings(path, m)
                if c > 1 and c % 2 == 1:
                    odd = cut.side
                    break
            assert odd is not None, "uncovered path crosses no tight cut an odd number (> 1) of times"
        return Coverage(False, path, odd)
    return Coverage(True, None)

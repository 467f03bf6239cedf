"""Series-parallel structure: recognition, blocks, orientation, terminals, embedding."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

import networkx as nx

from .core import Graph, GraphError

PATH_GUARD = 10_000


class NotSeriesParallelError(GraphError):
    """Raised with a K4 branch-set witness or a cut vertex."""

    def __init__(self, message, k4_branch_sets=None, cut_vertex=None):
        super().__init__(message)
        self.k4_branch_sets = k4_branch_sets
        self.cut_vertex = cut_vertex


# ---------------------------------------------------------------------------
# Blocks


@dataclass(frozen=True)
class Block:
    vertices: frozenset[int]
    edges: tuple[int, ...]


def blocks(graph: Graph) -> tuple[list[Block], set[int]]:
    """Biconnected components (edge-disjoint) and articulation points."""
    n = graph.n
    disc = [-1] * n
    low = [0] * n
    timer = 0
    out: list[Block] = []
    cut_vertices: set[int] = set()
    edge_stack: list[int] = []

    for root in range(n):
        if disc[root] != -1 or not graph.incidence[root]:
            continue
        disc[root] = low[root] = timer
        timer += 1
        root_children = 0
        stack = [(root, -1, iter(graph.incidence[root]))]
        while stack:
            x, parent_edge, it = stack[-1]
            advanced = False
            for y, eid in it:
                if eid == parent_edge:
                    continue
                if disc[y] == -1:
                    edge_stack.append(eid)
                    disc[y] = low[y] = timer
                    timer += 1
                    if x == root:
                        root_children += 1
                    stack.append((y, eid, iter(graph.incidence[y])))
                    advanced = True
                    break
                if disc[y] < disc[x]:
                    edge_stack.append(eid)
                    low[x] = min(low[x], disc[y])
            if advanced:
                continue
            stack.pop()
            if not stack:
                continue
            p = stack[-1][0]
            low[p] = min(low[p], low[x])
            if low[x] >= disc[p]:
                if p != root:
                    cut_vertices.add(p)
                comp = []
                while True:
                    e = edge_stack.pop()
                    comp.append(e)
                    if e == parent_edge:
                        break
                verts = set()
                for e in comp:
                    verts.update(graph.edges[e])
                out.append(Block(frozenset(verts), tuple(sorted(comp))))
        if root_children > 1:
            cut_vertices.add(root)
    out.sort(key=lambda b: min(b.edges))
    return out, cut_vertices


def is_biconnected(graph: Graph) -> bool:
    if graph.n < 2 or not graph.is_connected():
        return False
    bl, _ = blocks(graph)
    return len(bl) == 1 and len(bl[0].vertices) == graph.n


# ---------------------------------------------------------------------------
# K4 minors


def has_k4_minor(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    """Treewidth-two reduction: K4-minor-free iff everything reduces away."""
    nbr: dict[int, set[int]] = {v: set() for v in range(n)}
    for a, b in edges:
        if a != b:
            nbr[a].add(b)
            nbr[b].add(a)
    queue = deque(v for v in nbr if len(nbr[v]) <= 2)
    while queue:
        x = queue.popleft()
        if x not in nbr or len(nbr[x]) > 2:
            continue
        ns = list(nbr.pop(x))
        for y in ns:
            nbr[y].discard(x)
        if len(ns) == 2:
            a, b = ns
            nbr[a].add(b)
            nbr[b].add(a)
        for y in ns:
            if len(nbr[y]) <= 2:
                queue.append(y)
    return bool(nbr)


def k4_witness(graph: Graph) -> list[frozenset[int]]:
    """Four connected, pairwise adjacent branch sets of a K4 minor."""
    if not has_k4_minor(graph.n, graph.edges):
        raise GraphError("graph has no K4 minor")
    owner = list(range(graph.n))  # original vertex -> current label
    edges = [tuple(e) for e in graph.edges]
    i = 0
    while i < len(edges):
        trial = edges[:i] + edges[i + 1:]
        if has_k4_minor(graph.n, trial):
            edges = trial
            continue
        a, b = edges[i]
        merged = [(a if x == b else x, a if y == b else y) for x, y in trial]
        merged = [e for e in merged if e[0] != e[1]]
        if has_k4_minor(graph.n, merged):
            owner = [a if o == b else o for o in owner]
            edges = merged
            i = 0
            continue
        i += 1
    labels = sorted({x for e in edges for x in e})
    sets = [frozenset(v for v in range(graph.n) if owner[v] == lab) for lab in labels]
    if not verify_k4_witness(graph, sets):
        raise AssertionError("K4 witness failed verification")
    return sorted(sets, key=min)


def verify_k4_witness(graph: Graph, sets: Sequence[frozenset[int]]) -> bool:
    if len(sets) != 4:
        return False
    seen: set[int] = set()
    for s in sets:
        if not s or seen & s:
            return False
        seen |= s
        mask = sum(1 << v for v in s)
        if not graph.is_connected(mask):
            return False
    for i in range(4):
        for j in range(i + 1, 4):
            if not any(
                (a in sets[i] and b in sets[j]) or (b in sets[i] and a in sets[j])
                for a, b in graph.edges
            ):
                return False
    return True


# ---------------------------------------------------------------------------
# Decomposition trees

EDGE, SERIES, PARALLEL = "edge", "series", "parallel"


@dataclass(frozen=True)
class SpNode:
    kind: str
    s: int
    t: int
    children: tuple["SpNode", ...] = ()
    edge: int | None = None

    def flipped(self) -> "SpNode":
        if self.kind == EDGE:
            return SpNode(EDGE, self.t, self.s, (), self.edge)
        kids = tuple(c.flipped() for c in self.children)
        if self.kind == SERIES:
            kids = kids[::-1]
        return SpNode(self.kind, self.t, self.s, kids)

    def leaves(self) -> list["SpNode"]:
        out, stack = [], [self]
        while stack:
            x = stack.pop()
            if x.kind == EDGE:
                out.append(x)
            else:
                stack.extend(reversed(x.children))
        return out

    def evaluate(self) -> list[tuple[int, int, int]]:
        """Oriented leaves as ``(edge_id, tail, head)``."""
        return [(x.edge, x.s, x.t) for x in self.leaves()]

    def check(self) -> None:
        if self.kind == SERIES:
            a, b = self.children
            assert a.s == self.s and a.t == b.s and b.t == self.t
        elif self.kind == PARALLEL:
            for c in self.children:
                assert (c.s, c.t) == (self.s, self.t)
        for c in self.children:
            c.check()


@dataclass(frozen=True)
class SpTree:
    graph: Graph
    root: SpNode

    def evaluate(self) -> list[tuple[int, int]]:
        return [self.graph.edges[e] for e, _, _ in self.root.evaluate()]


def _reduce(graph: Graph, protected: frozenset[int]):
    """Series/parallel reduction; returns remaining virtual edges {id: node}."""
    virtual: dict[int, SpNode] = {}
    at: dict[int, set[int]] = {v: set() for v in range(graph.n)}
    for i, (a, b) in enumerate(graph.edges):
        virtual[i] = SpNode(EDGE, a, b, (), i)
        at[a].add(i)
        at[b].add(i)
    next_id = graph.m

    def add(node: SpNode) -> None:
        nonlocal next_id
        virtual[next_id] = node
        at[node.s].add(next_id)
        at[node.t].add(next_id)
        next_id += 1

    def remove(i: int) -> SpNode:
        node = virtual.pop(i)
        at[node.s].discard(i)
        at[node.t].discard(i)
        return node

    changed = True
    while changed:
        changed = False
        groups: dict[tuple[int, int], list[int]] = {}
        for i in sorted(virtual):
            node = virtual[i]
            groups.setdefault((min(node.s, node.t), max(node.s, node.t)), []).append(i)
        for ids in groups.values():
            if len(ids) < 2:
                continue
            first = remove(ids[0])
            for j in ids[1:]:
                other = remove(j)
                if other.s != first.s:
                    other = other.flipped()
                first = SpNode(PARALLEL, first.s, first.t, (first, other))
            add(first)
            changed = True
        if changed:
            continue
        for x in range(graph.n):
            if x in protected or len(at[x]) != 2:
                continue
            i, j = sorted(at[x])
            e1, e2 = virtual[i], virtual[j]
            a = e1.s if e1.t == x else e1.t
            b = e2.t if e2.s == x else e2.s
            if a == b:
                continue
            e1, e2 = remove(i), remove(j)
            if e1.t != x:
                e1 = e1.flipped()
            if e2.s != x:
                e2 = e2.flipped()
            add(SpNode(SERIES, a, b, (e1, e2)))
            changed = True
            break
    return virtual


def recognize_series_parallel(graph: Graph, terminals: tuple[int, int] | None = None) -> SpTree:
    """Decomposition tree of a biconnected series-parallel graph.

    With ``terminals=(s, t)`` the root is an ``s``-``t`` node, which exists
    iff ``(s, t)`` is a split pair.  Raises :class:`NotSeriesParallelError`.
    """
    if graph.m == 0:
        raise GraphError("graph has no edges")
    if not graph.is_connected():
        raise GraphError("graph is disconnected")
    if has_k4_minor(graph.n, graph.edges):
        raise NotSeriesParallelError("graph contains a K4 minor", k4_branch_sets=k4_witness(graph))
    _, cuts = blocks(graph)
    if cuts:
        c = min(cuts)
        raise NotSeriesParallelError(f"vertex {c} is a cut vertex", cut_vertex=c)
    protected = frozenset(terminals) if terminals else frozenset()
    left = _reduce(graph, protected)
    if len(left) != 1:
        if terminals:
            raise GraphError(f"{terminals} is not a split pair")
        raise AssertionError("reduction stalled on a K4-minor-free biconnected graph")
    root = next(iter(left.values()))
    if terminals:
        s, t = terminals
        if {root.s, root.t} != {s, t}:
            raise GraphError(f"{terminals} is not a split pair")
        if root.s != s:
            root = root.flipped()
    elif root.s > root.t:
        root = root.flipped()
    root.check()
    return SpTree(graph, root)


def is_series_parallel(graph: Graph) -> bool:
    """Connected and K4-minor-free (each block series-parallel)."""
    return graph.m > 0 and graph.is_connected() and not has_k4_minor(graph.n, graph.edges)


def is_split_pair(graph: Graph, s: int, t: int) -> bool:
    if s == t:
        raise GraphError("a split pair needs two distinct vertices")
    for x in (s, t):
        if not 0 <= x < graph.n:
            raise GraphError(f"unknown vertex {x}")
    return not has_k4_minor(graph.n, list(graph.edges) + [(s, t)])


# ---------------------------------------------------------------------------
# Orientation


@dataclass(frozen=True)
class Orientation:
    graph: Graph
    s: int
    t: int
    arcs: tuple[tuple[int, int], ...]  # per edge id: (tail, head)

    @cached_property
    def out_arcs(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.graph.n)]
        for tail, head in self.arcs:
            out[tail].append(head)
        return tuple(tuple(sorted(set(x))) for x in out)

    @cached_property
    def in_arcs(self) -> tuple[tuple[int, ...], ...]:
        inn: list[list[int]] = [[] for _ in range(self.graph.n)]
        for tail, head in self.arcs:
            inn[head].append(tail)
        return tuple(tuple(sorted(set(x))) for x in inn)

    def descendants(self, x: int) -> set[int]:
        seen = {x}
        stack = [x]
        while stack:
            y = stack.pop()
            for z in self.out_arcs[y]:
                if z not in seen:
                    seen.add(z)
                    stack.append(z)
        return seen

    def reaches(self, a: int, b: int) -> bool:
        return b in self.descendants(a)

    def directed_paths(self, a: int, b: int, guard: int = PATH_GUARD) -> list[tuple[int, ...]]:
        """All directed ``a`` -> ``b`` paths, at most ``guard`` of them."""
        useful = {x for x in self.descendants(a) if self.reaches(x, b)}
        if b not in useful:
            return []
        out: list[tuple[int, ...]] = []

        def walk(path):
            x = path[-1]
            if x == b:
                out.append(tuple(path))
                if len(out) > guard:
                    raise GraphError(f"more than {guard} directed paths")
                return
            for y in self.out_arcs[x]:
                if y in useful:
                    path.append(y)
                    walk(path)
                    path.pop()

        walk([a])
        return out

    def sources(self) -> list[int]:
        return [v for v in range(self.graph.n) if self.graph.incidence[v] and not self.in_arcs[v]]

    def sinks(self) -> list[int]:
        return [v for v in range(self.graph.n) if self.graph.incidence[v] and not self.out_arcs[v]]

    def is_acyclic(self) -> bool:
        indeg = [len([1 for _, h in self.arcs if h == v]) for v in range(self.graph.n)]
        queue = deque(v for v in range(self.graph.n) if indeg[v] == 0)
        seen = 0
        succ: list[list[int]] = [[] for _ in range(self.graph.n)]
        for tail, head in self.arcs:
            succ[tail].append(head)
        while queue:
            x = queue.popleft()
            seen += 1
            for y in succ[x]:
                indeg[y] -= 1
                if indeg[y] == 0:
                    queue.append(y)
        return seen == self.graph.n


def orient(graph: Graph, s: int, t: int) -> Orientation:
    """The acyclic orientation with ``s`` the unique source and ``t`` the unique sink."""
    if not is_biconnected(graph):
        raise GraphError("orientation needs a biconnected graph")
    if not is_split_pair(graph, s, t):
        raise GraphError(f"({s},{t}) is not a split pair")
    tree = recognize_series_parallel(graph, terminals=(s, t))
    arcs: list[tuple[int, int] | None] = [None] * graph.m
    for eid, tail, head in tree.root.evaluate():
        arcs[eid] = (tail, head)
    result = Orientation(graph, s, t, tuple(arcs))  # type: ignore[arg-type]
    assert result.sources() == [s] and result.sinks() == [t] and result.is_acyclic()
    return result


def is_compliant(orientation: Orientation, u: int, v: int) -> bool:
    if u == v:
        raise GraphError("compliance needs two distinct vertices")
    return orientation.reaches(u, v) or orientation.reaches(v, u)


@dataclass(frozen=True)
class TerminalPair:
    u: int
    v: int
    w: int
    z: int


def _separates(graph: Graph, w: int, z: int, a: int, b: int) -> bool:
    return b not in graph.reachable(a, blocked=(w, z))


def terminals_of(orientation: Orientation, u: int, v: int, guard: int = PATH_GUARD) -> TerminalPair:
    """Terminals ``(w, z)`` of a non-compliant pair, checked over all path choices."""
    if is_compliant(orientation, u, v):
        raise GraphError(f"({u},{v}) is compliant")
    s, t = orientation.s, orientation.t
    su = orientation.directed_paths(s, u, guard)
    sv = orientation.directed_paths(s, v, guard)
    ut = orientation.directed_paths(u, t, guard)
    vt = orientation.directed_paths(v, t, guard)
    if len(su) * len(sv) > guard or len(ut) * len(vt) > guard:
        raise GraphError("too many path combinations for the exhaustive terminal sweep")
    ws = set()
    for p, q in product(su, sv):
        common = set(p) & set(q)
        ws.add(max(common, key=p.index))
    zs = set()
    for p, q in product(ut, vt):
        common = set(p) & set(q)
        zs.add(min(common, key=p.index))
    assert len(ws) == 1 and len(zs) == 1, "terminals depend on the path choice"
    w, z = ws.pop(), zs.pop()
    assert _separates(orientation.graph, w, z, u, v)
    return TerminalPair(u, v, w, z)


def brackets(orientation: Orientation, outer: tuple[int, int], inner: tuple[int, int]) -> bool:
    """Some directed path from ``outer[0]`` to ``outer[1]`` visits both inner vertices."""
    w, z = outer
    x, y = inner
    r = orientation.reaches
    return (r(w, x) and r(x, y) and r(y, z)) or (r(w, y) and r(y, x) and r(x, z))


# ---------------------------------------------------------------------------
# Paths through a vertex or an edge


def _bfs_path(graph: Graph, a: int, b: int, blocked: Iterable[int] = ()) -> list[int] | None:
    blocked = set(blocked)
    prev = {a: None}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        if x == b:
            break
        for y, _ in graph.incidence[x]:
            if y not in prev and y not in blocked:
                prev[y] = x
                queue.append(y)
    if b not in prev:
        return None
    path = [b]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def _simple_nx(graph: Graph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(graph.n))
    g.add_edges_from(graph.edges)
    return g


def _through_vertex(graph: Graph, s: int, t: int, u: int) -> list[int]:
    p1, p2 = [list(p) for p in nx.node_disjoint_paths(_simple_nx(graph), s, u)][:2]
    path = _bfs_path(graph, u, t, blocked=(s,))
    assert path is not None
    for first in (p1, p2):
        if not set(path[1:]) & set(first):
            return first + path[1:]
    # last vertex of the u->t path lying on p1 or p2
    on = set(p1[1:-1]) | set(p2[1:-1])
    k = max(i for i, x in enumerate(path) if x in on)
    w = path[k]
    other, mine = (p1, p2) if w in p2 else (p2, p1)
    # other: s..u avoiding w; then back along mine from u to w; then path from w to t
    back = mine[mine.index(w):][::-1]  # u .. w
    return other + back[1:] + path[k + 1:]


def _is_simple_path(graph: Graph, path: Sequence[int]) -> bool:
    if len(set(path)) != len(path):
        return False
    nbr = graph.neighbor_masks
    return all(nbr[a] >> b & 1 for a, b in zip(path, path[1:]))


def path_containing(graph: Graph, s: int, t: int, via) -> list[int]:
    """Simple ``s``-``t`` path through a vertex, or through an edge ``(a, b)``."""
    if not is_biconnected(graph):
        raise GraphError("path_containing needs a biconnected graph")
    if s == t:
        raise GraphError("s and t must differ")
    if isinstance(via, tuple):
        a, b = via
        if not graph.neighbor_masks[a] >> b & 1:
            raise GraphError(f"({a},{b}) is not an edge")
        result = _through_edge(graph, s, t, a, b)
        pos = {x: i for i, x in enumerate(result)}
        assert a in pos and b in pos and abs(pos[a] - pos[b]) == 1
    else:
        if via in (s, t):
            raise GraphError("s, t and the via vertex must be distinct")
        result = _through_vertex(graph, s, t, via)
        assert via in result
    assert result[0] == s and result[-1] == t and _is_simple_path(graph, result)
    return result


def _through_edge(graph: Graph, s: int, t: int, u: int, v: int) -> list[int]:
    if {u, v} == {s, t}:
        return [s, t]
    if u in (s, t) or v in (s, t):
        if v in (s, t):
            u, v = v, u
        # u is an endpoint of the requested path
        if u == s:
            rest = _bfs_path(graph, v, t, blocked=(s,))
            return [s] + rest
        rest = _bfs_path(graph, s, v, blocked=(t,))
        return rest + [t]
    p_u = _through_vertex(graph, s, t, u)
    p_v = _through_vertex(graph, s, t, v)
    if v in p_u:
        i, j = p_u.index(u), p_u.index(v)
        lo, hi = min(i, j), max(i, j)
        return p_u[: lo + 1] + p_u[hi:]
    if u in p_v:
        i, j = p_v.index(u), p_v.index(v)
        lo, hi = min(i, j), max(i, j)
        return p_v[: lo + 1] + p_v[hi:]
    iu, iv = p_u.index(u), p_v.index(v)
    common = set(p_u) & set(p_v)
    w = min(common, key=lambda x: (abs(p_u.index(x) - iu), p_u.index(x)))
    k_u, k_v = p_u.index(w), p_v.index(w)
    seg = p_u[min(k_u, iu): max(k_u, iu) + 1]
    if k_u > iu:
        seg = seg[::-1]  # w .. u
    if k_v < iv:
        return p_v[:k_v] + seg + p_v[iv:]
    # w lies after v on p_v
    return p_v[: iv + 1] + seg[::-1] + p_v[k_v + 1:]


# ---------------------------------------------------------------------------
# Planar embedding with two prescribed outer vertices

PHANTOM = -1


@dataclass(frozen=True)
class PlanarEmbedding:
    """Rotation system: clockwise edge ids per vertex.

    The phantom ``u``-``v`` edge is kept as the marker ``PHANTOM`` in the
    rotations of ``u`` and ``v``; the outer face is the one it was removed from.
    """

    graph: Graph
    u: int
    v: int
    rotation: tuple[tuple[int, ...], ...]

    def real_rotation(self, x: int) -> tuple[int, ...]:
        return tuple(e for e in self.rotation[x] if e != PHANTOM)

    def _next_dart(self, x: int, e: int) -> tuple[int, int]:
        y = self.graph.other(e, x)
        rot = self.real_rotation(y)
        k = rot.index(e)
        return y, rot[(k - 1) % len(rot)]

    def trace_face(self, x: int, e: int) -> list[tuple[int, int]]:
        darts = [(x, e)]
        cur = self._next_dart(x, e)
        while cur != (x, e):
            darts.append(cur)
            cur = self._next_dart(*cur)
        return darts

    def faces(self) -> list[list[tuple[int, int]]]:
        seen: set[tuple[int, int]] = set()
        out = []
        for x in range(self.graph.n):
            for e in self.real_rotation(x):
                if (x, e) in seen:
                    continue
                face = self.trace_face(x, e)
                seen.update(face)
                out.append(face)
        return out

    def outer_dart(self) -> tuple[int, int]:
        rot = self.rotation[self.u]
        k = rot.index(PHANTOM)
        return self.u, rot[(k - 1) % len(rot)]

    def outer_face(self) -> list[tuple[int, int]]:
        return self.trace_face(*self.outer_dart())

    def outer_vertices(self) -> set[int]:
        return {x for x, _ in self.outer_face()}

    def euler_ok(self) -> bool:
        """V - E + F = 2 on every component (isolated vertices count one face)."""
        faces = self.faces()
        for comp in self.graph.components():
            verts = {v for v in range(self.graph.n) if comp >> v & 1}
            ne = sum(1 for a, _ in self.graph.edges if a in verts)
            nf = sum(1 for f in faces if f[0][0] in verts) or 1
            if len(verts) - ne + nf != 2:
                return False
        return True

    def side_of(self, x: int, e_in: int, e_out: int, f: int) -> int:
        """+1 if ``f`` lies clockwise strictly between ``e_out`` and ``e_in`` at ``x``."""
        rot = self.rotation[x]
        n = len(rot)
        i, j, k = rot.index(e_out), rot.index(e_in), rot.index(f)
        if k in (i, j):
            return 0
        return 1 if (k - i) % n < (j - i) % n else -1


def embed_with_outer_pair(graph: Graph, u: int, v: int) -> PlanarEmbedding:
    if u == v:
        raise GraphError("u and v must differ")
    if not graph.is_connected():
        raise GraphError("embedding needs a connected graph")
    g = nx.Graph()
    g.add_nodes_from(range(graph.n))
    for i, (a, b) in enumerate(graph.edges):
        g.add_edge(a, ("e", i))
        g.add_edge(("e", i), b)
    g.add_edge(u, v)
    ok, emb = nx.check_planarity(g)
    if not ok:
        raise AssertionError("graph plus the u-v edge is not planar")
    rotation = []
    for x in range(graph.n):
        rot = []
        for y in emb.neighbors_cw_order(x):
            if isinstance(y, tuple):
                rot.append(y[1])
            else:
                rot.append(PHANTOM)
        rotation.append(tuple(rot))
    result = PlanarEmbedding(graph, u, v, tuple(rotation))
    if not result.euler_ok():
        raise AssertionError("rotation system violates Euler's formula")
    if not {u, v} <= result.outer_vertices():
        raise AssertionError("outer face misses u or v")
    return result

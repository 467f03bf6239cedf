"""Cut-sufficiency of series-parallel pairs via odd-spindle minors."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, combinations

import networkx as nx

from .core import (
    CONTRACT,
    DELETE_DEMAND,
    DELETE_SUPPLY,
    Graph,
    GraphError,
    Instance,
    MinorStep,
    MinorTrace,
    Pair,
    apply_minor_step,
    apply_minor_steps,
    canonical_form,
    pullback_instance,
)
from .cutcheck import check_cut_condition
from .generate import spindle_pair
from .spgraph import NotSeriesParallelError, blocks, has_k4_minor, k4_witness

SEARCH_MAX_VERTICES = 14


@dataclass(frozen=True)
class SpindleWitness:
    p: int
    steps: tuple[MinorStep, ...]
    hubs: tuple[int, int]  # vertex labels in the minor
    rim: tuple[int, ...]
    branch_sets: tuple[frozenset[int], ...] = ()  # hub A, hub B, rim parts in cyclic order

    def replay(self, pair: Pair) -> Pair:
        minor, _ = apply_minor_steps(pair, self.steps)
        return minor

    def verify(self, pair: Pair) -> bool:
        minor = self.replay(pair)
        return minor.n == self.p + 2 and canonical_form(minor) == canonical_form(spindle_pair(self.p))


@dataclass(frozen=True)
class SufficiencyVerdict:
    cut_sufficient: bool
    witness: SpindleWitness | None = None
    attestation: dict | None = None

    def __post_init__(self):
        if (self.witness is None) == (self.attestation is None):
            raise ValueError("a verdict carries exactly one of witness and attestation")


# ---------------------------------------------------------------------------
# Branch-set search


def _grow(nbr, start: int, allowed: int) -> int:
    comp = frontier = start
    while frontier:
        grow = 0
        f = frontier
        while f:
            b = f & -f
            grow |= nbr[b.bit_length() - 1]
            f ^= b
        grow &= allowed & ~comp
        comp |= grow
        frontier = grow
    return comp


def _spindle_models(pair: Pair, p: int, hub: int, rim_edges: tuple[int, ...]):
    """Yield part assignments (list: vertex -> part) realising a p-spindle model.

    Parts: 0 and 1 are the hubs, 2..p+1 the rim parts in cyclic order;
    rim demand ``rim_edges[i]`` joins part ``2+i`` and part ``2+(i+1)%p``.
    """
    g, h = pair.supply, pair.demand
    n = g.n
    nbr = g.neighbor_masks
    parts = p + 2
    a, b = h.edges[hub]
    assign = [-1] * n
    assign[a], assign[b] = 0, 1

    def orientations(i):
        if i == p:
            yield
            return
        x, y = h.edges[rim_edges[i]]
        here, there = 2 + i, 2 + (i + 1) % p
        for s, t in ((x, y), (y, x)):
            ok_s = assign[s] in (-1, here)
            ok_t = assign[t] in (-1, there)
            if not (ok_s and ok_t) or s == t:
                continue
            old_s, old_t = assign[s], assign[t]
            assign[s], assign[t] = here, there
            if assign[s] == here and assign[t] == there:
                yield from orientations(i + 1)
            assign[s], assign[t] = old_s, old_t

    for _ in orientations(0):
        yield from _complete(g, nbr, assign[:], parts)


def _complete(g: Graph, nbr, assign: list[int], parts: int):
    n = g.n
    masks = [0] * parts
    for v, q in enumerate(assign):
        if q >= 0:
            masks[q] |= 1 << v
    free_mask = sum(1 << v for v in range(n) if assign[v] < 0)
    # visit free vertices outward from the prescribed ones
    order = []
    seen = ((1 << n) - 1) & ~free_mask
    frontier = seen
    while True:
        nxt = 0
        f = frontier
        while f:
            bit = f & -f
            nxt |= nbr[bit.bit_length() - 1]
            f ^= bit
        nxt &= free_mask & ~seen
        if not nxt:
            break
        order.extend(v for v in range(n) if nxt >> v & 1)
        seen |= nxt
        frontier = nxt
    order.extend(v for v in range(n) if free_mask >> v & 1 and v not in order)

    def feasible(unassigned):
        for m in masks:
            low = m & -m
            comp = _grow(nbr, low, m | unassigned)
            if m & ~comp:
                return False
        return True

    def adjacent(x, y):
        f = x
        while f:
            bit = f & -f
            if nbr[bit.bit_length() - 1] & y:
                return True
            f ^= bit
        return False

    def leaf():
        for i in range(2, parts):
            if not adjacent(masks[0], masks[i]) or not adjacent(masks[1], masks[i]):
                return False
        return True

    unassigned = free_mask
    if not feasible(unassigned):
        return

    def rec(k):
        nonlocal unassigned
        if k == len(order):
            if leaf():
                yield list(masks)
            return
        v = order[k]
        bit = 1 << v
        unassigned &= ~bit
        for q in range(parts):
            masks[q] |= bit
            if feasible(unassigned):
                yield from rec(k + 1)
            masks[q] &= ~bit
        unassigned |= bit

    yield from rec(0)


def _rim_sequences(candidates, p):
    """Cyclic sequences of ``p`` distinct demand edges, one per rotation/reflection class."""
    for subset in combinations(candidates, p):
        first, rest = subset[0], subset[1:]
        for perm in permutations(rest):
            if p >= 3 and perm[0] > perm[-1]:
                continue
            yield (first,) + perm


def _witness_from_parts(pair: Pair, p: int, hub: int, rim_edges, masks) -> SpindleWitness:
    g, h = pair.supply, pair.demand
    part_of = {}
    for q, m in enumerate(masks):
        for v in range(g.n):
            if m >> v & 1:
                part_of[v] = q
    keep_demand = {hub, *rim_edges}
    # supply: spanning forest inside parts, one edge hub-to-rim per pair
    tree_edges, links = [], {}
    for q, m in enumerate(masks):
        verts = [v for v in range(g.n) if m >> v & 1]
        reached = {verts[0]}
        changed = True
        while changed:
            changed = False
            for eid, (x, y) in enumerate(g.edges):
                if part_of[x] == part_of[y] == q and (x in reached) != (y in reached):
                    tree_edges.append(eid)
                    reached |= {x, y}
                    changed = True
    for eid, (x, y) in enumerate(g.edges):
        qa, qb = sorted((part_of[x], part_of[y]))
        if qa in (0, 1) and qb >= 2 and (qa, qb) not in links:
            links[qa, qb] = eid
    keep_supply = set(tree_edges) | set(links.values())
    steps = []
    for i in reversed(range(h.m)):
        if i not in keep_demand:
            steps.append(MinorStep(DELETE_DEMAND, i))
    for e in reversed(range(g.m)):
        if e not in keep_supply:
            steps.append(MinorStep(DELETE_SUPPLY, e))
    cur, trace = apply_minor_steps(pair, steps)
    for e in tree_edges:
        idx = trace.supply_origin.index(e)
        step = MinorStep(CONTRACT, idx)
        cur = apply_minor_step(cur, step, trace)
        steps.append(step)
    images = []
    for m in masks:
        v = (m & -m).bit_length() - 1
        images.append(trace.vertex_map[v])
    witness = SpindleWitness(
        p,
        tuple(steps),
        (images[0], images[1]),
        tuple(images[2:]),
        tuple(frozenset(v for v in range(g.n) if m >> v & 1) for m in masks),
    )
    if not witness.verify(pair):
        raise AssertionError("spindle witness failed verification")
    return witness


def find_odd_spindle_minor(pair: Pair, max_vertices: int = SEARCH_MAX_VERTICES) -> SpindleWitness | None:
    """A verified odd-spindle minor, smallest ``p`` first, or ``None``."""
    g, h = pair.supply, pair.demand
    if g.n > max_vertices:
        raise GraphError(f"spindle search is limited to {max_vertices} vertices")
    if g.n == 0 or not g.is_connected():
        raise GraphError("spindle search needs a connected supply graph")
    top = min(h.m - 1, g.n - 2)
    for p in range(3, top + 1, 2):
        if g.m < 2 * p:
            break
        for hub in range(h.m):
            cands = [i for i in range(h.m) if i != hub]
            for rim in _rim_sequences(cands, p):
                for masks in _spindle_models(pair, p, hub, rim):
                    return _witness_from_parts(pair, p, hub, rim, masks)
    return None


# ---------------------------------------------------------------------------
# Independent oracle: exhaustive search over minor steps


def _without_parallels(pair: Pair) -> Pair:
    def simple(graph: Graph) -> Graph:
        seen = {}
        for a, b in graph.edges:
            seen.setdefault((min(a, b), max(a, b)), (a, b))
        return Graph(graph.n, tuple(seen.values()))

    return Pair(simple(pair.supply), simple(pair.demand))


def spindle_minor_by_steps(pair: Pair, max_vertices: int = 8) -> int | None:
    """Smallest odd ``p`` such that an odd p-spindle is a minor, by brute force."""
    if pair.n > max_vertices:
        raise GraphError(f"step search is limited to {max_vertices} vertices")
    targets = {}
    for p in range(3, pair.n - 1, 2):
        targets[canonical_form(spindle_pair(p))] = p
    seen = set()
    found = []

    def rec(cur: Pair):
        if cur.n < 5 or not cur.supply.is_connected():
            return
        # spindles are simple, so parallel copies never help
        cur = _without_parallels(cur)
        if cur.demand.m < 4 or cur.supply.m < 6:
            return
        key = canonical_form(cur)
        if key in seen:
            return
        seen.add(key)
        if key in targets:
            found.append(targets[key])
        for i in range(cur.demand.m):
            rec(apply_minor_step(cur, MinorStep(DELETE_DEMAND, i)))
        for e in range(cur.supply.m):
            rec(apply_minor_step(cur, MinorStep(DELETE_SUPPLY, e)))
            rec(apply_minor_step(cur, MinorStep(CONTRACT, e)))

    rec(pair)
    return min(found) if found else None


# ---------------------------------------------------------------------------
# Blocks and verdicts


@dataclass(frozen=True)
class BlockPair:
    vertices: tuple[int, ...]  # original labels, index = local label
    supply_edges: tuple[int, ...]  # original supply ids
    pair: Pair


def split_into_blocks(pair: Pair) -> list[BlockPair]:
    """Blocks of the supply graph; each demand projected along the block-cut tree."""
    g, h = pair.supply, pair.demand
    bl, cuts = blocks(g)
    tree = nx.Graph()
    for i, b in enumerate(bl):
        tree.add_node(("B", i))
        for c in b.vertices & cuts:
            tree.add_edge(("B", i), ("C", c))
    home = {}
    for i, b in enumerate(bl):
        for v in b.vertices:
            home[v] = ("C", v) if v in cuts else ("B", i)
    fragments: list[list[tuple[int, int]]] = [[] for _ in bl]
    for x, y in h.edges:
        route = nx.shortest_path(tree, home[x], home[y])
        for k, node in enumerate(route):
            if node[0] != "B":
                continue
            entry = x if k == 0 else route[k - 1][1]
            exit_ = y if k == len(route) - 1 else route[k + 1][1]
            if entry != exit_:
                fragments[node[1]].append((entry, exit_))
    out = []
    for i, b in enumerate(bl):
        verts = tuple(sorted(b.vertices))
        local = {v: j for j, v in enumerate(verts)}
        sup = Graph(len(verts), tuple((local[g.edges[e][0]], local[g.edges[e][1]]) for e in b.edges))
        dem = Graph(len(verts), tuple((local[a], local[c]) for a, c in fragments[i]))
        out.append(BlockPair(verts, b.edges, Pair(sup, dem)))
    return out


def _lift(pair: Pair, block: BlockPair, max_vertices: int) -> SpindleWitness:
    inside = set(block.supply_edges)
    steps: list[MinorStep] = []
    trace = MinorTrace.identity(pair)
    cur = pair
    for e in range(pair.supply.m):
        if e in inside or e not in trace.supply_origin:
            continue
        idx = trace.supply_origin.index(e)
        step = MinorStep(CONTRACT, idx)
        cur = apply_minor_step(cur, step, trace)
        steps.append(step)
    assert canonical_form(cur) == canonical_form(block.pair) if cur.n <= 16 else True
    inner = find_odd_spindle_minor(cur, max_vertices=max(max_vertices, cur.n))
    assert inner is not None
    w = SpindleWitness(inner.p, tuple(steps) + inner.steps, inner.hubs, inner.rim)
    if not w.verify(pair):
        raise AssertionError("lifted witness failed verification")
    return w


def decide_cut_sufficiency(pair: Pair, max_vertices: int = SEARCH_MAX_VERTICES) -> SufficiencyVerdict:
    """Cut-sufficient iff no odd-spindle minor; refuses non-series-parallel supply graphs."""
    g = pair.supply
    if not g.is_connected():
        raise GraphError("supply graph must be connected")
    if has_k4_minor(g.n, g.edges):
        raise NotSeriesParallelError(
            "series-parallel theorem does not apply: supply graph is not series-parallel",
            k4_branch_sets=k4_witness(g),
        )
    parts = split_into_blocks(pair)
    for block in parts:
        if block.pair.n > max_vertices:
            raise GraphError(f"block with {block.pair.n} vertices exceeds the search limit {max_vertices}")
    for block in parts:
        w = find_odd_spindle_minor(block.pair, max_vertices)
        if w is not None:
            return SufficiencyVerdict(False, witness=_lift(pair, block, max_vertices))
    return SufficiencyVerdict(
        True,
        attestation={
            "method": "exhaustive odd-spindle model search per block",
            "blocks": len(parts),
            "largest_block": max(b.pair.n for b in parts),
        },
    )


# ---------------------------------------------------------------------------
# Cross-validation against the LP


@dataclass
class CrossValidation:
    verdict: SufficiencyVerdict
    congestions: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    skipped: int = 0
    instances: list = field(default_factory=list)  # every instance handed to the LP

    @property
    def ok(self) -> bool:
        return not self.failures


def tight_integral_instance(pair: Pair, caps, dems) -> Instance | None:
    """Scale integral weights so the cut condition holds with a tight cut, staying integral."""
    from .lp.general import tight_scale

    inst = Instance(pair.supply, pair.demand, tuple(caps), tuple(dems))
    if all(d == 0 for d in inst.demands):
        return None
    lam = tight_scale(inst)
    if lam == 0:
        return None
    return inst.scaled(lam.denominator, lam.numerator)


def spindle_pullback(pair: Pair, witness: SpindleWitness) -> Instance:
    minor = witness.replay(pair)
    unit = Instance(minor.supply, minor.demand, (1,) * minor.supply.m, (1,) * minor.demand.m)
    return pullback_instance(pair, witness.steps, unit)


def cross_validate_sufficiency(
    pair: Pair,
    samples: int = 25,
    seed: int = 0,
    verdict: SufficiencyVerdict | None = None,
    max_weight: int = 4,
    max_attempts: int | None = None,
) -> CrossValidation:
    from .lp.multiflow import min_congestion

    verdict = verdict or decide_cut_sufficiency(pair)
    report = CrossValidation(verdict)
    if verdict.cut_sufficient:
        rng = random.Random(seed)
        attempts = 0
        limit = max_attempts or 10 * samples
        while len(report.congestions) < samples and attempts < limit:
            attempts += 1
            caps = [rng.randint(1, max_weight) for _ in pair.supply.edges]
            dems = [rng.randint(0, max_weight) for _ in pair.demand.edges]
            inst = tight_integral_instance(pair, caps, dems)
            if inst is None or not check_cut_condition(inst).satisfied:
                report.skipped += 1
                continue
            try:
                alpha = min_congestion(inst).congestion
            except GraphError:
                report.skipped += 1
                continue
            report.instances.append(inst)
            report.congestions.append(alpha)
            if alpha != 1:
                report.failures.append(("congestion", caps, dems, alpha))
        if len(report.congestions) < samples:
            report.failures.append(("sampling", len(report.congestions), samples))
    else:
        inst = spindle_pullback(pair, verdict.witness)
        cc = check_cut_condition(inst)
        alpha = min_congestion(inst).congestion
        report.instances.append(inst)
        report.congestions.append(alpha)
        if not cc.satisfied:
            report.failures.append(("pullback violates the cut condition", cc.min_surplus))
        if not alpha > 1:
            report.failures.append(("pullback routes", alpha))
    return report

"""Fixture instances and random series-parallel generators."""

from __future__ import annotations

import random
from fractions import Fraction

from .core import Graph, GraphError, Instance, Pair

HUB_U, HUB_V = 0, 1


def spindle(p: int, hub_demand=1, weight=1) -> Instance:
    """``K_{2,p}`` supply (hubs 0 and 1, rim 2..p+1), rim demand cycle plus a hub demand."""
    if p < 2:
        raise GraphError("a spindle needs p >= 2")
    rim = list(range(2, p + 2))
    supply = [(HUB_U, r, weight) for r in rim] + [(HUB_V, r, weight) for r in rim]
    if p == 2:
        cycle = [(rim[0], rim[1], weight)]
    else:
        cycle = [(rim[i], rim[(i + 1) % p], weight) for i in range(p)]
    demand = cycle + [(HUB_U, HUB_V, hub_demand)]
    return Instance.build(p + 2, supply, demand)


def spindle_pair(p: int) -> Pair:
    return spindle(p).pair


EVEN_SPINDLE_RIM_CAPACITY = (1, 2, 1, 2)


def even_spindle(hub_demand=2) -> Instance:
    """Four-spindle with rim capacities 1, 2, 1, 2 on both hub edges and unit rim demands.

    With hub demand 2 it is Eulerian and satisfies the cut condition with
    tight cuts.  (All-unit capacities would violate the cut condition on
    ``{u, a1, a3}``.)
    """
    base = spindle(4, hub_demand=hub_demand)
    caps = EVEN_SPINDLE_RIM_CAPACITY * 2
    return base.with_weights(capacities=caps)


# u1=0, u2=1, u3=2, v1=3, v2=4, v3=5
BAD_K4_SUPPLY = ((0, 3), (0, 5), (2, 3), (2, 5), (0, 1), (1, 2), (3, 4), (4, 5))
BAD_K4_DEMAND = ((2, 0), (3, 5), (1, 4))


def bad_k4() -> Instance:
    """Planar pair that satisfies the cut condition but does not route."""
    return Instance(
        Graph(6, BAD_K4_SUPPLY),
        Graph(6, BAD_K4_DEMAND),
        (1,) * 8,
        (1, 1, 2),
    )


def path_instance(k: int, capacity=2, demand=2) -> Instance:
    """Path 0-1-...-k with one end-to-end demand."""
    supply = [(i, i + 1, capacity) for i in range(k)]
    return Instance.build(k + 1, supply, [(0, k, demand)])


# ---------------------------------------------------------------------------
# Random generators


def random_sp_graph(rng: random.Random, n: int, extra_edges: int | None = None) -> Graph:
    """Random biconnected series-parallel multigraph on ``n`` vertices.

    Each new vertex either subdivides an edge or forms a new two-edge path
    parallel to an existing edge.  ``extra_edges`` parallel copies are then
    added.
    """
    if n < 2:
        raise GraphError("need at least two vertices")
    edges = [(0, 1), (0, 1)] if n > 2 else [(0, 1)]
    for w in range(2, n):
        a, b = edges[rng.randrange(len(edges))]
        if rng.random() < 0.5:
            i = edges.index((a, b))
            edges[i] = (a, w)
            edges.append((w, b))
        else:
            edges.extend([(a, w), (w, b)])
    budget = rng.randint(0, n // 2) if extra_edges is None else extra_edges
    for _ in range(budget):
        edges.append(edges[rng.randrange(len(edges))])
    perm = list(range(n))
    rng.shuffle(perm)
    return Graph(n, tuple((perm[a], perm[b]) for a, b in edges))


def random_demand_graph(rng: random.Random, n: int, count: int) -> Graph:
    edges = []
    for _ in range(count):
        a, b = rng.sample(range(n), 2)
        edges.append((a, b))
    return Graph(n, tuple(edges))


def random_pair(rng: random.Random, max_vertices: int = 10, max_demands: int = 6) -> Pair:
    n = rng.randint(3, max_vertices)
    g = random_sp_graph(rng, n)
    h = random_demand_graph(rng, n, rng.randint(1, max_demands))
    return Pair(g, h)


def make_eulerian(instance: Instance) -> Instance:
    """Raise capacities along paths between odd vertices until all parities are even."""
    caps = [int(c) for c in instance.capacities]
    g = instance.supply
    parity = [0] * instance.n
    for (a, b), c in zip(g.edges, caps):
        parity[a] ^= c & 1
        parity[b] ^= c & 1
    for (a, b), d in zip(instance.demand.edges, instance.demands):
        parity[a] ^= int(d) & 1
        parity[b] ^= int(d) & 1
    odd = [v for v in range(instance.n) if parity[v]]
    while odd:
        a, b = odd.pop(), odd.pop()
        for eid in _bfs_edge_path(g, a, b):
            caps[eid] += 1
    return instance.with_weights(capacities=caps)


def _bfs_edge_path(g: Graph, a: int, b: int) -> list[int]:
    prev = {a: None}
    queue = [a]
    for x in queue:
        if x == b:
            break
        for y, eid in g.incidence[x]:
            if y not in prev:
                prev[y] = (x, eid)
                queue.append(y)
    out = []
    while prev[b] is not None:
        b, eid = prev[b]
        out.append(eid)
    return out


def repair_cut_condition(instance: Instance, step: int = 2, engine: str = "auto") -> Instance:
    """Add ``step`` to a capacity on the worst cut until the cut condition holds."""
    from .cutcheck import check_cut_condition

    while True:
        report = check_cut_condition(instance, engine=engine)
        if report.satisfied:
            return instance
        cut = report.worst_cut
        caps = list(instance.capacities)
        eid = min(cut.crossing_supply, key=lambda e: (caps[e], e))
        caps[eid] += step
        instance = instance.with_weights(capacities=caps)


def random_instance(
    rng: random.Random,
    pair: Pair,
    max_capacity: int = 3,
    max_demand: int = 3,
    eulerian: bool = True,
) -> Instance:
    """Integral weights on ``pair`` satisfying the cut condition (and parity if asked)."""
    caps = [rng.randint(1, max_capacity) for _ in pair.supply.edges]
    dems = [rng.randint(1, max_demand) for _ in pair.demand.edges]
    inst = Instance(pair.supply, pair.demand, tuple(caps), tuple(dems))
    if eulerian:
        inst = make_eulerian(inst)
        return repair_cut_condition(inst, step=2)
    return repair_cut_condition(inst, step=1)


def as_fractions(values) -> tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in values)


def planted_spindle_pair(rng: random.Random, p: int, extra: int) -> Pair:
    """A pair with an odd ``p``-spindle minor, grown by ``extra`` inverse minor steps.

    Steps subdivide a supply edge, duplicate a supply edge or add a demand;
    all keep the supply graph series-parallel.
    """
    base = spindle_pair(p)
    n = base.n
    sup = list(base.supply.edges)
    dem = list(base.demand.edges)
    for _ in range(extra):
        r = rng.random()
        if r < 0.5:
            i = rng.randrange(len(sup))
            a, b = sup[i]
            sup[i] = (a, n)
            sup.append((n, b))
            n += 1
        elif r < 0.75:
            sup.append(sup[rng.randrange(len(sup))])
        else:
            dem.append(tuple(rng.sample(range(n), 2)))
    perm = list(range(n))
    rng.shuffle(perm)
    return Pair(
        Graph(n, tuple((perm[a], perm[b]) for a, b in sup)),
        Graph(n, tuple((perm[a], perm[b]) for a, b in dem)),
    )

"""Independent reference computations used by the tests.

Nothing here calls the package's LP, cut or routing code.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import networkx as nx
import numpy as np
from scipy.optimize import linprog


def all_simple_paths(n, edges, s, t):
    """Simple s-t paths as edge-id tuples (parallel edges give distinct paths)."""
    g = nx.MultiGraph()
    g.add_nodes_from(range(n))
    for i, (a, b) in enumerate(edges):
        g.add_edge(a, b, key=i)
    out = []
    for path in nx.all_simple_edge_paths(g, s, t):
        out.append(tuple(k for _, _, k in path))
    return out


def path_lp_congestion(n, supply, caps, demand, dems) -> float:
    """Minimum congestion by the path formulation, solved in floating point."""
    paths = []
    for i, (a, b) in enumerate(demand):
        for p in all_simple_paths(n, supply, a, b):
            paths.append((i, p))
    nv = len(paths) + 1
    cost = np.zeros(nv)
    cost[-1] = 1.0
    a_ub, b_ub = [], []
    for e, c in enumerate(caps):
        row = np.zeros(nv)
        for j, (_, p) in enumerate(paths):
            if e in p:
                row[j] = 1.0
        row[-1] = -float(c)
        a_ub.append(row)
        b_ub.append(0.0)
    a_eq, b_eq = [], []
    for i, d in enumerate(dems):
        row = np.zeros(nv)
        for j, (k, _) in enumerate(paths):
            if k == i:
                row[j] = 1.0
        a_eq.append(row)
        b_eq.append(float(d))
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * nv, method="highs")
    assert res.status == 0
    return res.fun


def spindle_certificate(p: int):
    """Exact primal and dual certificates of congestion (p+1)/p on the unit p-spindle.

    Rim demand (a_i, a_i+1) sends 1/2 through each hub, the hub demand
    sends 1/p through every rim vertex; every edge has length 1/(2p).
    Returns (max load, dual objective, sum c*l, metric ok).
    """
    u, v = 0, 1
    rim = list(range(2, p + 2))
    load = {}

    def use(x, y, amount):
        key = (min(x, y), max(x, y))
        load[key] = load.get(key, Fraction(0)) + amount

    half = Fraction(1, 2)
    for i in range(p):
        a, b = rim[i], rim[(i + 1) % p]
        for hub in (u, v):
            use(a, hub, half)
            use(hub, b, half)
    for r in rim:
        use(u, r, Fraction(1, p))
        use(r, v, Fraction(1, p))
    length = Fraction(1, 2 * p)
    edges = [(u, r) for r in rim] + [(v, r) for r in rim]
    # shortest-path distances under uniform length: every pair of distinct vertices is 2 edges apart
    # except hub-rim pairs, which are adjacent
    g = nx.Graph()
    g.add_edges_from(edges)
    dist = dict(nx.all_pairs_shortest_path_length(g))
    demands = [(rim[i], rim[(i + 1) % p]) for i in range(p)] + [(u, v)]
    d = [dist[a][b] * length for a, b in demands]
    dual = sum(d, Fraction(0))
    return max(load.values()), dual, len(edges) * length


def brute_min_surplus(n, supply, caps, demand, dems, central_only=True):
    """Minimum surplus by enumerating vertex subsets directly."""
    best = None
    g = nx.MultiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from(supply)
    for size in range(1, n):
        for side in combinations(range(n), size):
            s = set(side)
            if 0 not in s:
                continue
            if central_only:
                rest = [x for x in range(n) if x not in s]
                if not nx.is_connected(g.subgraph(s)) or not nx.is_connected(g.subgraph(rest)):
                    continue
            val = sum((c for (a, b), c in zip(supply, caps) if (a in s) != (b in s)), Fraction(0))
            val -= sum((d for (a, b), d in zip(demand, dems) if (a in s) != (b in s)), Fraction(0))
            if best is None or val < best:
                best = val
    return best


def flow_problems(supply, caps, demand, dems, paths, lattice=1):
    """Check a path flow using only plain arithmetic.

    ``paths`` are (demand index, vertex tuple, edge tuple, amount); every
    amount times ``lattice`` must be a nonnegative integer.
    """
    problems = []
    load = [Fraction(0)] * len(supply)
    got = [Fraction(0)] * len(demand)
    for i, verts, edges, amount in paths:
        amount = Fraction(amount)
        scaled = amount * lattice
        if amount < 0 or scaled.denominator != 1:
            problems.append(("lattice", i, amount))
        if {verts[0], verts[-1]} != set(demand[i]) or len(set(verts)) != len(verts):
            problems.append(("ends", i, verts))
        if len(edges) != len(verts) - 1:
            problems.append(("length", i, verts))
        for x, y, e in zip(verts, verts[1:], edges):
            if {x, y} != set(supply[e]):
                problems.append(("edge", i, e))
            load[e] += amount
        got[i] += amount
    problems += [("capacity", e) for e in range(len(supply)) if load[e] > caps[e]]
    problems += [("delivery", i) for i in range(len(demand)) if got[i] != dems[i]]
    return problems

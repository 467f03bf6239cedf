"""The eight acceptance criteria, one pass/fail line each.

Criteria 6 and 8 audit everything the LP solved in criteria 1 to 5, so the
work of those criteria is cached and shared.
"""

import contextlib
import functools
import itertools
import random
import time
from fractions import Fraction

import networkx as nx
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ACCEPTANCE_LINES
from helpers import qualifying_instances
from oracles import flow_problems, path_lp_congestion
from spflow.core import Graph, Instance, pair_surplus, surplus
from spflow.cutcheck import _all_sides, central_sides, check_cut_condition, crossings, is_eulerian, simple_paths, surplus_vector
from spflow.generate import (
    bad_k4,
    make_eulerian,
    planted_spindle_pair,
    random_demand_graph,
    random_pair,
    random_sp_graph,
    spindle,
)
from spflow.lp.general import GAP_BOUND, general_solution, instance_general_solution, verify_complementary_slackness
from spflow.lp.multiflow import min_congestion
from spflow.routing import route_along, solve_half_integral, solve_integral
from spflow.spgraph import has_k4_minor, is_split_pair, orient, recognize_series_parallel
from spflow.sufficiency import cross_validate_sufficiency, find_odd_spindle_minor

PROPERTY_CASES = 10_000
GAMMA_MAX_VERTICES = 12


@contextlib.contextmanager
def criterion(number: int, title: str):
    """Record one pass/fail line; ``detail`` collects the summary text."""
    detail: list[str] = []
    start = time.perf_counter()
    try:
        yield detail
    except BaseException as exc:
        line = f"criterion {number} FAIL: {title}: {exc!s:.200}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        raise
    elapsed = time.perf_counter() - start
    line = f"criterion {number} PASS: {title}: {'; '.join(detail)} ({elapsed:.1f} s)"
    print(line)
    ACCEPTANCE_LINES.append(line)


def is_series_parallel_pair(inst: Instance) -> bool:
    return not has_k4_minor(inst.n, inst.supply.edges)


def components(inst: Instance):
    """Sub-instances on supply components that carry positive demand."""
    for comp in inst.supply.components():
        verts = [x for x in range(inst.n) if comp >> x & 1]
        local = {x: k for k, x in enumerate(verts)}
        sup = [(local[a], local[b], c) for (a, b), c in zip(inst.supply.edges, inst.capacities) if a in local]
        dem = [(local[a], local[b], d) for (a, b), d in zip(inst.demand.edges, inst.demands) if a in local and d > 0]
        if dem:
            yield Instance.build(len(verts), sup, dem)


# ---------------------------------------------------------------------------
# producers (cached so that criteria 6 and 8 see the same instances)


@functools.cache
def run_ladder():
    out = {"lp": [], "alpha": {}, "oracle": {}, "cut": {}}
    for p in (3, 5, 7):
        inst = spindle(p)
        out["cut"][p] = check_cut_condition(inst).satisfied
        out["alpha"][p] = min_congestion(inst).congestion
        out["oracle"][p] = path_lp_congestion(inst.n, inst.supply.edges, inst.capacities, inst.demand.edges, inst.demands)
        out["lp"].append(inst)
    return out


def planted_pair(rng, max_vertices=10, max_demands=6):
    # uniform pairs rarely hold an odd spindle, so some are grown around one
    while True:
        pair = planted_spindle_pair(rng, rng.choice([3, 3, 5]), rng.randint(0, 5))
        if pair.n <= max_vertices and pair.demand.m <= max_demands:
            return pair


@functools.cache
def run_cross_validation():
    rng = random.Random(2024)
    out = {"lp": [], "failures": [], "sufficient": 0, "witness": 0, "samples": 0}
    for k in range(200):
        pair = planted_pair(rng) if k % 4 == 3 else random_pair(rng, max_vertices=10, max_demands=6)
        report = cross_validate_sufficiency(pair, samples=25, seed=rng.randrange(10**9))
        out["lp"].extend(report.instances)
        if report.verdict.cut_sufficient:
            out["sufficient"] += 1
            out["samples"] += len(report.congestions)
        else:
            out["witness"] += 1
        out["failures"].extend(report.failures)
    return out


@functools.cache
def run_integral():
    out = {"lp": [], "failures": [], "solved": 0, "units": 0}
    for inst in qualifying_instances(3031, 200, eulerian=True, max_vertices=12, max_total=20):
        res = solve_integral(inst, lp_log=out["lp"])
        paths = [(p.demand, p.vertices, p.edges, p.amount) for p in res.paths]
        problems = flow_problems(inst.supply.edges, inst.capacities, inst.demand.edges, inst.demands, paths, 1)
        if problems:
            out["failures"].append((inst, problems))
        out["solved"] += 1
        out["units"] += res.unit_steps + res.floor_units
    return out


@functools.cache
def run_half_integral():
    out = {"lp": [], "failures": [], "solved": 0, "with_halves": 0}
    for inst in qualifying_instances(4041, 100, eulerian=False, max_vertices=12, max_total=20):
        res = solve_half_integral(inst, lp_log=out["lp"])
        paths = [(p.demand, p.vertices, p.edges, p.amount) for p in res.paths]
        problems = flow_problems(inst.supply.edges, inst.capacities, inst.demand.edges, inst.demands, paths, 2)
        if problems:
            out["failures"].append((inst, problems))
        out["solved"] += 1
        out["with_halves"] += any(p.amount.denominator == 2 for p in res.paths)
    return out


@functools.cache
def run_bad_k4():
    inst = bad_k4()
    start = time.perf_counter()
    out = {
        "cut": check_cut_condition(inst).satisfied,
        "eulerian": is_eulerian(inst),
        "alpha": min_congestion(inst).congestion,
        "spindle": find_odd_spindle_minor(inst.pair),
        "lp": [inst],
    }
    out["seconds"] = time.perf_counter() - start
    return out


def all_lp_instances():
    return (
        run_ladder()["lp"]
        + run_cross_validation()["lp"]
        + run_integral()["lp"]
        + run_half_integral()["lp"]
        + run_bad_k4()["lp"]
    )


# ---------------------------------------------------------------------------
# criteria


def test_criterion_1_spindle_ladder():
    with criterion(1, "odd-spindle congestion ladder") as detail:
        start = time.perf_counter()
        res = run_ladder()
        seconds = time.perf_counter() - start
        for p in (3, 5, 7):
            assert res["cut"][p], f"{p}-spindle violates the cut condition"
            assert res["alpha"][p] == Fraction(p + 1, p), f"p={p}: alpha {res['alpha'][p]}"
            assert abs(res["oracle"][p] - (p + 1) / p) < 1e-9, f"p={p}: path-LP oracle {res['oracle'][p]}"
            detail.append(f"p={p} alpha={res['alpha'][p]}")
        assert seconds < 5, f"took {seconds:.1f} s"


def test_criterion_2_sufficiency_cross_validation():
    with criterion(2, "cut-sufficiency cross-validation on 200 pairs") as detail:
        start = time.perf_counter()
        res = run_cross_validation()
        seconds = time.perf_counter() - start
        assert not res["failures"], res["failures"][:3]
        assert res["sufficient"] + res["witness"] == 200 and res["witness"] >= 50
        detail.append(f"{res['sufficient']} sufficient pairs, {res['samples']} samples all alpha=1")
        detail.append(f"{res['witness']} witness pullbacks all alpha>1")
        assert seconds < 600, f"took {seconds:.0f} s"


def test_criterion_3_integral_routing():
    with criterion(3, "integral routing end to end on 200 instances") as detail:
        start = time.perf_counter()
        res = run_integral()
        seconds = time.perf_counter() - start
        assert res["solved"] == 200 and not res["failures"], res["failures"][:1]
        detail.append(f"{res['solved']} verified, {res['units']} units routed, 0 failures")
        assert seconds < 600, f"took {seconds:.0f} s"


def test_criterion_4_half_integrality():
    with criterion(4, "half-integral routing on 100 non-Eulerian instances") as detail:
        res = run_half_integral()
        assert res["solved"] == 100 and not res["failures"], res["failures"][:1]
        detail.append(f"{res['solved']} verified in (1/2)Z, {res['with_halves']} use a 1/2 value")


def test_criterion_5_bad_k4():
    with criterion(5, "bad-K4 boundary fixture") as detail:
        res = run_bad_k4()
        assert res["cut"] and res["eulerian"]
        assert res["alpha"] > 1, f"alpha {res['alpha']}"
        assert res["spindle"] is None
        detail.append(f"cut ok, Eulerian, alpha={res['alpha']}, no odd spindle")
        assert res["seconds"] < 1, f"took {res['seconds']:.2f} s"


def test_criterion_6_duality_and_slackness():
    with criterion(6, "duality, complementary slackness, distortion = congestion") as detail:
        pieces = gamma_checked = 0
        for inst in all_lp_instances():
            for sub in components(inst):
                pieces += 1
                sol = min_congestion(sub)
                assert sol.primal_objective == sol.dual_objective == sol.congestion
                gs = instance_general_solution(sub)
                assert gs.flow.primal_objective == gs.flow.dual_objective
                assert gs.cut.primal_objective == gs.cut.dual_objective
                report = verify_complementary_slackness(gs)
                assert report.passed, report
                if sub.n <= GAMMA_MAX_VERTICES:
                    assert gs.gamma == gs.flow.congestion, f"gamma {gs.gamma} alpha {gs.flow.congestion}"
                    gamma_checked += 1
        detail.append(f"{pieces} LP instances certified, gamma=alpha on {gamma_checked}")


def test_criterion_7_structural_properties():
    counts = {}
    with criterion(7, "structural property suites") as detail:
        for name, prop in PROPERTIES:
            counts[name] = 0

            def tick(name=name):
                counts[name] += 1

            prop(tick)
            assert counts[name] >= PROPERTY_CASES, f"{name}: only {counts[name]} cases"
            detail.append(f"{name} {counts[name]}")


def test_criterion_8_gap_sanity():
    with criterion(8, "flow-cut gap never above 2") as detail:
        worst = Fraction(0)
        seen = 0
        for inst in all_lp_instances():
            if not is_series_parallel_pair(inst):
                continue
            for sub in components(inst):
                worst = max(worst, min_congestion(sub).congestion)
                seen += 1
        rng = random.Random(8)
        searched = 0
        while searched < 40:
            pair = random_pair(rng, max_vertices=8, max_demands=5)
            gs = general_solution(pair, rounds=10, seed=rng.randrange(10**6))
            worst = max(worst, gs.gap)
            searched += 1
        assert worst <= GAP_BOUND, f"congestion {worst}"
        detail.append(f"max congestion {worst} over {seen} instances and {searched} gap searches")


# ---------------------------------------------------------------------------
# property suites for criterion 7


def _instance(seed: int, max_vertices: int, integral: bool = False) -> Instance:
    rng = random.Random(seed)
    n = rng.randint(2, max_vertices)
    g = random_sp_graph(rng, n)
    h = random_demand_graph(rng, n, rng.randint(0, 6))
    if integral:
        return Instance(g, h, tuple(rng.randint(1, 4) for _ in g.edges), tuple(rng.randint(0, 4) for _ in h.edges))
    caps = tuple(Fraction(rng.randint(0, 6), rng.randint(1, 3)) for _ in g.edges)
    dems = tuple(Fraction(rng.randint(0, 6), rng.randint(1, 3)) for _ in h.edges)
    return Instance(g, h, caps, dems)


def _subset(rng, pool):
    return {x for x in pool if rng.random() < 0.5}


def prop_surplus_identities(tick):
    @settings(max_examples=PROPERTY_CASES, database=None)
    @given(st.integers(0, 2**32 - 1))
    def check(seed):
        inst = _instance(seed, 9)
        rng = random.Random(seed ^ 0x5A5A)
        everything = set(range(inst.n))
        a = _subset(rng, everything)
        b = _subset(rng, everything - a)
        parts = [set() for _ in range(rng.randint(1, 3))]
        for x in b:
            rng.choice(parts).add(x)
        # (a) additivity over a partition of B
        assert pair_surplus(inst, a, b) == sum(pair_surplus(inst, a, p) for p in parts)
        # (b) the same with B the complement of A
        rest = everything - a
        parts = [set() for _ in range(rng.randint(1, 3))]
        for x in rest:
            rng.choice(parts).add(x)
        assert surplus(inst, a) == sum(pair_surplus(inst, a, p) for p in parts)
        # (c) and (d) for overlapping A and B
        a, b = _subset(rng, everything), _subset(rng, everything)
        lhs = surplus(inst, a | b) + surplus(inst, a & b)
        assert lhs == surplus(inst, a) + surplus(inst, b) - 2 * pair_surplus(inst, a - b, b - a)
        lhs = surplus(inst, a - b) + surplus(inst, b - a)
        assert lhs == surplus(inst, a) + surplus(inst, b) - 2 * pair_surplus(inst, a & b, everything - (a | b))
        # (e) disjoint A and B
        b = b - a
        assert surplus(inst, a | b) == surplus(inst, a) + surplus(inst, b) - 2 * pair_surplus(inst, a, b)
        tick()

    check()


def prop_cycle(tick):
    @settings(max_examples=PROPERTY_CASES, database=None)
    @given(st.integers(0, 2**32 - 1))
    def check(seed):
        rng = random.Random(seed)
        g = random_sp_graph(rng, rng.randint(3, 10))
        simple = nx.Graph(list(g.edges))
        cycles = list(itertools.islice(nx.simple_cycles(simple), 40))
        sides = central_sides(g).tolist()
        if cycles and sides:
            cyc = rng.choice(cycles)
            for mask in rng.sample(sides, min(5, len(sides))):
                assert crossings(cyc + [cyc[0]], mask) in (0, 2)
        tick()

    check()


def prop_orient(tick):
    @settings(max_examples=PROPERTY_CASES, database=None)
    @given(st.integers(0, 2**32 - 1))
    def check(seed):
        rng = random.Random(seed)
        g = random_sp_graph(rng, rng.randint(2, 10))
        tree = recognize_series_parallel(g)
        s, t = tree.root.s, tree.root.t
        if g.n > 2:
            x, y = rng.sample(range(g.n), 2)
            if is_split_pair(g, x, y):
                s, t = x, y
        o = orient(g, s, t)
        assert o.is_acyclic() and o.sources() == [s] and o.sinks() == [t]
        assert orient(g, s, t).arcs == o.arcs
        tail, head = rng.choice(o.arcs)
        assert (tail == s or o.reaches(s, tail)) and (head == t or o.reaches(head, t))
        tick()

    check()


def prop_route_parity(tick):
    @settings(max_examples=PROPERTY_CASES, database=None)
    @given(st.integers(0, 2**32 - 1))
    def check(seed):
        inst = make_eulerian(_instance(seed, 9, integral=True))
        rng = random.Random(seed)
        live = [i for i, d in enumerate(inst.demands) if d > 0]
        if live:
            i = rng.choice(live)
            a, b = inst.demand.edges[i]
            verts = rng.choice(simple_paths(inst.supply, a, b, guard=10**5)[:50])
            edges = [rng.choice([e for y, e in inst.supply.incidence[x] if y == z]) for x, z in zip(verts, verts[1:])]
            after = route_along(inst, i, edges)
            sides = _all_sides(inst.n)
            before_s, _ = surplus_vector(inst, sides)
            after_s, _ = surplus_vector(after, sides)
            for m, x, y in zip(sides.tolist(), before_s.tolist(), after_s.tolist()):
                c = crossings(verts, m)
                assert x - y == 2 * (c // 2)
            assert is_eulerian(after)
        tick()

    check()


def prop_dp_matches_brute_force(tick):
    @settings(max_examples=PROPERTY_CASES, database=None)
    @given(st.integers(0, 2**32 - 1))
    def check(seed):
        rng = random.Random(seed)
        n = rng.randint(3, 14)
        g = random_sp_graph(rng, n)
        h = random_demand_graph(rng, n, rng.randint(1, 6))
        inst = Instance(g, h, tuple(rng.randint(1, 4) for _ in g.edges), tuple(rng.randint(1, 4) for _ in h.edges))
        tree = check_cut_condition(inst, engine="tree")
        brute = check_cut_condition(inst, engine="brute-force")
        assert tree.min_surplus == brute.min_surplus
        assert tree.satisfied == brute.satisfied
        tick()

    check()


PROPERTIES = [
    ("surplus identities (a)-(e)", prop_surplus_identities),
    ("cycle crossings", prop_cycle),
    ("orientation", prop_orient),
    ("routing parity", prop_route_parity),
    ("tree DP = brute force", prop_dp_matches_brute_force),
]


def test_graph_helper_sanity():
    assert list(components(Instance.build(4, [(0, 1, 1), (2, 3, 1)], [(2, 3, 1)])))[0].n == 2
    assert is_series_parallel_pair(spindle(3)) and not is_series_parallel_pair(bad_k4())
    assert Graph(2, ((0, 1),)).m == 1

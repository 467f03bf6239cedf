"""Flow-cut gap search by alternating maximisation and its certificates.

The gap problem maximises over capacities, demands, lengths and distances
jointly and is bilinear.  Fixing (c, D) leaves the congestion dual; fixing
(l, d) leaves the cut-cone program.  Alternating between the two never
decreases the objective, and a point where neither step improves carries a
full primal/dual certificate.  This is a heuristic: it gives lower bounds
on the gap and no claim of global optimality.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..core import (
    CONTRACT,
    DELETE_DEMAND,
    DELETE_SUPPLY,
    GraphError,
    Instance,
    MinorStep,
    Pair,
    apply_minor_step,
    surplus_of_mask,
)
from ..cutcheck import central_sides, crossing_totals, crossings, enumerate_tight_central_cuts, simple_paths
from ..spgraph import has_k4_minor
from .cutmetric import CutMetricSolution, _crosses, cut_metric
from .multiflow import MetricAssignment, MultiflowSolution, min_congestion, shortest_distances

ZERO = Fraction(0)
STALL_TOLERANCE = Fraction(1, 10**9)
STALL_ROUNDS = 3
GAP_BOUND = 2


def tight_scale(instance: Instance) -> Fraction:
    """Largest factor for the demands that keeps the cut condition."""
    sides = central_sides(instance.supply)
    cap, dem, _ = crossing_totals(instance, sides)
    best = None
    for c, d in zip(cap.tolist(), dem.tolist()):
        if d > 0:
            r = Fraction(c, d)
            if best is None or r < best:
                best = r
    if best is None:
        raise GraphError("no demand crosses any central cut")
    return best


def normalize_tight(instance: Instance) -> tuple[Instance, Fraction]:
    lam = tight_scale(instance)
    return instance.scaled(1, lam), lam


@dataclass(frozen=True)
class GeneralSolution:
    instance: Instance  # (c*, D*) on the (possibly reduced) pair
    metric: MetricAssignment  # (l*, d*)
    flow: MultiflowSolution  # f*
    cut: CutMetricSolution  # x*, gamma*
    gap: Fraction
    history: tuple[Fraction, ...] = ()
    steps: tuple[MinorStep, ...] = ()  # minor steps from the input pair to instance.pair
    fixed_point: bool = True
    heuristic: bool = True

    @property
    def gamma(self) -> Fraction:
        return self.cut.gamma


def _solve_round(instance: Instance):
    flow = min_congestion(instance)
    cm = cut_metric(instance.pair, flow.metric.lengths, flow.metric.distances)
    return flow, cm


def instance_general_solution(instance: Instance) -> GeneralSolution:
    """Certificate sextuple for one weighting, after scaling demands to tightness."""
    inst, _ = normalize_tight(instance)
    flow, cm = _solve_round(inst)
    return GeneralSolution(
        inst, flow.metric, flow, cm, flow.congestion, (flow.congestion,), (), cm.gamma == flow.congestion, False
    )


def _simplify(instance: Instance, lengths, steps: list) -> Instance:
    """Drop zero demands and zero capacities, contract zero lengths."""
    pair = instance.pair
    caps = list(instance.capacities)
    dems = list(instance.demands)
    lens = list(lengths)
    for i in reversed(range(len(dems))):
        if dems[i] == 0:
            pair = apply_minor_step(pair, MinorStep(DELETE_DEMAND, i))
            steps.append(MinorStep(DELETE_DEMAND, i))
            del dems[i]
    for e in reversed(range(len(caps))):
        if caps[e] == 0:
            trial = pair.supply.without_edges([e])
            if not trial.is_connected():
                continue
            pair = apply_minor_step(pair, MinorStep(DELETE_SUPPLY, e))
            steps.append(MinorStep(DELETE_SUPPLY, e))
            del caps[e]
            del lens[e]
    while True:
        e = next((k for k, x in enumerate(lens) if x == 0), None)
        if e is None:
            break
        a, b = pair.supply.edges[e]
        keep_s = [k for k in range(pair.supply.m) if k != e]
        merged = [(a if x == b else x, a if y == b else y) for x, y in (pair.supply.edges[k] for k in keep_s)]
        keep_s = [k for k, (x, y) in zip(keep_s, merged) if x != y]
        merged_d = [(a if x == b else x, a if y == b else y) for x, y in pair.demand.edges]
        keep_d = [k for k, (x, y) in enumerate(merged_d) if x != y]
        pair = apply_minor_step(pair, MinorStep(CONTRACT, e))
        steps.append(MinorStep(CONTRACT, e))
        caps = [caps[k] for k in keep_s]
        lens = [lens[k] for k in keep_s]
        dems = [dems[k] for k in keep_d]
    return Instance(pair.supply, pair.demand, tuple(caps), tuple(dems))


def general_solution(
    pair: Pair,
    rounds: int = 50,
    seed: int | None = None,
    start: Instance | None = None,
) -> GeneralSolution:
    """Alternating search for a high flow-cut gap on ``pair`` (a lower bound)."""
    if start is not None:
        inst = start
    elif seed is None:
        inst = Instance(pair.supply, pair.demand, (1,) * pair.supply.m, (1,) * pair.demand.m)
    else:
        rng = random.Random(seed)
        inst = Instance(
            pair.supply,
            pair.demand,
            tuple(rng.randint(1, 4) for _ in pair.supply.edges),
            tuple(rng.randint(1, 4) for _ in pair.demand.edges),
        )
    if not pair.supply.is_connected():
        raise GraphError("general solutions need a connected supply graph")
    history: list[Fraction] = []
    steps: list[MinorStep] = []
    small = 0
    last = None
    for _ in range(max(1, rounds)):
        inst, _ = normalize_tight(inst)
        flow, cm = _solve_round(inst)
        z, w = flow.congestion, cm.gamma
        assert w >= z, "cut-cone value below congestion"
        if history:
            assert z >= history[-1], "alternating objective decreased"
        history.append(z)
        last = GeneralSolution(inst, flow.metric, flow, cm, z, tuple(history), tuple(steps), w == z)
        if w == z:
            break
        small = small + 1 if w - z < STALL_TOLERANCE else 0
        if small >= STALL_ROUNDS:
            break
        nxt = Instance(inst.supply, inst.demand, cm.capacities, cm.demands)
        inst = _simplify(nxt, flow.metric.lengths, steps)
    assert last is not None
    if not has_k4_minor(pair.supply.n, pair.supply.edges):
        assert last.gap <= GAP_BOUND, f"flow-cut gap {last.gap} above {GAP_BOUND} on a series-parallel pair"
    return last


# ---------------------------------------------------------------------------
# Certificates


@dataclass
class CSReport:
    tight_support: list = field(default_factory=list)  # (a): cuts with x > 0 but nonzero surplus
    shortest_flow: list = field(default_factory=list)  # (b): flow paths longer than d_i
    main_chain: list = field(default_factory=list)  # (c): broken equalities of the chain

    @property
    def passed(self) -> bool:
        return not (self.tight_support or self.shortest_flow or self.main_chain)


def verify_complementary_slackness(gs: GeneralSolution) -> CSReport:
    inst = gs.instance
    g, h = inst.supply, inst.demand
    l, d = gs.metric.lengths, gs.metric.distances
    x, gamma = gs.cut.weights, gs.cut.gamma
    report = CSReport()
    for m, value in sorted(x.items()):
        if value > 0 and surplus_of_mask(inst, m) != 0:
            report.tight_support.append((m, surplus_of_mask(inst, m)))
    for k, p in enumerate(gs.flow.paths):
        if p.amount > 0:
            length = sum((l[e] for e in p.edges), ZERO)
            if length != d[p.demand]:
                report.shortest_flow.append((k, length, d[p.demand]))
    for i in range(h.m):
        if inst.demands[i] > 0 and not any(p.amount > 0 for p in gs.flow.paths_for(i)):
            report.shortest_flow.append((i, "no flow path", d[i]))

    def cut_length(edge):
        return sum((v for m, v in x.items() if _crosses(edge, m)), ZERO)

    edge_cut = [cut_length(e) for e in g.edges]
    for e in range(g.m):
        if inst.capacities[e] > 0 and edge_cut[e] != gamma * l[e]:
            report.main_chain.append(("edge", e, edge_cut[e], gamma * l[e]))
    dist_cache = {}
    for i, (a, b) in enumerate(h.edges):
        if inst.demands[i] == 0:
            continue
        if cut_length((a, b)) != d[i]:
            report.main_chain.append(("demand", i, cut_length((a, b)), d[i]))
        if a not in dist_cache:
            dist_cache[a] = shortest_distances(g, l, a)
        if d[i] != dist_cache[a][b]:
            report.main_chain.append(("distance", i, d[i], dist_cache[a][b]))
    if gamma > 0:
        for k, p in enumerate(gs.flow.paths):
            total = sum((edge_cut[e] for e in p.edges), ZERO)
            if total / gamma != d[p.demand]:
                report.main_chain.append(("path", k, total / gamma, d[p.demand]))
    return report


@dataclass(frozen=True)
class BubbleVerdict:
    verdict: str  # "cut-sufficient" or "inconclusive"
    demand: int | None = None
    path: tuple[int, ...] | None = None


def bubble_sufficiency_test(gs: GeneralSolution) -> BubbleVerdict:
    """Fires when some demand has a path crossing every tight central cut at most once."""
    inst = gs.instance
    masks = [sum(1 << v for v in c.side) for c in enumerate_tight_central_cuts(inst)]
    for i, (a, b) in enumerate(inst.demand.edges):
        if inst.demands[i] == 0:
            continue
        for path in simple_paths(inst.supply, a, b):
            if all(crossings(path, m) <= 1 for m in masks):
                assert gs.gamma == 1, "bubble criterion fired but the distortion is not 1"
                return BubbleVerdict("cut-sufficient", i, path)
    return BubbleVerdict("inconclusive")


def tight_cut_array(instance: Instance) -> np.ndarray:
    return np.array([sum(1 << v for v in c.side) for c in enumerate_tight_central_cuts(instance)], dtype=np.int64)

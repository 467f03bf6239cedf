"""Cut-cone approximation of a length metric over central cuts."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..core import GraphError, Pair, mask_vertices
from ..cutcheck import central_sides
from .model import LinearProgram, LPError, solve_lp
from .multiflow import shortest_distances

ZERO = Fraction(0)


def _crosses(edge, mask: int) -> bool:
    return ((mask >> edge[0]) ^ (mask >> edge[1])) & 1 == 1


@dataclass(frozen=True)
class CutMetricSolution:
    gamma: Fraction
    weights: dict  # side bitmask (containing vertex 0) -> positive weight
    capacities: tuple[Fraction, ...]  # optimal dual weights on supply edges
    demands: tuple[Fraction, ...]  # optimal dual weights on demand edges
    primal_objective: Fraction
    dual_objective: Fraction

    def sides(self) -> list[frozenset[int]]:
        return [frozenset(mask_vertices(m)) for m in sorted(self.weights)]

    def edge_length(self, edge) -> Fraction:
        return sum((x for m, x in self.weights.items() if _crosses(edge, m)), ZERO)


def check_metric(pair: Pair, lengths, distances) -> None:
    if any(l < 0 for l in lengths) or any(d < 0 for d in distances):
        raise GraphError("lengths and distances must be nonnegative")
    cache = {}
    for i, (a, b) in enumerate(pair.demand.edges):
        if a not in cache:
            cache[a] = shortest_distances(pair.supply, lengths, a)
        dist = cache[a][b]
        if dist is None or distances[i] > dist:
            raise GraphError(f"distance of demand {i} exceeds its shortest-path length")


def cut_metric(pair: Pair, lengths, distances) -> CutMetricSolution:
    """Minimum distortion ``gamma`` and cut weights on central cuts only."""
    lengths = tuple(Fraction(x) for x in lengths)
    distances = tuple(Fraction(x) for x in distances)
    if len(lengths) != pair.supply.m or len(distances) != pair.demand.m:
        raise GraphError("one length per supply edge and one distance per demand edge")
    check_metric(pair, lengths, distances)
    sides = [int(m) for m in central_sides(pair.supply)]
    lp = LinearProgram("min")
    gamma = lp.add_var("gamma", 1)
    cols = [lp.add_var(("x", m)) for m in sides]
    edge_rows = []
    for e, edge in enumerate(pair.supply.edges):
        coeffs = {gamma: -lengths[e]}
        for j, m in zip(cols, sides):
            if _crosses(edge, m):
                coeffs[j] = 1
        edge_rows.append(lp.add_row(coeffs, "<=", 0))
    dem_rows = []
    for i, edge in enumerate(pair.demand.edges):
        coeffs = {j: 1 for j, m in zip(cols, sides) if _crosses(edge, m)}
        dem_rows.append(lp.add_row(coeffs, ">=", distances[i]))
    res = solve_lp(lp)
    if res.status != "optimal":
        raise LPError(f"cut metric LP is {res.status}")
    x, y = res.x, res.duals
    caps = tuple(-y[r] for r in edge_rows)
    dems = tuple(y[r] for r in dem_rows)
    weights = {m: x[j] for j, m in zip(cols, sides) if x[j] > 0}
    dual_obj = sum((d * D for d, D in zip(distances, dems)), ZERO)
    assert dual_obj == res.objective
    return CutMetricSolution(x[gamma], weights, caps, dems, res.objective, dual_obj)

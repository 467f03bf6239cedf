"""Random instance streams shared by the routing and acceptance suites."""

from __future__ import annotations

import random

from spflow.core import Pair
from spflow.cutcheck import check_cut_condition, is_eulerian
from spflow.generate import random_demand_graph, random_instance, random_sp_graph
from spflow.sufficiency import decide_cut_sufficiency


def sufficient_pair(rng: random.Random, max_vertices: int, max_demands: int) -> Pair:
    while True:
        n = rng.randint(3, max_vertices)
        pair = Pair(random_sp_graph(rng, n), random_demand_graph(rng, n, rng.randint(1, max_demands)))
        if decide_cut_sufficiency(pair).cut_sufficient:
            return pair


def qualifying_instances(seed: int, count: int, eulerian: bool = True, max_vertices: int = 12, max_total: int = 20):
    """Cut-condition-satisfying, odd-spindle-free instances; Eulerian or strictly not."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        pair = sufficient_pair(rng, max_vertices, 6)
        inst = random_instance(rng, pair, eulerian=eulerian)
        if inst.total_demand > max_total or is_eulerian(inst) != eulerian:
            continue
        assert check_cut_condition(inst).satisfied
        out.append(inst)
    return out

"""Rational linear programs.

Solving goes through HiGHS (dual simplex) first; its floating-point answer
is rounded to nearby rationals and then certified exactly (primal
feasibility, dual feasibility, equal objectives).  When certification fails
the exact rational simplex takes over, so every returned optimum is exact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .simplex import simplex_min

log = logging.getLogger(__name__)

RELATIONS = ("<=", ">=", "==")
DENOMINATOR_LIMITS = (10**4, 10**7)


class LPError(ValueError):
    pass


@dataclass
class LinearProgram:
    sense: str = "min"
    n_vars: int = 0
    objective: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)  # (coeffs: dict, rel, rhs)
    names: list = field(default_factory=list)

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise LPError(f"unknown sense {self.sense!r}")

    def add_var(self, name=None, cost=0) -> int:
        j = self.n_vars
        self.n_vars += 1
        self.names.append(name)
        if cost:
            self.objective[j] = Fraction(cost)
        return j

    def add_row(self, coeffs: dict, rel: str, rhs) -> int:
        if rel not in RELATIONS:
            raise LPError(f"unknown relation {rel!r}")
        clean = {}
        for j, a in coeffs.items():
            if not 0 <= j < self.n_vars:
                raise LPError(f"row references unknown variable {j}")
            a = Fraction(a)
            if a:
                clean[j] = a
        self.rows.append((clean, rel, Fraction(rhs)))
        return len(self.rows) - 1

    def value(self, x) -> Fraction:
        return sum((c * x[j] for j, c in self.objective.items()), Fraction(0))


@dataclass(frozen=True)
class LPResult:
    status: str
    objective: Fraction | None = None
    x: tuple | None = None
    duals: tuple | None = None  # d(objective)/d(rhs) per row
    engine: str = ""


def certify(lp: LinearProgram, x, y) -> bool:
    """Exact optimality check of a primal/dual pair."""
    if any(v < 0 for v in x):
        return False
    for (coeffs, rel, rhs) in lp.rows:
        lhs = sum((a * x[j] for j, a in coeffs.items()), Fraction(0))
        if (rel == "<=" and lhs > rhs) or (rel == ">=" and lhs < rhs) or (rel == "==" and lhs != rhs):
            return False
    sgn = 1 if lp.sense == "min" else -1
    for (coeffs, rel, _), yi in zip(lp.rows, y):
        # minimisation form: '<=' rows have y <= 0, '>=' rows y >= 0
        if rel == "<=" and sgn * yi > 0:
            return False
        if rel == ">=" and sgn * yi < 0:
            return False
    reduced = [sgn * lp.objective.get(j, Fraction(0)) for j in range(lp.n_vars)]
    for (coeffs, _, _), yi in zip(lp.rows, y):
        if yi:
            for j, a in coeffs.items():
                reduced[j] -= sgn * yi * a
    if any(r < 0 for r in reduced):
        return False
    dual_value = sum((yi * rhs for (_, _, rhs), yi in zip(lp.rows, y)), Fraction(0))
    return dual_value == lp.value(x)


def _rationalize(values, limit):
    out = []
    for v in values:
        v = float(v)
        if abs(v) < 1e-11:
            out.append(Fraction(0))
        else:
            out.append(Fraction(v).limit_denominator(limit))
    return out


def _solve_highs(lp: LinearProgram):
    sgn = 1.0 if lp.sense == "min" else -1.0
    c = np.zeros(lp.n_vars)
    for j, a in lp.objective.items():
        c[j] = sgn * float(a)
    ub_idx, eq_idx = [], []
    for i, (_, rel, _) in enumerate(lp.rows):
        (eq_idx if rel == "==" else ub_idx).append(i)
    A_ub = np.zeros((len(ub_idx), lp.n_vars))
    b_ub = np.zeros(len(ub_idx))
    for k, i in enumerate(ub_idx):
        coeffs, rel, rhs = lp.rows[i]
        s = 1.0 if rel == "<=" else -1.0
        for j, a in coeffs.items():
            A_ub[k, j] = s * float(a)
        b_ub[k] = s * float(rhs)
    A_eq = np.zeros((len(eq_idx), lp.n_vars))
    b_eq = np.zeros(len(eq_idx))
    for k, i in enumerate(eq_idx):
        coeffs, _, rhs = lp.rows[i]
        for j, a in coeffs.items():
            A_eq[k, j] = float(a)
        b_eq[k] = float(rhs)
    res = linprog(
        c,
        A_ub=A_ub if ub_idx else None,
        b_ub=b_ub if ub_idx else None,
        A_eq=A_eq if eq_idx else None,
        b_eq=b_eq if eq_idx else None,
        bounds=(0, None),
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status == 2:
        return "infeasible", None, None
    if res.status == 3:
        return "unbounded", None, None
    if res.status != 0:
        return "failed", None, None
    y = [0.0] * len(lp.rows)
    for k, i in enumerate(ub_idx):
        s = 1.0 if lp.rows[i][1] == "<=" else -1.0
        y[i] = sgn * s * res.ineqlin.marginals[k]
    for k, i in enumerate(eq_idx):
        y[i] = sgn * res.eqlin.marginals[k]
    return "optimal", res.x, y


def solve_lp(lp: LinearProgram, engine: str = "auto") -> LPResult:
    """Exact optimum with duals, or an ``infeasible``/``unbounded`` verdict."""
    if engine not in ("auto", "exact"):
        raise LPError(f"unknown engine {engine!r}")
    if engine == "auto":
        status, xf, yf = _solve_highs(lp)
        if status == "optimal":
            for limit in DENOMINATOR_LIMITS:
                x = _rationalize(xf, limit)
                y = _rationalize(yf, limit)
                if certify(lp, x, y):
                    return LPResult("optimal", lp.value(x), tuple(x), tuple(y), "highs+certificate")
            log.debug("rational certificate failed; falling back to exact simplex")
    return _solve_exact(lp)


def _solve_exact(lp: LinearProgram) -> LPResult:
    sgn = 1 if lp.sense == "min" else -1
    cost = [sgn * lp.objective.get(j, Fraction(0)) for j in range(lp.n_vars)]
    rows, rels, rhs = [], [], []
    for coeffs, rel, b in lp.rows:
        dense = [Fraction(0)] * lp.n_vars
        for j, a in coeffs.items():
            dense[j] = a
        rows.append(dense)
        rels.append(rel)
        rhs.append(b)
    status, x, y, _ = simplex_min(cost, rows, rels, rhs)
    if status != "optimal":
        return LPResult(status, engine="exact-simplex")
    y = [sgn * v for v in y]
    assert certify(lp, x, y), "exact simplex produced an uncertified optimum"
    return LPResult("optimal", lp.value(x), tuple(x), tuple(y), "exact-simplex")

"""Two-phase tableau simplex over exact rationals with Bland's rule."""

from __future__ import annotations

from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def simplex_min(cost, rows, rels, rhs):
    """Minimise ``cost . x`` subject to ``rows[i] . x (rel) rhs[i]``, ``x >= 0``.

    ``rows`` are dense lists of Fractions.  Returns ``(status, x, y, value)``
    where ``y`` are row duals with ``value = y . rhs`` and ``cost - A^T y >= 0``.
    """
    m = len(rows)
    n = len(cost)
    # standard form: one slack per inequality, then one artificial per row
    slack_of = {}
    n_slack = 0
    for i, rel in enumerate(rels):
        if rel != "==":
            slack_of[i] = n + n_slack
            n_slack += 1
    n_real = n + n_slack
    width = n_real + m
    tab = []
    flip = []
    for i in range(m):
        row = [ZERO] * (width + 1)
        for j, a in enumerate(rows[i]):
            if a:
                row[j] = Fraction(a)
        if i in slack_of:
            row[slack_of[i]] = ONE if rels[i] == "<=" else -ONE
        b = Fraction(rhs[i])
        sign = -1 if b < 0 else 1
        if sign < 0:
            row = [-x for x in row]
            b = -b
        flip.append(sign)
        row[n_real + i] = ONE
        row[width] = b
        tab.append(row)
    basis = [n_real + i for i in range(m)]

    def pivot(r, c):
        piv = tab[r][c]
        if piv != ONE:
            tab[r] = [x / piv for x in tab[r]]
        pr = tab[r]
        nz = [j for j, x in enumerate(pr) if x]
        for i in range(m):
            if i != r and tab[i][c]:
                f = tab[i][c]
                row = tab[i]
                for j in nz:
                    row[j] -= f * pr[j]
        basis[r] = c

    def run(obj, allowed):
        # obj: reduced-cost row over columns (len width + 1), kept in sync
        while True:
            enter = next((j for j in range(width) if allowed[j] and obj[j] < 0), None)
            if enter is None:
                return "optimal"
            best = None
            for i in range(m):
                a = tab[i][enter]
                if a > 0:
                    ratio = tab[i][width] / a
                    key = (ratio, basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            r = best[1]
            pivot(r, enter)
            f = obj[enter]
            if f:
                pr = tab[r]
                for j in range(width + 1):
                    if pr[j]:
                        obj[j] -= f * pr[j]

    def reduced(costs):
        obj = list(costs) + [ZERO]
        for i, bj in enumerate(basis):
            cb = costs[bj]
            if cb:
                for j in range(width + 1):
                    if tab[i][j]:
                        obj[j] -= cb * tab[i][j]
        return obj

    phase1 = [ZERO] * n_real + [ONE] * m
    obj = reduced(phase1)
    run(obj, [True] * width)
    if -obj[width] > 0:
        return "infeasible", None, None, None
    # drive zero-level artificials out where possible
    for i in range(m):
        if basis[i] >= n_real:
            col = next((j for j in range(n_real) if tab[i][j]), None)
            if col is not None:
                pivot(i, col)
    costs = [Fraction(c) for c in cost] + [ZERO] * (n_slack + m)
    obj = reduced(costs)
    status = run(obj, [True] * n_real + [False] * m)
    if status == "unbounded":
        return "unbounded", None, None, None
    x = [ZERO] * n_real
    for i, bj in enumerate(basis):
        if bj < n_real:
            x[bj] = tab[i][width]
    y = [-obj[n_real + i] * flip[i] for i in range(m)]
    value = sum((Fraction(c) * v for c, v in zip(cost, x[:n])), ZERO)
    return "optimal", x[:n], y, value

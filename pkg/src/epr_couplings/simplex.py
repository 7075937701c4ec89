"""Exact simplex over an ordered field, with Bland's anti-cycling rule.

Solves  find/optimize x >= 0  subject to  A x = b  where entries live in any
ordered field whose elements support +, -, *, / and comparisons against the
integers 0 and 1 (``fractions.Fraction`` and :class:`~.scalars.Scalar` both
qualify).  Phase 1 introduces one artificial variable per row and minimizes
their sum; phase 2 optimizes the caller's objective.  Every pivot choice uses
Bland's smallest-index rule, so the method terminates on degenerate problems
-- and the boundary cases here are all degenerate.

Problem sizes in this package are tiny (<= ~30 rows, 256 columns), so the
dense exact tableau is affordable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

__all__ = ["LPResult", "solve_lp"]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: str
    x: list | None = None
    objective: object | None = None


def solve_lp(
    rows: Sequence[Sequence],
    rhs: Sequence,
    objective: Sequence | None = None,
    *,
    maximize: bool = True,
) -> LPResult:
    """Solve ``A x = b, x >= 0`` exactly, optionally optimizing ``objective``.

    With no objective the result is any basic feasible point (or the
    INFEASIBLE status).  Row/column counts must agree; entries may mix Python
    ints with field elements.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    if any(len(r) != n for r in rows):
        raise ValueError("ragged constraint matrix")
    if len(rhs) != m:
        raise ValueError("rhs length does not match row count")
    if objective is not None and len(objective) != n:
        raise ValueError("objective length does not match column count")

    width = n + m  # structural + artificial columns
    # Plain ints are lifted to Fraction so that pivot divisions stay exact;
    # Q[sqrt(2)] right-hand sides mix in via the Scalar reflected operators.
    one, zero = Fraction(1), Fraction(0)
    tab: list[list] = []
    for i in range(m):
        b = Fraction(rhs[i]) if isinstance(rhs[i], int) else rhs[i]
        neg = b < 0
        row = [Fraction(v) if isinstance(v, int) else v for v in rows[i]]
        if neg:
            row = [-v for v in row]
        row.extend(one if k == i else zero for k in range(m))
        row.append(-b if neg else b)
        tab.append(row)
    basis = list(range(n, n + m))

    # Phase-1 reduced costs: cost 1 on artificials, 0 elsewhere, basis all
    # artificial, so d_j = [j artificial] - sum_i T[i][j].
    d = [0] * (width + 1)
    for j in range(width + 1):
        total = 0
        for i in range(m):
            total = total + tab[i][j]
        d[j] = (1 if n <= j < width else 0) - total

    def pivot(r: int, jc: int) -> None:
        prow = tab[r]
        pv = prow[jc]
        if pv != 1:
            tab[r] = prow = [v / pv for v in prow]
        for i in range(m):
            if i != r:
                f = tab[i][jc]
                if f != 0:
                    row = tab[i]
                    tab[i] = [a - f * b for a, b in zip(row, prow)]
        f = d[jc]
        if f != 0:
            for j in range(width + 1):
                d[j] = d[j] - f * prow[j]
        basis[r] = jc

    def run_bland(allowed_width: int) -> str:
        while True:
            enter = -1
            for j in range(allowed_width):
                if d[j] < 0:
                    enter = j
                    break
            if enter < 0:
                return OPTIMAL
            leave = -1
            best = None
            for i in range(m):
                a = tab[i][enter]
                if a > 0:
                    ratio = tab[i][width] / a
                    if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[leave]
                    ):
                        best = ratio
                        leave = i
            if leave < 0:
                return UNBOUNDED
            pivot(leave, enter)

    status = run_bland(width)
    assert status == OPTIMAL  # phase 1 is bounded below by zero
    if -d[width] > 0:  # objective value = -d[rhs]
        return LPResult(INFEASIBLE)

    # Drive remaining zero-valued artificials out of the basis; rows with no
    # structural pivot available are redundant and can be ignored.
    redundant: set[int] = set()
    for i in range(m):
        if basis[i] >= n:
            jc = next((j for j in range(n) if tab[i][j] != 0), None)
            if jc is None:
                redundant.add(i)
            else:
                pivot(i, jc)

    def extract() -> list:
        x = [0] * n
        for i in range(m):
            if basis[i] < n:
                x[basis[i]] = tab[i][width]
        return x

    if objective is None:
        return LPResult(OPTIMAL, x=extract())

    # Phase 2: minimize (-objective if maximizing).  Artificial columns are
    # frozen out by restricting the entering search to structural columns;
    # redundant rows keep their artificial basis at value zero.
    cost = [Fraction(v) if isinstance(v, int) else v for v in objective]
    if maximize:
        cost = [-v for v in cost]
    for j in range(width + 1):
        d[j] = 0
    for j, cj in enumerate(cost):
        d[j] = cj
    for i in range(m):
        if i in redundant or basis[i] >= n:
            continue
        cb = cost[basis[i]]
        if cb != 0:
            row = tab[i]
            for j in range(width + 1):
                d[j] = d[j] - cb * row[j]

    status = run_bland(n)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    # The cost-row rhs cell holds -(current cost); cost is -objective when
    # maximizing, so the optimum is d[width] (maximize) or -d[width] (minimize).
    return LPResult(OPTIMAL, x=extract(), objective=(d[width] if maximize else -d[width]))

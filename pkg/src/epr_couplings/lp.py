"""Coupling feasibility as exact linear programming.

A set of marginal specs turns into the equality system ``M q = P`` over the
256 nonnegative coupling weights: one row per distinct "all listed variables
equal +1" probability (the empty subset gives the normalization row, whose
entries are all 1).  Feasibility of that system decides whether the marginals
admit a joint coupling; adding the four observable-pair rows with right-hand
side p asks whether a specific outcome vector is admitted.

Verdicts are always exact.  For rational systems the search is delegated to
a float LP solver and its answer is then *certified* in exact arithmetic --
a rational witness re-derived from the reported support, or a rationalized
Farkas certificate for infeasibility.  Whenever certification fails, and for
right-hand sides in Q[sqrt(2)] \\ Q (where no float shortcut is trusted), the
exact Bland simplex decides directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .model import (
    N_ASSIGNMENTS,
    N_VARIABLES,
    CouplingTable,
    MarginalSpec,
    OutcomeVector,
    VariableId,
)
from .scalars import Scalar, as_scalar
from .simplex import INFEASIBLE, OPTIMAL, solve_lp

__all__ = [
    "ConstraintSystem",
    "ConflictingMarginalsError",
    "InfeasibleSystemError",
    "FeasibilityResult",
    "build_system",
    "feasible",
    "optimize",
    "OUTCOME_PAIRS",
]

#: The four observable pairs, in outcome-vector component order.
OUTCOME_PAIRS = (
    (VariableId.A11, VariableId.B11),
    (VariableId.A12, VariableId.B12),
    (VariableId.A21, VariableId.B21),
    (VariableId.A22, VariableId.B22),
)


class ConflictingMarginalsError(ValueError):
    """Two specs assign different values to the same marginal probability."""


class InfeasibleSystemError(ValueError):
    """The constraint system admits no coupling at all."""


def _variables_mask(subset: Iterable[VariableId]) -> int:
    mask = 0
    for var in subset:
        mask |= 1 << (N_VARIABLES - 1 - var)
    return mask


@dataclass(frozen=True)
class ConstraintSystem:
    """Rows of the coupling LP: one (column-indicator, rhs) pair per subset."""

    subsets: tuple[frozenset[VariableId], ...]
    rhs: tuple[Scalar, ...]
    objective: tuple[Fraction, ...] | None = None

    @property
    def n_rows(self) -> int:
        return len(self.subsets)

    @property
    def is_rational(self) -> bool:
        return all(v.is_rational for v in self.rhs)

    def row_masks(self) -> list[int]:
        return [_variables_mask(s) for s in self.subsets]

    def row_indicator(self, i: int) -> list[int]:
        """The 0/1 column pattern of row i (1 iff the column's assignment
        sets every variable of the row's subset to +1)."""
        mask = _variables_mask(self.subsets[i])
        return [1 if (j & mask) == mask else 0 for j in range(N_ASSIGNMENTS)]


def _sorted_subsets(mapping: Mapping[frozenset[VariableId], Scalar]):
    return sorted(mapping, key=lambda s: (len(s), sorted(s)))


def _accumulate_rows(
    specs: Iterable[MarginalSpec],
    extra: Iterable[tuple[frozenset[VariableId], Scalar]] = (),
) -> dict[frozenset[VariableId], Scalar]:
    rows: dict[frozenset[VariableId], Scalar] = {frozenset(): as_scalar(1)}
    items: list[tuple[frozenset[VariableId], Scalar]] = []
    for spec in specs:
        items.extend(spec.all_ones_parameterization().items())
    items.extend(extra)
    for subset, value in items:
        seen = rows.get(subset)
        if seen is None:
            rows[subset] = value
        elif seen != value:
            names = ",".join(v.name for v in sorted(subset)) or "()"
            raise ConflictingMarginalsError(
                f"marginal Pr[{names} = +1] assigned both {seen} and {value}"
            )
    return rows


def build_system(specs: Iterable[MarginalSpec]) -> ConstraintSystem:
    """Deduplicated constraint rows for the given marginals.

    Rows are ordered by subset size then variable position, the empty
    (normalization) subset first.  Conflicting assignments raise.
    """
    rows = _accumulate_rows(specs)
    order = _sorted_subsets(rows)
    return ConstraintSystem(tuple(order), tuple(rows[s] for s in order))


class FeasibilityResult:
    """Feasibility verdict plus (for feasible systems) an exact witness.

    The witness coupling is certified against every constraint row at solve
    time; the 256-entry table object itself is materialized lazily.
    """

    __slots__ = ("feasible", "engine", "_q", "_witness")

    def __init__(self, feasible: bool, q: Sequence | None, engine: str):
        self.feasible = feasible
        self.engine = engine
        self._q = q
        self._witness: CouplingTable | None = None

    @property
    def witness(self) -> CouplingTable | None:
        if self._q is not None and self._witness is None:
            self._witness = _witness_table(self._q)
        return self._witness

    def __bool__(self) -> bool:
        return self.feasible

    def __repr__(self) -> str:
        return f"FeasibilityResult(feasible={self.feasible}, engine={self.engine!r})"


# -- cached per-structure data for the float path ------------------------------

_STRUCTURE_CACHE: dict[tuple, tuple] = {}


def _structure(subsets: tuple[frozenset[VariableId], ...]):
    key = subsets
    hit = _STRUCTURE_CACHE.get(key)
    if hit is not None:
        return hit
    masks = [_variables_mask(s) for s in subsets]
    m = len(masks)
    a = np.zeros((m, N_ASSIGNMENTS + m))
    for i, mask in enumerate(masks):
        for j in range(N_ASSIGNMENTS):
            if (j & mask) == mask:
                a[i, j] = 1.0
        a[i, N_ASSIGNMENTS + i] = 1.0
    cost = np.concatenate([np.zeros(N_ASSIGNMENTS), np.ones(m)])
    col_rows = tuple(
        tuple(i for i, mask in enumerate(masks) if (j & mask) == mask)
        for j in range(N_ASSIGNMENTS)
    )
    entry = (masks, a, cost, col_rows)
    if len(_STRUCTURE_CACHE) > 64:
        _STRUCTURE_CACHE.clear()
    _STRUCTURE_CACHE[key] = entry
    return entry


def _witness_table(q: Sequence) -> CouplingTable:
    return CouplingTable(tuple(as_scalar(v if not isinstance(v, int) else Fraction(v)) for v in q))


def _check_solution(masks: list[int], rhs: Sequence, q: Sequence) -> bool:
    """Exact check that q >= 0 and every row sums to its rhs."""
    support = [(j, v) for j, v in enumerate(q) if v != 0]
    if any(v < 0 for _, v in support):
        return False
    for mask, want in zip(masks, rhs):
        total = None
        for j, v in support:
            if (j & mask) == mask:
                total = v if total is None else total + v
        if total is None:
            total = 0
        if total != want:
            return False
    return True


def _solve_on_support(
    masks: list[int], rhs: list[Fraction], cols: list[int]
) -> list[Fraction] | None:
    """Exact Gaussian elimination of M[:, cols] x = rhs; None when it fails
    to produce a nonnegative solution of the full system."""
    m = len(masks)
    n = len(cols)
    aug = []
    for i in range(m):
        row = [Fraction(1) if (cols[idx] & masks[i]) == masks[i] else Fraction(0) for idx in range(n)]
        row.append(rhs[i])
        aug.append(row)
    piv = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, m) if aug[i][c]), None)
        if pr is None:
            continue
        aug[r], aug[pr] = aug[pr], aug[r]
        pv = aug[r][c]
        if pv != 1:
            aug[r] = [x / pv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        piv.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][n]:
            return None
    q = [Fraction(0)] * N_ASSIGNMENTS
    for i, c in enumerate(piv):
        if aug[i][n] < 0:
            return None
        q[cols[c]] = aug[i][n]
    if not _check_solution(masks, rhs, q):
        return None
    return q


def _farkas_certified(
    masks: list[int], col_rows, rhs: list[Fraction], duals: Sequence[float]
) -> bool:
    """True when some rationalization of the float duals proves infeasibility:
    y.b > 0 with y.A_j <= 0 for every column."""
    for flip in (1, -1):
        y = [flip * Fraction(v).limit_denominator(1 << 24) for v in duals]
        if sum(yi * bi for yi, bi in zip(y, rhs)) <= 0:
            continue
        ok = True
        for rows_j in col_rows:
            total = Fraction(0)
            for i in rows_j:
                total += y[i]
            if total > 0:
                ok = False
                break
        if ok:
            return True
    return False


def _require_exact(system: ConstraintSystem) -> None:
    if not all(v.is_exact for v in system.rhs):
        raise ValueError(
            "LP feasibility requires exact scalars; approximate inputs have "
            "no reliable verdict on boundary cases"
        )


def _require_exact_inputs(specs: list[MarginalSpec], p: OutcomeVector | None) -> None:
    if any(not s.is_exact for s in specs) or (p is not None and not p.is_exact):
        raise ValueError(
            "LP feasibility requires exact scalars; approximate inputs have "
            "no reliable verdict on boundary cases"
        )


def _feasible_exact(system: ConstraintSystem) -> FeasibilityResult:
    _require_exact(system)
    masks = system.row_masks()
    rational = system.is_rational
    rhs = [v.as_fraction() if rational else v for v in system.rhs]
    rows = [
        [1 if (j & mask) == mask else 0 for j in range(N_ASSIGNMENTS)] for mask in masks
    ]
    res = solve_lp(rows, rhs)
    if res.status == INFEASIBLE:
        return FeasibilityResult(False, None, "exact-simplex")
    assert res.status == OPTIMAL
    if not _check_solution(masks, rhs, res.x):
        raise AssertionError("exact simplex produced an invalid basic solution")
    return FeasibilityResult(True, res.x, "exact-simplex")


def _feasible_hybrid(system: ConstraintSystem) -> FeasibilityResult:
    masks, a_eq, cost, col_rows = _structure(system.subsets)
    rhs = [v.as_fraction() for v in system.rhs]
    res = linprog(
        cost,
        A_eq=a_eq,
        b_eq=np.array([float(v) for v in rhs]),
        bounds=(0, None),
        method="highs",
    )
    if res.status == 0:
        x = res.x[:N_ASSIGNMENTS]
        if res.fun < 1e-7:
            cols = [j for j in range(N_ASSIGNMENTS) if x[j] > 1e-9]
            q = _solve_on_support(masks, rhs, cols)
            if q is not None:
                return FeasibilityResult(True, q, "certified-float")
        duals = getattr(res, "eqlin", None)
        if duals is not None and _farkas_certified(masks, col_rows, rhs, duals.marginals):
            return FeasibilityResult(False, None, "certified-float")
        cols = [j for j in range(N_ASSIGNMENTS) if x[j] > 1e-12]
        q = _solve_on_support(masks, rhs, cols)
        if q is not None:
            return FeasibilityResult(True, q, "certified-float")
    return _feasible_exact(system)


def _augmented_system(
    specs: Iterable[MarginalSpec], p: OutcomeVector | None
) -> ConstraintSystem:
    extra = []
    if p is not None:
        extra = [
            (frozenset(pair), value) for pair, value in zip(OUTCOME_PAIRS, p.components)
        ]
    rows = _accumulate_rows(specs, extra)
    order = _sorted_subsets(rows)
    return ConstraintSystem(tuple(order), tuple(rows[s] for s in order))


def feasible(
    specs: Iterable[MarginalSpec],
    p: OutcomeVector | None = None,
    *,
    engine: str = "auto",
) -> FeasibilityResult:
    """Decide whether the marginals (plus, optionally, the four observable
    pair probabilities of ``p``) admit a coupling; return an exact witness
    when they do.

    ``engine="exact"`` forces the exact simplex; ``"auto"`` uses the
    certified float path for rational systems.  Either way the verdict and
    any witness are exact.
    """
    specs = list(specs)
    _require_exact_inputs(specs, p)
    system = _augmented_system(specs, p)
    if engine not in ("auto", "exact"):
        raise ValueError(f"unknown engine {engine!r}")
    if engine == "exact" or not system.is_rational:
        return _feasible_exact(system)
    return _feasible_hybrid(system)


def _direction_fractions(direction: Sequence) -> list[Fraction]:
    out = []
    for v in direction:
        s = as_scalar(v)
        out.append(s.as_fraction())
    if len(out) != 4:
        raise ValueError("direction needs exactly 4 components")
    return out


def optimize(specs: Iterable[MarginalSpec], direction: Sequence) -> Scalar:
    """Maximize ``direction . p`` over all outcome vectors the marginals admit.

    The objective is pushed through the coupling variables (p is the image of
    the coupling under the four observable-pair rows), and the optimum is
    found with the exact simplex, so values like ``(1+sqrt2)/2`` are returned
    exactly.  Raises :class:`InfeasibleSystemError` when no coupling exists.
    """
    specs = list(specs)
    _require_exact_inputs(specs, None)
    base = build_system(specs)
    dirs = _direction_fractions(direction)
    pair_masks = [_variables_mask(pair) for pair in OUTCOME_PAIRS]
    objective = []
    for j in range(N_ASSIGNMENTS):
        c = Fraction(0)
        for d, mask in zip(dirs, pair_masks):
            if (j & mask) == mask:
                c += d
        objective.append(c)
    system = ConstraintSystem(base.subsets, base.rhs, tuple(objective))

    _require_exact(system)
    masks = system.row_masks()
    rational = system.is_rational
    rhs = [v.as_fraction() if rational else v for v in system.rhs]
    rows = [
        [1 if (j & mask) == mask else 0 for j in range(N_ASSIGNMENTS)] for mask in masks
    ]
    res = solve_lp(rows, rhs, objective=objective, maximize=True)
    if res.status == INFEASIBLE:
        raise InfeasibleSystemError("the marginal constraints admit no coupling")
    if res.status != OPTIMAL:
        raise AssertionError("support query unbounded despite normalization row")
    value = res.objective
    return as_scalar(value) if not isinstance(value, Scalar) else value

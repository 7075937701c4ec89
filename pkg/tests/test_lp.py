import random
from fractions import Fraction

import pytest

from epr_couplings.lp import (
    OUTCOME_PAIRS,
    ConflictingMarginalsError,
    InfeasibleSystemError,
    build_system,
    feasible,
    optimize,
)
from epr_couplings.model import (
    ConnectionVector,
    MarginalSpec,
    OutcomeVector,
    VariableId,
    connection_marginals,
    outcome_marginals,
)
from epr_couplings.scalars import Scalar
from epr_couplings.stats import compatible

V = VariableId
HALF = Fraction(1, 2)
EPS0 = ConnectionVector(0, 0, 0, 0)
EPS_T = ConnectionVector(*([Scalar.quadratic(Fraction(-1, 8), Fraction(1, 8))] * 4))
QUARTER = OutcomeVector(*([Fraction(1, 4)] * 4))
PR_BOX = OutcomeVector(HALF, HALF, HALF, 0)


def single_marginals():
    return [
        MarginalSpec.from_prob_all_plus((v,), {frozenset((v,)): HALF}) for v in V
    ]


def random_p(rng, denominator=64):
    return OutcomeVector(*(Fraction(rng.randint(0, denominator), 2 * denominator)
                           for _ in range(4)))


def random_eps(rng, denominator=64):
    return ConnectionVector(*(Fraction(rng.randint(0, denominator), 2 * denominator)
                              for _ in range(4)))


def test_build_system_pair_row_has_64_ones():
    spec = outcome_marginals(QUARTER)[0]
    system = build_system([spec])
    pair = frozenset((V.A11, V.B11))
    i = system.subsets.index(pair)
    assert sum(system.row_indicator(i)) == 64  # both bits pinned, six free


def test_build_system_empty_row():
    system = build_system([])
    assert system.subsets == (frozenset(),)
    assert system.row_indicator(0) == [1] * 256
    assert system.rhs[0] == 1


def test_build_system_four_variable_marginal():
    probs = {}
    variables = (V.A11, V.A12, V.A21, V.A22)
    import itertools
    for k in range(5):
        for combo in itertools.combinations(variables, k):
            probs[frozenset(combo)] = Fraction(1, 2 ** k)
    spec = MarginalSpec.from_prob_all_plus(variables, probs)
    system = build_system([spec])
    assert system.n_rows == 16
    i = system.subsets.index(frozenset((V.A11,)))
    assert system.rhs[i] == HALF
    assert sum(system.row_indicator(i)) == 128


def test_build_system_deduplicates_shared_singletons():
    specs = outcome_marginals(QUARTER) + connection_marginals(EPS0)
    system = build_system(specs)
    # 1 empty + 8 singletons + 4 outcome pairs + 4 connection pairs
    assert system.n_rows == 17
    n_pairs = sum(1 for s in system.subsets if len(s) == 2)
    assert n_pairs == 8


def test_build_system_conflict_detection():
    a = outcome_marginals(QUARTER)[0]
    b = outcome_marginals(PR_BOX)[0]
    with pytest.raises(ConflictingMarginalsError):
        build_system([a, b])


def test_feasible_compatible_pair():
    res = feasible(outcome_marginals(QUARTER) + connection_marginals(EPS0))
    assert res.feasible
    w = res.witness
    assert w.outcome_vector() == QUARTER
    assert w.connection_vector() == EPS0


def test_infeasible_pr_box_with_null_connection():
    res = feasible(outcome_marginals(PR_BOX) + connection_marginals(EPS0))
    assert not res.feasible
    assert res.witness is None


def test_singletons_admit_every_outcome_vector_via_m1():
    singles = single_marginals()
    rng = random.Random(5)
    for _ in range(25):
        p = random_p(rng)
        res = feasible(singles, p=p)
        assert res.feasible
        assert res.witness.outcome_vector() == p


def test_m1_rows_conflict_with_outcome_specs():
    specs = outcome_marginals(QUARTER)
    with pytest.raises(ConflictingMarginalsError):
        feasible(specs, p=PR_BOX)
    # identical values dedup instead of conflicting
    assert feasible(specs, p=QUARTER).feasible


def test_hybrid_and_exact_engines_agree():
    rng = random.Random(13)
    for _ in range(30):
        p = random_p(rng, denominator=16)
        eps = random_eps(rng, denominator=16)
        specs = outcome_marginals(p) + connection_marginals(eps)
        fast = feasible(specs)
        slow = feasible(specs, engine="exact")
        assert fast.feasible == slow.feasible == compatible(p, eps)


def test_witness_reproduces_every_row_exactly():
    rng = random.Random(21)
    checked = 0
    while checked < 10:
        p = random_p(rng)
        eps = random_eps(rng)
        specs = outcome_marginals(p) + connection_marginals(eps)
        res = feasible(specs)
        if not res.feasible:
            continue
        checked += 1
        system = build_system(specs)
        for subset, want in zip(system.subsets, system.rhs):
            assert res.witness.prob_all_plus(subset) == want


def test_monotonicity_adding_specs_shrinks_feasible_set():
    rng = random.Random(31)
    base = connection_marginals(ConnectionVector(*([Fraction(1, 8)] * 4)))
    extra = base + [
        MarginalSpec.from_prob_all_plus(
            (V.A11, V.A22),
            {
                frozenset((V.A11,)): HALF,
                frozenset((V.A22,)): HALF,
                frozenset((V.A11, V.A22)): HALF,
            },
        )
    ]
    for _ in range(20):
        p = random_p(rng, denominator=8)
        if feasible(extra, p=p).feasible:
            assert feasible(base, p=p).feasible


def test_optimize_chsh_face():
    assert optimize(connection_marginals(EPS0), (1, 1, 1, -2)) == Scalar(1)


def test_optimize_tsirelson_value_exact():
    value = optimize(connection_marginals(EPS_T), (1, 1, 1, -2))
    assert value == Scalar.quadratic(HALF, HALF)  # (1+sqrt2)/2


def test_optimize_zero_direction():
    assert optimize(connection_marginals(EPS0), (0, 0, 0, 0)) == Scalar(0)


def test_optimize_vertex_cross_check():
    # the classical face value 1 is attained at p = (1/2, 1/2, 0, 0)
    vertex = OutcomeVector(HALF, HALF, 0, 0)
    value = sum(
        d * c.a for d, c in zip((1, 1, 1, -2), vertex.components)
    )
    assert value == 1
    assert feasible(connection_marginals(EPS0), p=vertex).feasible


def test_optimize_infeasible_system():
    align = MarginalSpec.from_prob_all_plus(
        (V.A11, V.B11),
        {
            frozenset((V.A11,)): HALF,
            frozenset((V.B11,)): HALF,
            frozenset((V.A11, V.B11)): HALF,
        },
    )
    anti = MarginalSpec.from_prob_all_plus(
        (V.A11, V.B11),
        {
            frozenset((V.A11,)): HALF,
            frozenset((V.B11,)): HALF,
            frozenset((V.A11, V.B11)): Fraction(0),
        },
    )
    with pytest.raises(ConflictingMarginalsError):
        optimize([align, anti], (1, 0, 0, 0))

    # row-consistent yet unsatisfiable: an odd cycle of perfect
    # anti-correlations on three variables
    def anti_pair(x, y):
        return MarginalSpec.from_prob_all_plus(
            (x, y),
            {
                frozenset((x,)): HALF,
                frozenset((y,)): HALF,
                frozenset((x, y)): Fraction(0),
            },
        )

    cycle = [
        anti_pair(V.A11, V.B11),
        anti_pair(V.B11, V.A12),
        anti_pair(V.A11, V.A12),
    ]
    with pytest.raises(InfeasibleSystemError):
        optimize(cycle, (1, 0, 0, 0))
    assert not feasible(cycle).feasible


def test_outcome_pairs_constant():
    assert [tuple(v.name for v in pair) for pair in OUTCOME_PAIRS] == [
        ("A11", "B11"), ("A12", "B12"), ("A21", "B21"), ("A22", "B22"),
    ]


def test_hairline_feasibility_margins_stay_exact():
    """Instances a whisker away from the feasibility boundary must still be
    decided exactly: with eps = (e,e,e,e) and p = (1/2, 1/2, 1/2, x) the
    boundary sits at x* = 1/2 - 4e, and the margin equals |x - x*|."""
    e = Fraction(1, 64)
    x_star = HALF - 4 * e
    eps = ConnectionVector(e, e, e, e)
    deltas = [Fraction(0)]
    deltas += [Fraction(1, 2 ** k) for k in (6, 12, 20, 24)]
    deltas += [Fraction(1, 3 ** 10)]
    for delta in deltas:
        for x in (x_star - delta, x_star + delta):
            p = OutcomeVector(HALF, HALF, HALF, x)
            specs = outcome_marginals(p) + connection_marginals(eps)
            want = compatible(p, eps)
            assert want == (delta == 0 or x > x_star)
            res = feasible(specs)
            assert res.feasible == want, (x, delta, res.engine)
            if res.feasible:
                assert res.witness.outcome_vector() == p


def test_lp_rejects_approximate_inputs():
    p = OutcomeVector(0.25, 0.25, 0.25, 0.25)
    eps = ConnectionVector(0.25, 0.25, 0.25, 0.25)
    with pytest.raises(ValueError, match="exact"):
        feasible(outcome_marginals(p) + connection_marginals(eps))
    with pytest.raises(ValueError, match="exact"):
        optimize(connection_marginals(eps), (1, 1, 1, -2))


def test_sqrt2_rhs_uses_exact_engine():
    res = feasible(connection_marginals(EPS_T))
    assert res.feasible
    assert res.engine == "exact-simplex"
    assert res.witness.connection_vector() == EPS_T

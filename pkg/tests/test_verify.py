import json
from fractions import Fraction

import pytest

from epr_couplings import verify
from epr_couplings.model import ConnectionVector, OutcomeVector
from epr_couplings.stats import compatible, s_pair, CorrelationQuad


def test_lemma1_small_run_passes():
    report = verify.verify_lemma1(150, seed=7)
    assert report["pass"]
    assert report["agreements"] == 150
    assert report["failures"] == []


def test_lemma1_zero_trials_is_empty_pass():
    report = verify.verify_lemma1(0, seed=7)
    assert report["pass"] and report["checked"] == 0


def test_lemma1_detects_corrupted_criterion():
    def corrupted(p, eps):
        se = s_pair(CorrelationQuad.from_connections(eps))
        sp = s_pair(CorrelationQuad.from_outcomes(p))
        limit = Fraction(5, 4)  # deflated bound: rejects genuinely compatible pairs
        return se.s0 + sp.s1 <= limit and se.s1 + sp.s0 <= limit

    report = verify.verify_lemma1(200, seed=7, compat_fn=corrupted)
    assert not report["pass"]
    assert report["failures"]
    first = report["failures"][0]
    assert first["compatible"] != first["lp_feasible"]


def test_lemma1_determinism():
    a = verify.verify_lemma1(60, seed=42)
    b = verify.verify_lemma1(60, seed=42)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_fine_small_run():
    report = verify.verify_fine(400, seed=3)
    assert report["pass"]
    assert report["pr_box_incompatible"] and report["quarter_compatible"]


def test_e0_report():
    report = verify.verify_e0(200, seed=5)
    assert report["pass"]
    assert report["member_count"] == 8
    assert report["exact_statistics"]
    assert ["0", "0", "0", "0"] in report["members"]
    assert ["1/2", "1/2", "1/2", "1/2"] in report["members"]


def test_noforcing_small_run():
    report = verify.verify_noforcing(
        density=3, seed=11, min_vectors=100, boundary_samples=8
    )
    assert report["pass"]
    assert report["open_checked"] >= 100
    assert report["open_verified"] == report["open_checked"]
    # the 3^4 grid contains all eight s0 = 1 vectors
    assert report["s0_one_checked"] == 8
    assert report["s0_one_verified"] == 8


def test_noforcing_directed_example():
    eps = ConnectionVector(0, 0, 0, Fraction(1, 8))
    from epr_couplings.stats import noforcing_counterexample, qm_compliant, Compliance
    p = noforcing_counterexample(eps)
    assert compatible(p, eps)
    assert qm_compliant(p) is Compliance.OUTSIDE


def test_nomatching_report():
    report = verify.verify_nomatching(seed=1, grid_resolution=41)
    assert report["pass"]
    assert abs(report["collinearity_det"]) > 1e-3
    assert abs(report["curved_collinearity_det"]) > 1e-3
    assert len(report["curved_boundary_points"]) >= 3
    assert report["witness_compliant_chsh_violating"]["ok"]
    assert report["witness_tsirelson_noncompliant"]["ok"]
    assert report["grid_inclusion_holds"]
    assert report["grid_cells"] == 41 * 41
    assert "note" in report


def test_nomatching_rejects_degenerate_crosssection():
    with pytest.raises(ValueError, match="degenerate"):
        verify.verify_nomatching((Fraction(1, 2), Fraction(1, 4)))
    with pytest.raises(ValueError, match="degenerate"):
        verify.verify_nomatching((Fraction(1, 4), Fraction(0)))
    with pytest.raises(ValueError, match="three rays"):
        verify.verify_nomatching(rays=2, grid_resolution=11)


def test_nomatching_determinism():
    a = verify.verify_nomatching(seed=2, grid_resolution=21)
    b = verify.verify_nomatching(seed=2, grid_resolution=21)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_run_all_small():
    report = verify.run_all(
        trials=60, seed=9, e0_trials=40, noforcing_min=40, grid_resolution=21
    )
    assert report["pass"]
    assert set(report["suites"]) == {"lemma1", "fine", "e0", "noforcing", "nomatching"}


def test_coupling_threads_parallel_matches_sequential(monkeypatch):
    sequential = verify.verify_lemma1(50, seed=13)
    monkeypatch.setenv("COUPLING_THREADS", "3")
    parallel = verify.verify_lemma1(50, seed=13)
    assert json.dumps(sequential, sort_keys=True) == json.dumps(parallel, sort_keys=True)


def test_coupling_threads_validation(monkeypatch):
    monkeypatch.setenv("COUPLING_THREADS", "many")
    with pytest.raises(ValueError, match="COUPLING_THREADS"):
        verify.worker_count()
    monkeypatch.setenv("COUPLING_THREADS", "0")
    assert verify.worker_count() == 1


def test_parallel_grid_matches_sequential(monkeypatch):
    from epr_couplings import regions

    fixed = {"p11": Fraction(7, 16), "p12": Fraction(7, 16)}
    sequential = regions.membership_grid(fixed, 13)
    monkeypatch.setenv("COUPLING_THREADS", "2")
    parallel = regions.membership_grid(fixed, 13)
    assert (sequential.flags == parallel.flags).all()


def test_sampling_bounds():
    import random
    rng = random.Random(0)
    for _ in range(200):
        v = verify.random_probability(rng, 64)
        assert 0 <= v <= Fraction(1, 2)
        assert v.denominator <= 128
    p = verify.random_outcome_vector(rng)
    assert isinstance(p, OutcomeVector)

"""Acceptance gate: ten end-to-end criteria, each a named check with pinned
tolerances and (where stated) runtime budgets.

Every test prints one summary line so a full run reads as a scoreboard:

    ACCEPTANCE <check>: PASS (1.23s)

The checks themselves adjudicate with exact-dense propagation and direct
eigensolvers; these tests pin the claimed thresholds on top of the verdicts
so a silent relaxation inside a check would fail here.
"""
import numpy as np

from matschrod.checks import run_checks


def _run(name):
    result = run_checks([name])[0]
    status = "PASS" if result.passed else "FAIL"
    print(f"ACCEPTANCE {name}: {status} ({result.runtime_s:.2f}s)")
    return result


def test_01_laplacian_spectrum_exactness():
    result = _run("laplacian_spectrum")
    assert result.passed, result.detail
    assert result.detail["N"] == 200 and result.detail["k"] == 20
    assert result.detail["max_rel_error"] <= 1e-10
    assert result.runtime_s < 5.0


def test_02_harmonic_oscillator_benchmark():
    result = _run("harmonic_oscillator")
    assert result.passed, result.detail
    assert result.detail["N"] == 2000 and result.detail["L"] == 10.0
    assert result.detail["max_rel_error"] <= 5e-3
    np.testing.assert_allclose(
        result.detail["eigenvalues"], [1.0, 3.0, 5.0, 7.0, 9.0], rtol=5e-3
    )
    assert result.runtime_s < 60.0


def test_03_form_axioms():
    result = _run("form_axioms")
    assert result.passed, result.detail
    assert result.detail["trials"] == 10_000
    assert result.detail["failures"] == 0
    assert result.detail["worst_accretivity_margin"] >= -1e-10
    assert result.detail["worst_symmetry_gap"] <= 1e-12
    assert result.detail["worst_continuity_excess"] <= 1e-10


def test_04_projection_energy_contraction():
    result = _run("beurling_denny")
    assert result.passed, result.detail
    assert result.detail["trials"] == 1000
    assert result.detail["failures"] == 0
    assert result.detail["min_gap"] >= -1e-12
    assert result.detail["max_edge_excess"] <= 1e-12


def test_05_mixed_norm_contraction():
    result = _run("contraction")
    assert result.passed, result.detail
    assert result.detail["contraction_verdicts"] == ["pass"] * 4
    assert result.detail["max_ratio"] <= 1.0 + 1e-8
    assert result.detail["interpolation_ok"] is True
    assert result.detail["worst_interpolation_excess"] <= 1e-12


def test_06_positivity_dichotomy():
    result = _run("positivity_dichotomy")
    assert result.passed, result.detail
    assert result.detail["correct"] == 50 and result.detail["total"] == 50
    witnesses = [
        rec["witness"]
        for rec in result.detail["records"]
        if rec["kind"] == "positive-coupling-region"
    ]
    assert len(witnesses) == 25 and all(w is not None for w in witnesses)
    assert result.runtime_s < 300.0


def test_07_eigenvalue_sandwich():
    result = _run("eigenvalue_sandwich")
    assert result.passed, result.detail
    assert result.detail["sandwich_passed"] == [True] * 5
    assert result.detail["max_lower_violation"] <= 1e-8
    assert result.detail["max_upper_violation"] <= 1e-8
    assert result.detail["monotone_ok"] is True
    assert result.detail["worst_monotonicity_drop"] <= 1e-8


def test_08_counterexample_spectrum_merge():
    result = _run("counterexample_merge")
    assert result.passed, result.detail
    assert result.detail["m2_passed"] and result.detail["m3_passed"]
    assert not result.detail["control_passed"]
    assert result.detail["control_max_deviation"] > 1e-2  # fails by a margin, not luck


def test_09_antisymmetric_continuity_growth():
    result = _run("antisymmetric_continuity")
    assert result.passed, result.detail
    ratios = result.detail["ratios"]
    assert len(ratios) == 5 and all(a < b for a, b in zip(ratios, ratios[1:]))
    assert result.detail["tail_growth"] >= 1.3
    assert result.detail["worst_halving_disagreement"] <= 0.01
    assert result.runtime_s < 10.0


def test_10_semigroup_structure():
    result = _run("semigroup_structure")
    assert result.passed, result.detail
    assert result.detail["identity_exact"] is True
    assert result.detail["law_worst_rel"] <= 1e-9
    assert result.detail["adjoint_worst_rel"] <= 1e-9
    assert result.detail["krylov_vs_dense_worst_rel"] <= 1e-8
    assert result.detail["dimension"] <= 3000


def test_gallery_fingerprints_validate():
    # not one of the ten numbered criteria, but the gallery ships claims and
    # claims that do not validate must never ship
    result = _run("gallery_claims")
    assert result.passed, result.detail
    assert set(result.detail) == {
        "antisymmetric_continuity",
        "coupled_confining",
        "degenerate_counterexample",
        "harmonic_oscillator",
    }

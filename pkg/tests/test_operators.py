"""Sparse matrix assembly, eigensolvers, and the scalar sandwich bracket."""
import csv

import numpy as np
import pytest

import matschrod.operators as operators_module
from matschrod import (
    ConvergenceError,
    DiffusionField,
    PotentialField,
    VectorState,
    assemble_form,
    assemble_operator,
    build_grid,
    eigen_lowest,
    eval_form,
    pointwise_extremal_eigs,
    sample_fields,
    sandwich_check,
)


def _free_operator(N, L=1.0, d=1, m=1):
    grid = build_grid(d, L, N, m)
    dif, pot = sample_fields(lambda x: np.eye(d), lambda x: np.zeros((m, m)), grid)
    return grid, assemble_operator(assemble_form(dif, pot, grid))


def _random_operator(grid, rng, psd=True):
    mats = rng.standard_normal((grid.n_cells, grid.d, grid.d))
    dif = DiffusionField(grid, np.einsum("nka,nkb->nab", mats, mats) + 0.2 * np.eye(grid.d))
    vm = rng.standard_normal((grid.n_nodes, grid.m, grid.m))
    vs = np.einsum("nka,nkb->nab", vm, vm) / grid.m
    if not psd:
        vs = vs - 2.0 * np.eye(grid.m)
    pot = PotentialField(grid, vs)
    return assemble_operator(assemble_form(dif, pot, grid))


def _laplacian_eigs(grid):
    k = np.arange(1, grid.N + 1)
    return (4.0 / grid.h**2) * np.sin(k * np.pi / (2.0 * (grid.N + 1))) ** 2


# -- assembly ------------------------------------------------------------------


def test_form_matrix_is_exact_tridiagonal():
    # h = 0.25 is dyadic, so every entry of (1/h) tridiag(-1, 2, -1) is exact
    grid, op = _free_operator(N=7)
    expected = (
        np.diag(np.full(7, 8.0))
        + np.diag(np.full(6, -4.0), 1)
        + np.diag(np.full(6, -4.0), -1)
    )
    assert np.array_equal(op.matrix.toarray(), expected)


def test_stored_matrix_exactly_symmetric():
    rng = np.random.default_rng(21)
    grid = build_grid(2, 1.0, 5, 2)
    op = _random_operator(grid, rng)
    assert (op.matrix - op.matrix.T).nnz == 0


def test_matrix_agrees_with_form_evaluation():
    rng = np.random.default_rng(22)
    grid = build_grid(2, 1.3, 4, 2)
    mats = rng.standard_normal((grid.n_cells, 2, 2))
    dif = DiffusionField(grid, np.einsum("nka,nkb->nab", mats, mats) + 0.2 * np.eye(2))
    vm = rng.standard_normal((grid.n_nodes, 2, 2))
    pot = PotentialField(grid, np.einsum("nka,nkb->nab", vm, vm))
    a = assemble_form(dif, pot, grid)
    op = assemble_operator(a)
    for _ in range(10):
        f = VectorState.random(grid, rng)
        g = VectorState.random(grid, rng)
        quad = float(f.flat() @ (op.matrix @ g.flat()))
        assert quad == pytest.approx(eval_form(a, f, g), rel=1e-12, abs=1e-12)


def test_potential_block_placement():
    # constant V couples components at equal nodes with weight h^d V_ij
    grid = build_grid(1, 1.0, 3, 2)
    b = 0.7
    dif, pot = sample_fields(
        lambda x: 1.0, lambda x: np.array([[2.0, b], [b, 1.0]]), grid
    )
    s = assemble_operator(assemble_form(dif, pot, grid)).matrix.toarray()
    n = grid.n_nodes
    for alpha in range(n):
        assert s[n + alpha, alpha] == pytest.approx(grid.h * b, rel=1e-15)
        assert s[alpha, n + alpha] == s[n + alpha, alpha]
    assert s[0, n + 1] == 0.0  # no cross-node coupling from V


def test_assembly_rejects_asymmetric_potential_input():
    grid = build_grid(1, 1.0, 4, 2)
    anti = np.tile(np.array([[0.0, -1.0], [1.0, 0.0]]), (grid.n_nodes, 1, 1))
    dif, _ = sample_fields(lambda x: 1.0, lambda x: np.zeros((2, 2)), grid)
    a = assemble_form(dif, PotentialField(grid, anti), grid)
    with pytest.raises(ValueError, match="symmetric"):
        assemble_operator(a)


def test_generator_scaling_and_norm_bound():
    grid, op = _free_operator(N=15)
    b = op.generator()
    np.testing.assert_allclose(
        b.toarray(), op.matrix.toarray() / grid.cell_volume, rtol=1e-15
    )
    w, _ = op.dense_eig()
    assert op.generator_norm_bound() >= w[-1] - 1e-12
    assert op.dense_eig() is op.dense_eig()  # cached


# -- eigensolvers ----------------------------------------------------------------


def test_free_laplacian_spectrum_dense():
    grid, op = _free_operator(N=60)
    report = eigen_lowest(op, 20)
    assert report.method == "dense"
    np.testing.assert_allclose(report.eigenvalues, _laplacian_eigs(grid)[:20], rtol=1e-10)
    assert np.all(report.residuals <= 1e-10 * report.matrix_norm)


def test_free_laplacian_spectrum_lanczos():
    grid, op = _free_operator(N=150)
    report = eigen_lowest(op, 10, method="lanczos")
    assert report.method == "lanczos"
    assert report.iterations > 0
    np.testing.assert_allclose(report.eigenvalues, _laplacian_eigs(grid)[:10], rtol=1e-10)
    assert np.all(report.residuals <= 1e-10 * report.matrix_norm)


def test_lanczos_matches_dense_on_confining_potential():
    grid = build_grid(1, 10.0, 300, 1)
    dif, pot = sample_fields(lambda x: 1.0, lambda x: float(x @ x), grid)
    op = assemble_operator(assemble_form(dif, pot, grid))
    dense = eigen_lowest(op, 8, method="dense")
    lanc = eigen_lowest(op, 8, method="lanczos")
    np.testing.assert_allclose(lanc.eigenvalues, dense.eigenvalues, rtol=1e-9)
    assert np.all(lanc.residuals <= 1e-10 * lanc.matrix_norm)


def test_eigen_lowest_argument_errors():
    _, op = _free_operator(N=8)
    with pytest.raises(ValueError):
        eigen_lowest(op, 0)
    with pytest.raises(ValueError):
        eigen_lowest(op, 9)
    with pytest.raises(ValueError, match="unknown eigensolver"):
        eigen_lowest(op, 2, method="qr")


def test_auto_switches_to_lanczos_above_dense_limit(monkeypatch):
    monkeypatch.setattr(operators_module, "DENSE_LIMIT", 10)
    grid, op = _free_operator(N=40)
    report = eigen_lowest(op, 5)
    assert report.method == "lanczos"
    np.testing.assert_allclose(report.eigenvalues, _laplacian_eigs(grid)[:5], rtol=1e-10)
    with pytest.raises(ValueError, match="dense path"):
        eigen_lowest(op, 5, method="dense")
    with pytest.raises(ValueError, match="dense path"):
        op.dense_eig()


def test_lanczos_unreachable_tolerance_raises_with_partial():
    grid, op = _free_operator(N=50)
    with pytest.raises(ConvergenceError) as exc_info:
        eigen_lowest(op, 3, tol=1e-30, method="lanczos")
    partial = exc_info.value.partial
    assert partial is not None
    # the partial report is still numerically sound, only the tolerance was absurd
    np.testing.assert_allclose(partial.eigenvalues, _laplacian_eigs(grid)[:3], rtol=1e-9)


def test_spectrum_report_csv_roundtrip(tmp_path):
    _, op = _free_operator(N=20)
    report = eigen_lowest(op, 5)
    path = tmp_path / "spectrum.csv"
    report.to_csv(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["index", "eigenvalue", "residual"]
    values = np.array([float(r[1]) for r in rows[1:]])
    np.testing.assert_array_equal(values, report.eigenvalues)  # repr() is lossless


# -- pointwise extremal eigenvalues ------------------------------------------------


def test_pointwise_extremal_eigs_closed_form():
    rng = np.random.default_rng(23)
    grid = build_grid(1, 1.0, 12, 2)
    a = rng.uniform(-1, 1, grid.n_nodes)
    b = rng.uniform(-1, 1, grid.n_nodes)
    c = rng.uniform(-1, 1, grid.n_nodes)
    samples = np.empty((grid.n_nodes, 2, 2))
    samples[:, 0, 0] = a
    samples[:, 1, 1] = c
    samples[:, 0, 1] = samples[:, 1, 0] = b
    mu, nu = pointwise_extremal_eigs(PotentialField(grid, samples))
    mid = (a + c) / 2.0
    rad = np.sqrt(((a - c) / 2.0) ** 2 + b**2)
    np.testing.assert_allclose(mu, mid - rad, atol=1e-13)
    np.testing.assert_allclose(nu, mid + rad, atol=1e-13)


# -- sandwich bracket ----------------------------------------------------------------


def test_sandwich_degenerate_scalar_multiple():
    # V = c I: mu = nu = c, all three spectra are assembled identically
    grid = build_grid(1, 1.0, 30, 2)
    dif, pot = sample_fields(lambda x: 1.0, lambda x: 0.8 * np.eye(2), grid)
    report = sandwich_check(dif, pot, grid, k=6)
    assert report.passed
    np.testing.assert_allclose(report.lower, report.eigenvalues, rtol=1e-13)
    np.testing.assert_allclose(report.upper, report.eigenvalues, rtol=1e-13)


def test_sandwich_brackets_coupled_potential():
    grid = build_grid(1, 2.0, 40, 2)
    dif, pot = sample_fields(
        lambda x: 1.0,
        lambda x: np.array([[1.5 + x[0] ** 2, 0.4], [0.4, 1.0]]),
        grid,
    )
    report = sandwich_check(dif, pot, grid, k=8)
    assert report.passed
    lo_margin, hi_margin = report.margins()
    assert np.all(lo_margin >= -report.tol_rel * (1 + np.abs(report.eigenvalues)))
    assert np.all(hi_margin >= -report.tol_rel * (1 + np.abs(report.eigenvalues)))
    assert report.max_lower_violation <= report.tol_rel
    assert report.max_upper_violation <= report.tol_rel


def test_sandwich_rejects_indefinite_potential():
    grid = build_grid(1, 1.0, 10, 2)
    dif, pot = sample_fields(lambda x: 1.0, lambda x: -np.eye(2), grid)
    with pytest.raises(ValueError, match="PSD"):
        sandwich_check(dif, pot, grid, k=3)

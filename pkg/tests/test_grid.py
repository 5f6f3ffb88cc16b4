"""Lattice geometry, coefficient fields, states and mixed norms."""
import numpy as np
import pytest

from matschrod import (
    DiffusionField,
    EllipticityWarning,
    GridMismatchError,
    PotentialField,
    VectorState,
    axis_differences,
    build_grid,
    mixed_norm,
    sample_fields,
    smooth_bump,
    smooth_bump_profile,
    smooth_bump_slope,
)


# -- GridSpec ------------------------------------------------------------


def test_grid_geometry_counts():
    grid = build_grid(2, 1.0, 3, 2)
    assert grid.h == 0.5
    assert grid.shape == (3, 3)
    assert grid.n_nodes == 9
    assert grid.n_cells == 16
    assert grid.state_size == 18
    assert grid.cell_volume == 0.25
    np.testing.assert_allclose(grid.axis_nodes(), [-0.5, 0.0, 0.5], atol=1e-15)


def test_grid_validation():
    with pytest.raises(ValueError):
        build_grid(4, 1.0, 8, 1)
    with pytest.raises(ValueError):
        build_grid(1, -1.0, 8, 1)
    with pytest.raises(ValueError):
        build_grid(1, 1.0, 1, 1)
    with pytest.raises(ValueError):
        build_grid(1, 1.0, 8, 0)


def test_node_and_cell_coordinates():
    grid = build_grid(1, 1.0, 3, 1)
    np.testing.assert_allclose(grid.node_coords()[:, 0], [-0.5, 0.0, 0.5], atol=1e-15)
    np.testing.assert_allclose(grid.cell_coords()[:, 0], [-1.0, -0.5, 0.0, 0.5], atol=1e-15)
    # C order: last axis varies fastest
    g2 = build_grid(2, 1.0, 2, 1)
    coords = g2.node_coords()
    assert coords.shape == (4, 2)
    np.testing.assert_allclose(coords[0], [-1 + g2.h, -1 + g2.h])
    np.testing.assert_allclose(coords[1], [-1 + g2.h, -1 + 2 * g2.h])


def test_nearest_node():
    grid = build_grid(1, 1.0, 3, 1)
    assert grid.nearest_node([0.0]) == 1
    assert grid.nearest_node([0.9]) == 2
    assert grid.nearest_node([-5.0]) == 0  # clipped into the box
    with pytest.raises(ValueError):
        grid.nearest_node([0.0, 0.0])


# -- coefficient fields ----------------------------------------------------


def test_diffusion_field_bounds_and_diagonal_flag():
    grid = build_grid(2, 1.0, 3, 1)
    samples = np.zeros((grid.n_cells, 2, 2))
    samples[:, 0, 0] = 2.0
    samples[:, 1, 1] = 0.5
    field = DiffusionField(grid, samples)
    assert field.diagonal
    assert field.ellipticity_lower == pytest.approx(0.5)
    assert field.ellipticity_upper == pytest.approx(2.0)
    samples[:, 0, 1] = samples[:, 1, 0] = 0.25
    assert not DiffusionField(grid, samples).diagonal


def test_diffusion_field_rejects_asymmetry_and_warns_on_nonelliptic():
    grid = build_grid(2, 1.0, 3, 1)
    bad = np.tile(np.array([[1.0, 0.5], [-0.5, 1.0]]), (grid.n_cells, 1, 1))
    with pytest.raises(ValueError, match="not symmetric"):
        DiffusionField(grid, bad)
    negative = np.tile(-np.eye(2), (grid.n_cells, 1, 1))
    with pytest.warns(EllipticityWarning):
        field = DiffusionField(grid, negative)
    assert field.ellipticity_lower == pytest.approx(-1.0)


def test_potential_field_flags():
    grid = build_grid(1, 1.0, 4, 2)
    sym = np.tile(np.array([[1.0, -1.0], [-1.0, 1.0]]), (grid.n_nodes, 1, 1))
    field = PotentialField(grid, sym)
    assert field.symmetric_input
    assert field.psd
    assert field.offdiag_max == pytest.approx(-1.0)
    assert field.min_eigenvalue == pytest.approx(0.0, abs=1e-14)
    assert field.max_eigenvalue == pytest.approx(2.0)

    anti = np.tile(np.array([[0.0, -1.0], [1.0, 0.0]]), (grid.n_nodes, 1, 1))
    field = PotentialField(grid, anti)  # accepted, but flagged
    assert not field.symmetric_input
    np.testing.assert_allclose(field.samples, 0.0)  # symmetrized storage

    scalar = PotentialField(build_grid(1, 1.0, 4, 1), np.ones((4, 1, 1)))
    assert scalar.offdiag_max == 0.0


def test_potential_field_rejects_nonfinite():
    grid = build_grid(1, 1.0, 4, 1)
    samples = np.ones((4, 1, 1))
    samples[2] = np.inf
    with pytest.raises(ValueError, match="finite"):
        PotentialField(grid, samples)


def test_sample_fields_scalar_coercion_and_placement():
    grid = build_grid(1, 2.0, 5, 1)
    dif, pot = sample_fields(lambda x: 3.0, lambda x: float(x @ x), grid)
    assert dif.samples.shape == (grid.n_cells, 1, 1)
    assert pot.samples.shape == (grid.n_nodes, 1, 1)
    np.testing.assert_allclose(dif.samples, 3.0)
    np.testing.assert_allclose(pot.samples[:, 0, 0], grid.node_coords()[:, 0] ** 2)
    with pytest.raises(ValueError, match="matrix"):
        sample_fields(lambda x: np.ones(3), lambda x: 0.0, grid)


# -- states ---------------------------------------------------------------


def test_vector_state_layout_and_arithmetic():
    grid = build_grid(1, 1.0, 3, 2)
    f = VectorState(grid, [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    np.testing.assert_array_equal(f.flat(), [1, 2, 3, 4, 5, 6])  # component-major
    g = 2.0 * f - f
    np.testing.assert_allclose(g.values, f.values)
    np.testing.assert_allclose((-f).values, -f.values)
    np.testing.assert_allclose(f.component_norms(), np.sqrt([17.0, 29.0, 45.0]))
    with pytest.raises(ValueError):
        VectorState(grid, np.ones(5))
    with pytest.raises(ValueError):
        VectorState(grid, np.full((2, 3), np.nan))
    other = VectorState.zeros(build_grid(1, 1.0, 4, 2))
    with pytest.raises(GridMismatchError):
        f + other


def test_impulse_and_from_function():
    grid = build_grid(1, 1.0, 3, 2)
    imp = VectorState.impulse(grid)
    assert imp.values[0, 1] == 1.0 and imp.values.sum() == 1.0
    imp2 = VectorState.impulse(grid, node=2, vector=[0.0, 3.0])
    assert imp2.values[1, 2] == 3.0
    fn = VectorState.from_function(grid, lambda x: [x[0], -x[0]])
    np.testing.assert_allclose(fn.values[0], grid.node_coords()[:, 0])
    np.testing.assert_allclose(fn.values[1], -grid.node_coords()[:, 0])
    with pytest.raises(ValueError, match="components"):
        VectorState.from_function(grid, lambda x: [1.0, 2.0, 3.0])


# -- mixed norms -----------------------------------------------------------


def test_mixed_norm_single_node_values():
    grid = build_grid(1, 1.0, 3, 2)  # h = 0.5
    f = VectorState.impulse(grid, node=1, vector=[3.0, 4.0])
    assert mixed_norm(f, np.inf) == pytest.approx(5.0)
    assert mixed_norm(f, 2) == pytest.approx(5.0 * np.sqrt(0.5))
    assert mixed_norm(f, 1) == pytest.approx(5.0 * 0.5)
    assert mixed_norm(VectorState.zeros(grid), 4) == 0.0
    with pytest.raises(ValueError):
        mixed_norm(f, 0.5)


def test_mixed_norm_holder_monotonicity():
    rng = np.random.default_rng(7)
    for _ in range(50):
        d = int(rng.integers(1, 3))
        N = int(rng.integers(3, 9))
        grid = build_grid(d, float(rng.uniform(0.5, 2.0)), N, int(rng.integers(1, 4)))
        f = VectorState.random(grid, rng)
        vol = (grid.N * grid.h) ** grid.d
        n2 = mixed_norm(f, 2) / vol ** (1 / 2)
        n4 = mixed_norm(f, 4) / vol ** (1 / 4)
        ninf = mixed_norm(f, np.inf)
        assert n2 <= n4 * (1 + 1e-12)
        assert n4 <= ninf * (1 + 1e-12)


def test_mixed_norm_large_p_no_overflow():
    # naive sum(s**4) would be ~1e400; the max is factored out first
    grid = build_grid(1, 1.0, 3, 1)
    f = VectorState(grid, [[1e100, 2e100, 0.5e100]])
    assert np.isfinite(mixed_norm(f, 4))
    assert mixed_norm(f, np.inf) == 2e100


# -- bump profile -----------------------------------------------------------


def test_bump_profile_plateau_support_and_smooth_seams():
    r = np.array([0.0, 0.5, 1.0, 2.0, 3.0])
    np.testing.assert_allclose(smooth_bump_profile(r), [1, 1, 1, 0, 0], atol=1e-15)
    assert 0.0 < smooth_bump_profile(1.5) < 1.0
    assert smooth_bump_profile(-0.7) == 1.0  # even in r
    # derivative matches a central difference on the ramp
    for r0 in (1.2, 1.5, 1.9, -1.3):
        eps = 1e-6
        fd = (smooth_bump_profile(r0 + eps) - smooth_bump_profile(r0 - eps)) / (2 * eps)
        assert smooth_bump_slope(r0) == pytest.approx(float(fd), abs=1e-8)
    assert smooth_bump_slope(0.5) == 0.0
    assert smooth_bump_slope(2.5) == 0.0
    assert smooth_bump([0.3, 0.4]) == 1.0
    assert smooth_bump([3.0, 0.0]) == 0.0


# -- forward differences ----------------------------------------------------


def test_axis_differences_1d_hand_example():
    grid = build_grid(1, 1.0, 3, 1)
    f = VectorState(grid, [[1.0, 2.0, 4.0]])
    diffs = axis_differences(grid, f.values)
    # cells at -1, -0.5, 0, 0.5; implicit zeros outside
    np.testing.assert_allclose(diffs[0, 0], [1.0, 1.0, 2.0, -4.0])


def test_axis_differences_2d_shape_and_boundary():
    grid = build_grid(2, 1.0, 2, 3)
    f = VectorState.random(grid, np.random.default_rng(0))
    diffs = axis_differences(grid, f.values)
    assert diffs.shape == (2, 3, 9)
    # total squared jumps telescope: each axis sees every node value twice
    for axis in range(2):
        assert (diffs[axis] ** 2).sum() > 0

"""Energy form evaluation, graph norm, and the two structural inequalities."""
import numpy as np
import pytest

from matschrod import (
    DiffusionField,
    EllipticityError,
    EllipticityWarning,
    GuaranteeUnavailableError,
    PotentialField,
    VectorState,
    abs_field,
    assemble_form,
    beurling_denny_gap,
    build_grid,
    continuity_ratio,
    edge_jump_norms,
    eval_form,
    form_norm,
    mixed_norm,
    pos_form_cross,
    project_unit_ball,
    sample_fields,
    split_pos_neg,
)


def _free_form(grid):
    dif, pot = sample_fields(lambda x: np.eye(grid.d), lambda x: np.zeros((grid.m, grid.m)), grid)
    return assemble_form(dif, pot, grid)


def _random_spd_diffusion(grid, rng):
    mats = rng.standard_normal((grid.n_cells, grid.d, grid.d))
    samples = np.einsum("nka,nkb->nab", mats, mats) + 0.1 * np.eye(grid.d)
    return DiffusionField(grid, samples)


def _random_psd_potential(grid, rng):
    mats = rng.standard_normal((grid.n_nodes, grid.m, grid.m))
    return PotentialField(grid, np.einsum("nka,nkb->nab", mats, mats) / grid.m)


# -- evaluation oracles ------------------------------------------------------


def test_impulse_energy_free_laplacian():
    # unit impulse, Q = I, V = 0: two unit jumps, a(f,f) = 2/h independent of N
    for N in (3, 9, 33):
        grid = build_grid(1, 1.0, N, 1)
        a = _free_form(grid)
        f = VectorState.impulse(grid)
        assert eval_form(a, f, f) == pytest.approx(2.0 / grid.h, rel=1e-14)


def test_constant_potential_shift_identity():
    # V = c I adds exactly c ||f||_2^2 to the free energy
    rng = np.random.default_rng(3)
    grid = build_grid(2, 1.5, 5, 2)
    free = _free_form(grid)
    c = 0.7
    dif, pot = sample_fields(
        lambda x: np.eye(2), lambda x: c * np.eye(2), grid
    )
    shifted = assemble_form(dif, pot, grid)
    for _ in range(10):
        f = VectorState.random(grid, rng)
        expected = eval_form(free, f, f) + c * mixed_norm(f, 2) ** 2
        assert eval_form(shifted, f, f) == pytest.approx(expected, rel=1e-12)


def test_form_symmetry_and_bilinearity():
    rng = np.random.default_rng(4)
    grid = build_grid(2, 1.0, 4, 2)
    a = assemble_form(_random_spd_diffusion(grid, rng), _random_psd_potential(grid, rng), grid)
    for _ in range(10):
        f = VectorState.random(grid, rng)
        g = VectorState.random(grid, rng)
        h = VectorState.random(grid, rng)
        afg = eval_form(a, f, g)
        assert afg == pytest.approx(eval_form(a, g, f), rel=1e-12, abs=1e-12)
        assert eval_form(a, f + 2.0 * h, g) == pytest.approx(
            afg + 2.0 * eval_form(a, h, g), rel=1e-11, abs=1e-11
        )


def test_form_norm_single_node_hand_value():
    # one node carrying v, scalar potential w: h v^2 + 2 v^2 / h + h w v^2
    grid = build_grid(1, 1.0, 3, 1)  # h = 0.5
    v, w = 3.0, 2.0
    dif, pot = sample_fields(lambda x: 1.0, lambda x: w, grid)
    a = assemble_form(dif, pot, grid)
    f = VectorState.impulse(grid, vector=[v])
    expected = np.sqrt(0.5 * v**2 + 2 * v**2 / 0.5 + 0.5 * w * v**2)
    assert form_norm(a, f) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(np.sqrt(49.5))


def test_form_norm_rejects_indefinite_potential():
    grid = build_grid(1, 1.0, 4, 1)
    dif, pot = sample_fields(lambda x: 1.0, lambda x: -1.0, grid)
    a = assemble_form(dif, pot, grid)
    with pytest.raises(ValueError, match="PSD"):
        form_norm(a, VectorState.impulse(grid))


def test_assembly_rejects_nonelliptic_diffusion():
    grid = build_grid(1, 1.0, 4, 1)
    with pytest.warns(EllipticityWarning):
        dif = DiffusionField(grid, -np.ones((grid.n_cells, 1, 1)))
    pot = PotentialField(grid, np.zeros((grid.n_nodes, 1, 1)))
    with pytest.raises(EllipticityError):
        assemble_form(dif, pot, grid)


def test_grid_mismatch_rejected():
    from matschrod import GridMismatchError

    a = _free_form(build_grid(1, 1.0, 4, 1))
    other = build_grid(1, 1.0, 5, 1)
    with pytest.raises(GridMismatchError):
        eval_form(a, VectorState.zeros(other), VectorState.zeros(other))


# -- continuity --------------------------------------------------------------


def test_continuity_bound_random_sweep():
    rng = np.random.default_rng(11)
    for _ in range(20):
        d = int(rng.integers(1, 3))
        grid = build_grid(d, 1.0, int(rng.integers(3, 7)), int(rng.integers(1, 4)))
        a = assemble_form(
            _random_spd_diffusion(grid, rng), _random_psd_potential(grid, rng), grid
        )
        bound = 1.0 + a.ellipticity_upper + 1e-10
        for _ in range(20):
            f = VectorState.random(grid, rng)
            g = VectorState.random(grid, rng)
            assert continuity_ratio(a, f, g) <= bound


def test_continuity_ratio_zero_cases():
    grid = build_grid(1, 1.0, 4, 1)
    a = _free_form(grid)
    z = VectorState.zeros(grid)
    assert continuity_ratio(a, z, z) == 0.0
    assert continuity_ratio(a, z, VectorState.impulse(grid)) == 0.0


# -- projection and splitting -------------------------------------------------


def test_project_unit_ball_pointwise():
    grid = build_grid(1, 1.0, 3, 2)
    f = VectorState(grid, [[3.0, 0.3, 0.0], [4.0, 0.4, 0.0]])
    pf = project_unit_ball(f)
    np.testing.assert_allclose(pf.values[:, 0], [0.6, 0.8])  # scaled to norm 1
    np.testing.assert_allclose(pf.values[:, 1], [0.3, 0.4])  # inside: untouched
    np.testing.assert_allclose(pf.values[:, 2], [0.0, 0.0])
    assert abs_field(pf).max() <= 1.0 + 1e-15
    ppf = project_unit_ball(pf)
    np.testing.assert_array_equal(ppf.values, pf.values)  # idempotent


def test_project_unit_ball_is_lipschitz():
    rng = np.random.default_rng(5)
    grid = build_grid(1, 1.0, 20, 3)
    for _ in range(25):
        f = VectorState.random(grid, rng, scale=2.0)
        g = VectorState.random(grid, rng, scale=2.0)
        jump_before = abs_field(f - g)
        jump_after = abs_field(project_unit_ball(f) - project_unit_ball(g))
        assert np.all(jump_after <= jump_before + 1e-14)


def test_split_pos_neg_partition():
    rng = np.random.default_rng(6)
    grid = build_grid(2, 1.0, 4, 2)
    f = VectorState.random(grid, rng)
    fp, fm = split_pos_neg(f)
    assert np.all(fp.values >= 0) and np.all(fm.values >= 0)
    np.testing.assert_array_equal((fp - fm).values, f.values)
    np.testing.assert_array_equal(fp.values * fm.values, 0.0)


def test_abs_field_reverse_triangle_per_edge():
    rng = np.random.default_rng(7)
    grid = build_grid(2, 1.0, 5, 3)
    for _ in range(10):
        f = VectorState.random(grid, rng)
        jumps_of_abs = edge_jump_norms(grid, abs_field(f))
        jumps_of_f = edge_jump_norms(grid, f.values)
        assert np.all(jumps_of_abs <= jumps_of_f + 1e-14)


def test_edge_jump_norms_hand_example():
    grid = build_grid(1, 1.0, 3, 1)
    jumps = edge_jump_norms(grid, np.array([1.0, 2.0, 4.0]))
    assert jumps.shape == (1, 4)
    np.testing.assert_allclose(jumps[0], [1.0, 1.0, 2.0, 4.0])


# -- Beurling-Deny gap ---------------------------------------------------------


def test_projection_gap_constant_modulus_oracle():
    # |f| = 2 everywhere: Pf = f/2, so a(Pf,Pf) = a(f,f)/4 and the gap is 3/4 a(f,f)
    grid = build_grid(1, 1.0, 30, 2)
    a = _free_form(grid)
    f = VectorState.from_function(grid, lambda x: [2 * np.cos(x[0]), 2 * np.sin(x[0])])
    gap = beurling_denny_gap(a, f)
    assert gap == pytest.approx(0.75 * eval_form(a, f, f), rel=1e-12)


def test_projection_gap_nonnegative_random():
    rng = np.random.default_rng(8)
    for _ in range(30):
        d = int(rng.integers(1, 3))
        grid = build_grid(d, 1.0, int(rng.integers(3, 7)), int(rng.integers(1, 4)))
        diag = np.zeros((grid.n_cells, d, d))
        for i in range(d):
            diag[:, i, i] = rng.uniform(0.2, 3.0, grid.n_cells)
        a = assemble_form(
            DiffusionField(grid, diag), _random_psd_potential(grid, rng), grid
        )
        f = VectorState.random(grid, rng, scale=2.0)
        gap = beurling_denny_gap(a, f)
        assert gap >= -1e-12 * (1.0 + abs(eval_form(a, f, f)))


def test_projection_gap_gates():
    rng = np.random.default_rng(9)
    grid = build_grid(2, 1.0, 4, 2)
    full_q = assemble_form(
        _random_spd_diffusion(grid, rng), _random_psd_potential(grid, rng), grid
    )
    f = VectorState.random(grid, rng)
    with pytest.raises(GuaranteeUnavailableError):
        beurling_denny_gap(full_q, f)
    assert isinstance(beurling_denny_gap(full_q, f, allow_nondiagonal=True), float)

    dif, pot = sample_fields(lambda x: np.eye(2), lambda x: -np.eye(2), grid)
    indefinite = assemble_form(dif, pot, grid)
    with pytest.raises(ValueError, match="PSD"):
        beurling_denny_gap(indefinite, f)


# -- positive-part cross energy ------------------------------------------------


def test_pos_cross_energy_exact_coupling_oracle():
    # f = phi (e1 - e2), V = ((1,-1),(-1,1)): splitting puts phi into disjoint
    # components, the diffusion cross term vanishes and only V couples them:
    # a(f+, f-) = -h sum phi^2
    grid = build_grid(1, 2.0, 17, 2)
    dif, pot = sample_fields(
        lambda x: 1.0, lambda x: np.array([[1.0, -1.0], [-1.0, 1.0]]), grid
    )
    a = assemble_form(dif, pot, grid)
    phi = np.maximum(1.0 - np.abs(grid.axis_nodes()), 0.0)
    f = VectorState(grid, np.stack([phi, -phi]))
    expected = -grid.h * float((phi**2).sum())
    assert pos_form_cross(a, f) == pytest.approx(expected, rel=1e-13)
    assert expected < 0


def test_pos_cross_energy_gates():
    grid = build_grid(1, 1.0, 4, 2)
    anti = np.tile(np.array([[0.0, -1.0], [1.0, 0.0]]), (grid.n_nodes, 1, 1))
    dif, _ = sample_fields(lambda x: 1.0, lambda x: np.zeros((2, 2)), grid)
    a = assemble_form(dif, PotentialField(grid, anti), grid)
    with pytest.raises(ValueError, match="symmetric"):
        pos_form_cross(a, VectorState.random(grid, np.random.default_rng(0)))

    rng = np.random.default_rng(10)
    grid2 = build_grid(2, 1.0, 3, 2)
    full_q = assemble_form(
        _random_spd_diffusion(grid2, rng), _random_psd_potential(grid2, rng), grid2
    )
    with pytest.raises(GuaranteeUnavailableError):
        pos_form_cross(full_q, VectorState.random(grid2, rng))


def test_pos_cross_energy_sign_random():
    # diagonal Q, nonpositive off-diagonal V: cross energy never positive
    rng = np.random.default_rng(12)
    for _ in range(25):
        grid = build_grid(1, 1.0, int(rng.integers(4, 12)), int(rng.integers(2, 4)))
        m = grid.m
        samples = np.zeros((grid.n_nodes, m, m))
        idx = np.arange(m)
        samples[:, idx, idx] = rng.uniform(0.0, 2.0, (grid.n_nodes, m))
        off = -rng.uniform(0.0, 1.0, (grid.n_nodes, m, m))
        off[:, idx, idx] = 0.0
        samples += 0.5 * (off + off.transpose(0, 2, 1))
        dif, _ = sample_fields(lambda x: 1.0, lambda x: np.zeros((m, m)), grid)
        a = assemble_form(dif, PotentialField(grid, samples), grid)
        f = VectorState.random(grid, rng)
        assert pos_form_cross(a, f) <= 1e-12

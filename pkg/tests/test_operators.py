import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trimodal import operators as op
from trimodal.dispersion import Params
from trimodal.errors import DomainCollapse, GridMismatch
from trimodal.grid import Grid

GRID = Grid(24, 24)


def _random_field(grid, scale, seed):
    rng = np.random.default_rng(seed)
    decay = 1.0 / (1.0 + np.arange(grid.n_modes)) ** 2
    w = op.WaveField(scale * decay * rng.standard_normal(grid.n_modes),
                     scale * decay[:, None] * rng.standard_normal(grid.shape))
    w.phi[:, 0] = 0.0
    w.phi[:, -1] = 0.0
    return w


@pytest.fixture(scope="module")
def p6(spec_6_10_15):
    return spec_6_10_15.params


@settings(max_examples=25, deadline=None)
@given(mu=st.floats(0.05, 2.0), alpha=st.floats(-70.0, -0.5), lam=st.floats(0.2, 2.9),
       xi=st.floats(0.1, 3.0))
def test_laminar_flow_is_a_zero(mu, alpha, lam, xi):
    p = Params(mu, alpha, lam, xi)
    r = op.eval_F(op.WaveField.zeros(GRID), p, GRID)
    assert r.max_abs() < 1e-10 * max(1.0, mu**2 * abs(alpha))


def test_exact_derivative_matches_differences(p6):
    w = _random_field(GRID, 1e-3, 0)
    d = _random_field(GRID, 1.0, 1)
    exact = op.eval_DwF(w, d, p6, GRID)
    h = 1e-6
    central = (op.eval_F(w + h * d, p6, GRID) - op.eval_F(w - h * d, p6, GRID)) * (0.5 / h)
    assert (exact - central).max_abs() < 1e-7 * exact.max_abs()
    fd = op.eval_DwF(w, d, p6, GRID, method="fd")
    assert (exact - fd).max_abs() < 1e-4 * exact.max_abs()


def test_closed_form_linearisation_at_zero(p6):
    d = _random_field(GRID, 1.0, 2)
    z = op.WaveField.zeros(GRID)
    closed = op.eval_DwF0(d, p6, GRID)
    st_ = op._State(z.eta, z.phi, p6.mu, p6.alpha, p6.lam, p6.xi, GRID)
    d1, d2 = op._linearised(st_, d.eta[None], d.phi[None], GRID)
    chain = op._to_field(d1[0], d2[0], GRID)
    assert (closed - chain).max_abs() < 1e-10 * closed.max_abs()


def test_L_is_linearisation_after_lift(p6):
    rng = np.random.default_rng(3)
    phi = rng.standard_normal(GRID.shape) / (1.0 + np.arange(GRID.n_modes))[:, None] ** 2
    phi[:, 0] = 0.0
    lhs = op.eval_DwF0(op.apply_T(phi, p6, GRID), p6, GRID)
    rhs = op.apply_L(phi, p6, GRID)
    assert np.abs(lhs.eta - rhs.eta).max() < 1e-9 * np.abs(rhs.eta).max()
    inner = slice(1, -1)
    diff = lhs.phi[:, inner] - rhs.phi[:, inner]
    assert np.abs(diff).max() < 1e-9 * np.abs(rhs.phi).max()


def test_lift_and_inverse(p6):
    rng = np.random.default_rng(4)
    phi = rng.standard_normal(GRID.shape)
    phi[:, 0] = 0.0
    w = op.apply_T(phi, p6, GRID)
    assert np.abs(w.phi[:, -1]).max() < 1e-13
    np.testing.assert_allclose(op.lift_inverse(w, p6, GRID), phi, atol=1e-12)
    np.testing.assert_allclose(op.eta_of(phi, p6), w.eta)
    r = op.apply_R(op.WaveField(w.eta, phi), p6, GRID)
    np.testing.assert_allclose(r.phi, w.phi, atol=1e-12)


@pytest.mark.parametrize("k", [6, 10, 15])
def test_kernel_candidates(spec_6_10_15, k):
    p = spec_6_10_15.params
    g = Grid(20, 48)
    absolute, relative = op.kernel_residual(p, k, g)
    assert relative < 1e-8
    kf = op.kernel_function(p, k, g)
    phi = np.zeros(g.shape)
    phi[k] = kf.values
    r = op.eval_DwF0(op.apply_T(phi, p, g), p, g)
    assert r.max_abs() < 1e-8 * np.abs(kf.values).max() * max(1.0, p.t)


def test_non_kernel_mode_is_not_annihilated(p6):
    _, rel = op.kernel_residual(p6, 7, Grid(20, 32))
    assert rel > 1e-3


def test_nonlinear_part_vanishes_linearly(p6):
    g = Grid(24, 32)
    kf = op.kernel_function(p6, 6, g)
    phi = np.zeros(g.shape)
    phi[6] = kf.values
    w = op.apply_T(phi, p6, g)
    ratios = [op.eval_F(w * tau, p6, g).max_abs() / tau for tau in (1e-3, 5e-4, 2.5e-4)]
    # F(tau w)/tau = O(tau): halving tau halves the quotient
    assert ratios[0] / ratios[1] == pytest.approx(2.0, rel=0.05)
    assert ratios[1] / ratios[2] == pytest.approx(2.0, rel=0.05)


def test_amplitudes_of_lifts(spec_6_10_15):
    p, g = spec_6_10_15.params, Grid(20, 24)
    basis = op.kernel_basis(p, spec_6_10_15.wavenumbers, g)
    for j, kf in enumerate(basis):
        phi = np.zeros(g.shape)
        phi[kf.k] = kf.values
        amps = op.amplitudes(op.apply_T(phi, p, g), basis, p, g)
        np.testing.assert_allclose(amps, np.eye(3)[j], atol=1e-13)
    coeffs, rem = op.project_Z(basis[0].tilde(g) * 2.0, basis, g)
    np.testing.assert_allclose(coeffs, [2.0, 0.0, 0.0], atol=1e-13)
    assert rem.max_abs() < 1e-12
    with pytest.raises(ValueError):
        op.project_Z(rem, [], g)
    with pytest.raises(GridMismatch):
        op.kernel_basis(p, (6, 10, 15), Grid(12, 24))


@given(st.integers(0, 10_000))
@settings(max_examples=20)
def test_inner_product_is_symmetric_and_positive(seed):
    a = _random_field(GRID, 1.0, seed)
    b = _random_field(GRID, 1.0, seed + 1)
    assert op.inner_product_Y(a, b, GRID) == pytest.approx(op.inner_product_Y(b, a, GRID))
    assert op.norm_Y(a, GRID) > 0


def test_inner_product_matches_quadrature():
    g = Grid(4, 32)
    w = op.WaveField.zeros(g)
    w.eta[1] = 1.0
    w.phi[1] = g.s * (1 - g.s)
    # pi * (1 + int_0^1 s^2 (1-s)^2 ds)
    assert op.inner_product_Y(w, w, g) == pytest.approx(np.pi * (1 + 1 / 30), rel=1e-13)


def test_shape_checks(p6):
    with pytest.raises(GridMismatch):
        op.eval_F(op.WaveField.zeros(Grid(8, 16)), p6, GRID)
    with pytest.raises(GridMismatch):
        op.inner_product_Y(op.WaveField.zeros(GRID), op.WaveField.zeros(Grid(8, 16)), GRID)


def test_domain_collapse(p6):
    w = op.WaveField.zeros(GRID)
    w.eta[0] = -1.5
    with pytest.raises(DomainCollapse):
        op.eval_F(w, p6, GRID)


def test_parameter_derivatives_vanish_at_laminar(p6):
    for col in op.dF_dparams(op.WaveField.zeros(GRID), p6, GRID):
        assert col.max_abs() < 1e-6


def test_constant_elevation_closed_form(p6):
    g = Grid(8, 32)
    eps = 0.03
    w = op.WaveField.zeros(g)
    w.eta[0] = eps
    r = op.eval_F(w, p6, g)
    ps1 = op.laminar.psi0_s(p6, 1.0)
    Q = op.laminar.laminar_constants(p6).Q
    assert r.eta[0] == pytest.approx(ps1**2 / (2 * (1 + eps) ** 2) + eps - Q, rel=1e-12)
    assert np.abs(r.eta[1:]).max() < 1e-14
    pss = op.laminar.psi0_ss(p6, g.s)
    expected = pss * (1 / (1 + eps) ** 2 - 1)
    np.testing.assert_allclose(r.phi[0, 1:-1], expected[1:-1], rtol=1e-10, atol=1e-12)


def test_L_surface_part_is_scaled_kernel_residual(p6):
    from trimodal.dispersion import kernel_condition_residual, profile, theta
    g = Grid(12, 48)
    for k in (2, 7, 11):
        phi = np.zeros(g.shape)
        phi[k] = profile(theta(p6, k), g.s)
        r = op.apply_L(phi, p6, g)
        ps1 = op.laminar.psi0_s(p6, 1.0)
        expected = ps1 * phi[k, -1] * kernel_condition_residual(p6, k)
        assert r.eta[k] == pytest.approx(expected, rel=1e-8)
        assert np.abs(r.phi[k]).max() < 1e-8 * np.abs(phi[k]).max() * p6.t


def test_kernel_norms_and_orthogonality(spec_6_10_15):
    p, g = spec_6_10_15.params, Grid(20, 64)
    basis = op.kernel_basis(p, spec_6_10_15.wavenumbers, g)
    tildes = [kf.tilde(g) for kf in basis]
    for i in range(3):
        for j in range(i + 1, 3):
            assert op.inner_product_Y(tildes[i], tildes[j], g) == 0.0
    for kf, t in zip(basis, tildes):
        th = kf.theta.theta
        if kf.theta.regime.sign > 0:
            integral = (np.sinh(2 * th) / (4 * th) - 0.5) / th**2
        else:
            integral = (0.5 - np.sin(2 * th) / (4 * th)) / th**2
        closed = np.pi * (integral + kf.eta_part**2)
        assert op.inner_product_Y(t, t, g) == pytest.approx(closed, rel=1e-12)


def test_projection_idempotent(spec_6_10_15):
    p, g = spec_6_10_15.params, Grid(20, 24)
    basis = op.kernel_basis(p, spec_6_10_15.wavenumbers, g)
    w = _random_field(g, 1.0, 9)
    w.phi[:, -1] = np.random.default_rng(10).standard_normal(g.n_modes)
    _, rem = op.project_Z(w, basis, g)
    again, _ = op.project_Z(rem, basis, g)
    np.testing.assert_allclose(again, 0.0, atol=1e-12)
    for kf in basis:
        assert abs(op.inner_product_Y(rem, kf.tilde(g), g)) < 1e-10


def test_linearisation_consistency_order(p6):
    d = _random_field(GRID, 1.0, 11)
    lin = op.eval_DwF(op.WaveField.zeros(GRID), d, p6, GRID)
    errs = []
    for h in (1e-4, 5e-5, 2.5e-5):
        quotient = op.eval_F(d * h, p6, GRID) * (1 / h)
        errs.append((quotient - lin).max_abs())
    assert errs[0] / errs[1] > 1.8 and errs[1] / errs[2] > 1.8


def test_zero_direction(p6):
    w = _random_field(GRID, 1e-3, 12)
    assert op.eval_DwF(w, op.WaveField.zeros(GRID), p6, GRID).max_abs() == 0.0
    assert op.apply_L(np.zeros(GRID.shape), p6, GRID).max_abs() == 0.0

import numpy as np
import pytest

from dampnls.equations import (
    DecompState,
    ModifiedState,
    PhysParams,
    absorbing_radius,
    linear_symbol,
    modified_phase_rate,
    rhs_decomposition,
    rhs_full,
    rhs_modified,
    rhs_z,
    steady_state_g,
    w_forcing_expanded,
    wick_lambda,
    wick_lambda_convolution,
)
from dampnls.spectral import TWO_PI, SpectralField, inner, l2_norm, l2_norm_sq, project, random_field


def rand(M, seed, kmax=None, norm=None):
    return random_field(M, np.random.default_rng(seed), kmax=kmax, norm=norm)


def params(M=32, gamma=0.4, seed=0, sign=1):
    return PhysParams(gamma, rand(M, 100 + seed, kmax=4, norm=0.5), sign)


def test_params_validation():
    f = SpectralField.zeros(16)
    with pytest.raises(ValueError, match="gamma"):
        PhysParams(0.0, f)
    with pytest.raises(ValueError):
        PhysParams(0.5, f, nonlin_sign=2)
    bad = np.zeros(16, complex)
    bad[3] = np.inf
    with pytest.raises(ValueError):
        PhysParams(0.5, SpectralField(bad))


def test_rhs_full_single_mode():
    # u = A e^{ikx}: |u|^2 u = |A|^2 u, so the rhs is (i k^2 - gamma - i |A|^2) A + f_k
    A, k, gamma = 0.8 - 0.3j, 3, 0.5
    u = SpectralField.from_modes(32, {k: A})
    f = SpectralField.from_modes(32, {k: 0.1, 0: 0.2})
    out = rhs_full(u, PhysParams(gamma, f))
    assert out.mode(k) == pytest.approx((1j * k * k - gamma - 1j * abs(A) ** 2) * A + 0.1, abs=1e-14)
    assert out.mode(0) == pytest.approx(0.2, abs=1e-14)


def test_rhs_full_sign_zero_is_linear():
    p = params(sign=0)
    u = rand(32, 3, kmax=8)
    np.testing.assert_allclose(rhs_full(u, p).coeffs,
                               linear_symbol(32, p.gamma) * u.coeffs + p.forcing.coeffs, atol=1e-15)


def test_wick_single_mode():
    # ||u||^2 / pi = 2 |A|^2, so the Wick term is -|A|^2 u
    u = SpectralField.from_modes(32, {2: 0.6j})
    np.testing.assert_allclose(wick_lambda(u).coeffs, (-0.36 * u).coeffs, atol=1e-15)


@pytest.mark.parametrize("seed", [0, 1])
def test_wick_matches_fourier_form(seed):
    u = rand(16, seed, kmax=7)
    np.testing.assert_allclose(wick_lambda(u).coeffs, wick_lambda_convolution(u).coeffs, atol=1e-13)


def test_modified_gap_derivative():
    # d/dt (a - ||v||^2) = -2 gamma (a - ||v||^2); the extra phase term is skew
    p = params()
    v = rand(32, 5, kmax=6)
    s = ModifiedState(v, l2_norm_sq(v) + TWO_PI)
    dv, da = rhs_modified(s, p)
    dgap = da - 2 * inner(dv, v).real
    assert dgap == pytest.approx(-2 * p.gamma * TWO_PI, rel=1e-12)
    assert modified_phase_rate(v, s.a) == pytest.approx(2.0)


def test_modified_state_rejects_negative_a():
    with pytest.raises(ValueError):
        ModifiedState(SpectralField.zeros(8), -1.0)


def test_decomposition_telescopes():
    p = params()
    u = rand(32, 6, kmax=10)
    s = DecompState.split(u, 4)
    dv, dw = rhs_decomposition(s, p)
    np.testing.assert_allclose((dv + dw).coeffs, rhs_full(u, p).coeffs, atol=1e-13)


def test_w_forcing_expanded_matches_difference():
    p = params()
    u = rand(32, 7, kmax=10)
    N = 4
    w = project(rand(32, 8, kmax=10), N, "high")
    s = DecompState(u - w, w, N)
    _, dw = rhs_decomposition(s, p)
    lin = linear_symbol(32, p.gamma) * w.coeffs
    np.testing.assert_allclose(dw.coeffs - lin, w_forcing_expanded(u, w, N).coeffs, atol=1e-13)


def test_rhs_z_equals_high_part_of_v_minus_g():
    p = params()
    N = 4
    v = rand(32, 9, kmax=10)
    s = DecompState(v, SpectralField.zeros(32), N)
    dv, _ = rhs_decomposition(s, p)
    g = steady_state_g(p.forcing, p.gamma)
    z = project(v, N, "high") - project(g, N, "high")
    np.testing.assert_allclose(rhs_z(z, v, N, p).coeffs, project(dv, N, "high").coeffs, atol=1e-13)
    with pytest.raises(ValueError):
        rhs_z(v, v, N, p)


def test_split_initial_data():
    f = SpectralField.from_modes(32, {0: 1.0, 6: 0.5})
    u0 = rand(32, 10)
    s = DecompState.split(u0, 4, f, 0.5)
    assert l2_norm(s.w) == l2_norm(project(u0, 4, "high"))
    assert s.z.mode(6) == pytest.approx(-0.5 / (0.5 - 36j))
    assert s.z.mode(0) == 0


def test_steady_state_and_radius():
    p = params()
    g = steady_state_g(p.forcing, p.gamma)
    np.testing.assert_allclose(linear_symbol(32, p.gamma) * g.coeffs + p.forcing.coeffs, 0, atol=1e-15)
    assert absorbing_radius(p) == pytest.approx(2 * 0.5 / p.gamma)
    with pytest.raises(ValueError):
        steady_state_g(p.forcing, 0.0)

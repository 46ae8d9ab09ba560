import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.signal.windows import tukey

from dampnls.bourgain import (
    SpaceTimeField,
    _triple_table,
    damping_scaling,
    interaction_spectrum,
    l4_ensemble,
    l4_norm,
    l4_ratio,
    modulus_bound,
    random_interaction_spectrum,
    resonance_factor,
    resonance_sweep,
    spacetime_l2,
    trilinear_norm,
    xbs_norm,
)
from dampnls.spectral import TWO_PI, japanese_bracket, wavenumbers


def rand_field(seed, L=16, M=16, window=1.0):
    rng = np.random.default_rng(seed)
    return SpaceTimeField(rng.standard_normal((L, M)) + 1j * rng.standard_normal((L, M)), window)


def test_resonance_examples():
    lhs, rhs = resonance_factor(1, 2, 3, (0, 0, 0))
    assert lhs == rhs == 40
    assert resonance_factor(5, -7, -5, (1.5, -2, 0.25)) == (0, 0)
    lhs, rhs = resonance_factor(2, 3, 4, (Fraction(1, 3), Fraction(1, 7), Fraction(-2, 5)))
    assert lhs == rhs == 2 * 6 * 7
    with pytest.raises(ValueError):
        resonance_factor(1, 2, 3, (1.0, 0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        resonance_factor(1.5, 2, 3, (0, 0, 0))
    assert modulus_bound(1, 2, 3) == 40


def test_resonance_random_triples():
    assert resonance_sweep(1000, 3) == []


def test_spacetime_field_validation():
    with pytest.raises(ValueError):
        SpaceTimeField(np.zeros((3, 4)), 1.0)
    with pytest.raises(ValueError):
        SpaceTimeField(np.zeros(4), 1.0)
    with pytest.raises(ValueError):
        SpaceTimeField(np.zeros((4, 4)), 0.0)
    bad = np.zeros((4, 4), complex)
    bad[1, 1] = np.nan
    with pytest.raises(ValueError):
        SpaceTimeField(bad, 1.0)
    with pytest.raises(ValueError):
        SpaceTimeField.from_samples(np.zeros((4, 4)), 1.0, taper=1.5)


def test_xbs_zero_weights_is_spacetime_l2():
    F = rand_field(0)
    assert xbs_norm(F, 0, 0) == pytest.approx(spacetime_l2(F), rel=1e-12)


def test_xbs_monotone_and_norm_axioms():
    F, G = rand_field(1), rand_field(2)
    assert xbs_norm(F, 0.5, 0) >= xbs_norm(F, 0.25, 0) >= xbs_norm(F, 0, 0)
    assert xbs_norm(F, 0, 1) >= xbs_norm(F, 0, 0.5)
    for b, s in [(0.5, 0), (-0.4, 1), (3 / 8, 0)]:
        assert xbs_norm(F * (2 - 1j), b, s) == pytest.approx(abs(2 - 1j) * xbs_norm(F, b, s), rel=1e-12)
        assert xbs_norm(F + G, b, s) <= xbs_norm(F, b, s) + xbs_norm(G, b, s)
    zero = SpaceTimeField(np.zeros((8, 8)), 1.0)
    assert xbs_norm(zero, 0.5, 1) == 0.0


def test_free_evolution_sits_at_zero_modulation():
    rng = np.random.default_rng(3)
    phi = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    F = SpaceTimeField.free_evolution(phi, 32, 2.0)
    W = interaction_spectrum(F)
    np.testing.assert_allclose(W[16], phi, atol=1e-13)
    assert np.max(np.abs(np.delete(W, 16, axis=0))) < 1e-13
    k = wavenumbers(16)
    for b in (0.5, 0.9):
        s = 1.0
        expect = math.sqrt(2.0 * TWO_PI * np.sum(japanese_bracket(k) ** (2 * s) * np.abs(phi) ** 2))
        assert xbs_norm(F, b, s) == pytest.approx(expect, rel=1e-12)


def test_tapered_free_evolution_matches_scalar_leakage():
    rng = np.random.default_rng(4)
    phi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    L, T, b = 64, 3.0, 0.5
    F = SpaceTimeField.free_evolution(phi, L, T, taper=0.25)
    w = np.fft.fftshift(np.fft.fft(tukey(L, 0.25, sym=False))) / L
    sig = (TWO_PI / T) * np.arange(-L // 2, L // 2)
    leak = math.sqrt(np.sum(japanese_bracket(sig) ** (2 * b) * np.abs(w) ** 2))
    base = math.sqrt(T * TWO_PI * np.sum(np.abs(phi) ** 2))
    assert xbs_norm(F, b, 0) / base == pytest.approx(leak, rel=1e-12)
    assert leak > 1.0


def test_l4_constant_field():
    T = 2.0
    c = 0.7 - 0.1j
    v = np.zeros((16, 8), complex)
    v[:, 4] = c
    F = SpaceTimeField(v, T)
    assert l4_norm(F) == pytest.approx((T * TWO_PI) ** 0.25 * abs(c), rel=1e-12)
    assert l4_ratio(F) == pytest.approx((TWO_PI * T) ** -0.25, rel=1e-12)


def test_l4_norm_matches_fine_quadrature():
    F = rand_field(5, L=8, M=8)
    x = np.arange(256) * TWO_PI / 256
    k = wavenumbers(8)
    u = F.values @ np.exp(1j * np.outer(k, x))
    quad = F.dt * (TWO_PI / 256) * np.sum(np.abs(u) ** 4)
    assert l4_norm(F) == pytest.approx(quad ** 0.25, rel=1e-12)


def test_l4_ratio_invariances():
    F = rand_field(6)
    r = l4_ratio(F)
    assert l4_ratio(F * 3.5j) == pytest.approx(r, rel=1e-12)
    shift = np.exp(-1j * wavenumbers(16) * 0.37)
    assert l4_ratio(SpaceTimeField(F.values * shift, F.window)) == pytest.approx(r, rel=1e-12)
    with pytest.raises(ValueError):
        l4_ratio(SpaceTimeField(np.zeros((4, 4)), 1.0))


def test_l4_ensemble_stable_under_refinement():
    a = l4_ensemble(32, 32, 40, 0)
    b = l4_ensemble(64, 64, 40, 0)
    assert abs(b.max_ratio - a.max_ratio) / a.max_ratio < 0.2


def test_interaction_spectrum_roundtrip():
    rng = np.random.default_rng(7)
    W = rng.standard_normal((16, 8)) + 1j * rng.standard_normal((16, 8))
    F = SpaceTimeField.from_interaction_spectrum(W, 1.5)
    np.testing.assert_allclose(interaction_spectrum(F), W, atol=1e-12)


def lab_frame_trilinear(Ws, M, N, b, L=4096):
    """Brute force: sample u_i in the lab frame, multiply triple by triple, transform back."""
    k = wavenumbers(M)
    t = np.arange(L) * (TWO_PI / L)
    sig = np.arange(-Ws[0].shape[0] // 2, Ws[0].shape[0] // 2)
    u = [np.exp(1j * np.outer(t, k * k)) * (np.exp(1j * np.outer(t, sig)) @ W) for W in Ws]
    out = {}
    for i1 in np.flatnonzero(np.abs(k) <= N // 2):
        for i2 in np.flatnonzero(np.abs(k) <= N // 2):
            for i3 in np.flatnonzero((np.abs(k) > N) & (np.abs(k) < M // 2)):
                kk = k[i1] + k[i2] - k[i3]
                out[kk] = out.get(kk, 0) + u[0][:, i1] * u[1][:, i2] * np.conj(u[2][:, i3])
    s_axis = np.fft.fftfreq(L, 1.0 / L)
    total = 0.0
    for kk, P in out.items():
        What = np.fft.fft(np.exp(-1j * kk * kk * t) * P) / L
        total += np.sum(japanese_bracket(s_axis) ** (2 * b) * np.abs(What) ** 2)
    return math.sqrt(TWO_PI * TWO_PI * total)


def test_trilinear_matches_lab_frame():
    M, N, Lt, b = 16, 4, 12, -0.5 + 1 / 16
    rng = np.random.default_rng(8)
    k = wavenumbers(M)
    supports = [np.abs(k) <= N // 2] * 2 + [(np.abs(k) > N) & (np.abs(k) < M // 2)]
    Ws = [random_interaction_spectrum(rng, M, 4, TWO_PI, s) for s in supports]
    fast = trilinear_norm(*Ws, _triple_table(M, N), b, Lt)
    assert fast == pytest.approx(lab_frame_trilinear(Ws, M, N, b), rel=1e-10)


def test_trilinear_edge_cases():
    M, N = 16, 4
    rng = np.random.default_rng(9)
    k = wavenumbers(M)
    W = random_interaction_spectrum(rng, M, 4, TWO_PI, np.abs(k) <= 2)
    table = _triple_table(M, N)
    assert trilinear_norm(W, W, np.zeros_like(W), table, -0.4, 12) == 0.0
    with pytest.raises(ValueError):
        trilinear_norm(W, W, W, table, -0.4, 8)


def test_damping_scaling_validation_and_small_run():
    with pytest.raises(ValueError):
        damping_scaling([8, 16], 2, 0, M=64)
    with pytest.raises(ValueError):
        damping_scaling([8, 16, 32], 2, 0, M=64)
    rep = damping_scaling([4, 8, 16], 4, 0, M=64)
    assert rep.ratios.shape == (3, 4) and np.all(rep.ratios > 0)
    assert [r["N"] for r in rep.to_records()] == [4, 8, 16]
    again = damping_scaling([4, 8, 16], 4, 0, M=64)
    assert np.array_equal(rep.ratios, again.ratios)

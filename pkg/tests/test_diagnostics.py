import math

import numpy as np
import pytest

from dampnls.diagnostics import (
    absorbing_bound,
    absorbing_check,
    decay_fit,
    diagnostic_records,
    energy_residual,
    equicontinuity_modulus,
    probe_family,
    tail_profile,
    weak_pairing,
)
from dampnls.equations import PhysParams, absorbing_radius, steady_state_g
from dampnls.integrator import SchemeSpec, Trajectory, integrate
from dampnls.spectral import (
    TWO_PI,
    SpectralField,
    grid_points,
    l2_norm,
    l2_norm_sq,
    random_field,
    transform_inverse,
    wavenumbers,
)


def rand(M, seed, kmax=None, norm=None):
    return random_field(M, np.random.default_rng(seed), kmax=kmax, norm=norm)


def const_traj(u, times):
    return Trajectory("full", times[1] - times[0], list(times), list(range(len(times))), [u] * len(times),
                      [{"l2_sq": l2_norm_sq(u)} for _ in times])


def test_energy_residual_linear_unforced():
    p = PhysParams(0.5, SpectralField.zeros(32), nonlin_sign=0)
    tr = integrate(rand(32, 0), p, SchemeSpec(dt=1e-3, horizon=0.5))
    # exact exponential decay; the trapezoid rule on e^{-2 gamma t} is the only error, O(dt^2)
    assert energy_residual(tr, p).max <= 1e-6 * l2_norm_sq(tr.states[0])


def test_energy_residual_steady_state():
    f = rand(32, 1, kmax=4, norm=0.5)
    p = PhysParams(0.5, f, nonlin_sign=0)
    g = steady_state_g(f, 0.5)
    tr = integrate(g, p, SchemeSpec(dt=1e-3, horizon=0.2, store_every=10))
    assert energy_residual(tr, p).max <= 1e-12


def test_energy_residual_order():
    M = 32
    p = PhysParams(0.5, rand(M, 2, kmax=3, norm=0.5))
    u0 = rand(M, 3, kmax=4, norm=1.0)
    res = []
    for dt in (2e-3, 1e-3):
        tr = integrate(u0, p, SchemeSpec(dt=dt, horizon=0.2))
        res.append(energy_residual(tr, p).max)
    assert 3.0 <= res[0] / res[1] <= 8.5


def test_energy_residual_needs_two_samples():
    u = rand(8, 4)
    tr = Trajectory("full", 1.0, [0.0], [0], [u], [{}])
    with pytest.raises(ValueError):
        energy_residual(tr, PhysParams(1.0, SpectralField.zeros(8)))


def test_absorbing_bound_forms():
    f = SpectralField.from_modes(16, {1: 0.5})
    p = PhysParams(0.5, f)
    t = np.array([0.0, 1.0, 50.0])
    b = absorbing_bound(t, 0.0, p)
    assert b[0] == 0 and b[-1] == pytest.approx(l2_norm_sq(f) / 0.25, rel=1e-10)
    p0 = PhysParams(0.5, SpectralField.zeros(16))
    assert absorbing_bound(1.0, 3.0, p0) == pytest.approx(3.0 * math.exp(-0.5))


def test_absorbing_check_run():
    f = SpectralField.from_modes(32, {1: 0.2})
    p = PhysParams(0.5, f)
    M0 = absorbing_radius(p)
    u0 = rand(32, 5, kmax=3, norm=5 * M0)
    tr = integrate(u0, p, SchemeSpec(dt=1e-3, horizon=12.0, store_every=20))
    rep = absorbing_check(tr, u0, p)
    assert rep.ok and not rep.violations
    assert rep.entry_time is not None and rep.stays_inside
    assert rep.entry_time <= rep.guaranteed_entry + 0.02
    after = rep.l2_sq[np.asarray(tr.times) >= rep.entry_time]
    assert np.all(np.sqrt(after) <= M0 * (1 + 1e-6))


def test_absorbing_check_flags_violation():
    f = SpectralField.zeros(16)
    p = PhysParams(1.0, f)
    u0 = SpectralField.from_modes(16, {0: 1.0})
    # a trajectory that fails to decay
    rep = absorbing_check(const_traj(u0, [0.0, 0.5, 1.0]), u0, p)
    assert len(rep.violations) == 2 and not rep.ok


def test_equicontinuity():
    g = SpectralField.from_modes(16, {2: 0.3})
    p = PhysParams(0.5, SpectralField.zeros(16))
    assert equicontinuity_modulus(const_traj(g, [0.0, 0.1, 0.2]), p).modulus == 0
    u0 = rand(32, 6, kmax=4, norm=2.0)
    q = PhysParams(0.5, SpectralField.zeros(32))
    tr = integrate(u0, q, SchemeSpec(dt=1e-3, horizon=1.0, store_every=10))
    rep = equicontinuity_modulus(tr, q)
    assert rep.modulus <= 2 * 0.5 * l2_norm_sq(u0) * (1 + 1e-6)
    assert rep.ok
    forced = PhysParams(0.5, rand(32, 7, kmax=3, norm=1.0))
    assert equicontinuity_modulus(integrate(u0, forced, SchemeSpec(dt=1e-3, horizon=1.0, store_every=10)),
                                  forced).ok


def test_tail_profile_examples():
    assert np.all(tail_profile(SpectralField.from_modes(32, {1: 1.0}), [1, 2, 5]) == 0)
    M = 64
    k = wavenumbers(M)
    c = np.where(np.abs(k) < M // 2, 2.0 ** -np.abs(k), 0.0)
    u = SpectralField(c)
    Ns = [0, 1, 3, 8, 20]
    tail = tail_profile(u, Ns)
    for N, e in zip(Ns, tail):
        # both signs of k: 2 * sum_{j=N+1}^{31} 4^{-j}
        exact = 2 * TWO_PI * (4.0 ** -(N + 1) - 4.0 ** -32) / (1 - 0.25)
        assert e ** 2 == pytest.approx(exact, rel=1e-12)
    assert np.all(np.diff(tail) <= 0)
    with pytest.raises(ValueError):
        tail_profile(u, [4, 2])
    with pytest.raises(ValueError):
        tail_profile(u, [32])


def test_weak_pairing():
    e1 = SpectralField.from_modes(32, {1: 1.0})
    e2 = SpectralField.from_modes(32, {2: 1.0})
    assert weak_pairing(e1, e1) == pytest.approx(TWO_PI)
    assert weak_pairing(e1, e2) == 0
    u, phi = rand(32, 8, kmax=15), rand(32, 9, kmax=15)
    # trapezoid quadrature is exact for the band-limited product
    quad = TWO_PI / 32 * np.sum(transform_inverse(u) * np.conj(transform_inverse(phi)))
    assert abs(weak_pairing(u, phi) - quad) <= 1e-10
    assert weak_pairing(u, u).imag == 0 or abs(weak_pairing(u, u).imag) < 1e-12
    assert weak_pairing(u, u).real == pytest.approx(l2_norm_sq(u), rel=1e-12)
    with pytest.raises(ValueError):
        weak_pairing(u, SpectralField.zeros(16))


def test_decay_fit():
    t = np.linspace(0, 5, 30)
    rate, pref = decay_fit(t, 0.3 * np.exp(-0.7 * t))
    assert rate == pytest.approx(-0.7, abs=1e-10)
    assert math.log(pref) == pytest.approx(math.log(0.3), abs=1e-10)
    # censored values below the floor are ignored
    vals = 0.3 * np.exp(-0.7 * t)
    vals[-5:] = 1e-15
    assert decay_fit(t, vals)[0] == pytest.approx(-0.7, abs=1e-10)
    with pytest.raises(ValueError):
        decay_fit(t, np.full_like(t, 1e-14))


def test_linear_high_mode_decay_rate():
    p = PhysParams(0.6, SpectralField.zeros(32), nonlin_sign=0)
    w0 = SpectralField.from_modes(32, {9: 0.1, -11: 0.05})
    tr = integrate(w0, p, SchemeSpec(dt=1e-2, horizon=3.0, store_every=10))
    rate, pref = decay_fit(tr.times, np.sqrt(tr.series("l2_sq")))
    assert rate == pytest.approx(-0.6, abs=1e-10)
    assert pref == pytest.approx(l2_norm(w0), rel=1e-10)


def test_probe_family_and_records():
    probes = probe_family(32, 2)
    assert list(probes) == ["k-2", "k-1", "k0", "k1", "k2"]
    p = PhysParams(0.5, rand(32, 10, kmax=3, norm=0.5))
    tr = integrate(rand(32, 11, kmax=4), p, SchemeSpec(dt=1e-3, horizon=0.01, store_every=5))
    recs = diagnostic_records(tr, p, (1.0, 2.0), [2, 4], probes)
    assert len(recs) == 3 and recs[0].energy_residual == 0.0
    for r in recs:
        assert r.l2_sq >= 0 and r.tail[2] >= r.tail[4]
        assert r.hs_norms[2.0] >= r.hs_norms[1.0] >= math.sqrt(r.l2_sq) * (1 - 1e-15)
        assert set(r.pairings) == set(probes)
    x = grid_points(32)
    assert x[0] == 0

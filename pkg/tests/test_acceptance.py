"""Acceptance suite: ten end-to-end criteria, each printing one PASS/FAIL line."""
import json
import math
import time

import numpy as np
import pytest

from dampnls import cli
from dampnls.bourgain import damping_scaling, resonance_sweep
from dampnls.diagnostics import energy_residual
from dampnls.equations import PhysParams
from dampnls.experiments import run_absorbing_ball, run_decomposition, run_smoothing, run_weak_limit
from dampnls.integrator import SchemeSpec, default_dt, integrate
from dampnls.invariants import invariant_suite
from dampnls.spectral import SpectralField, l2_norm, random_field

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'} {title}: {detail}")
    return emit


def test_c01_linear_dissipation(report):
    M, gamma = 128, 0.7
    p = PhysParams(gamma, SpectralField.zeros(M), nonlin_sign=0)
    u0 = random_field(M, np.random.default_rng(1))
    start = time.perf_counter()
    tr = integrate(u0, p, SchemeSpec(dt=1e-3, horizon=1.0))
    elapsed = time.perf_counter() - start
    norms = np.array([l2_norm(u) for u in tr.fields])
    rel = np.abs(norms - np.exp(-gamma * np.asarray(tr.times)) * l2_norm(u0)) / norms
    ok = rel.max() <= 1e-12 and elapsed < 1.0
    report(1, "exact linear dissipation", ok, f"max rel {rel.max():.2e} over {len(tr)} samples, {elapsed:.2f}s")
    assert rel.max() <= 1e-12
    assert elapsed < 1.0


def test_c02_single_mode_closed_form(report):
    M, A, k, gamma, T = 64, 1.0, 3, 0.5, 10.0
    p = PhysParams(gamma, SpectralField.zeros(M))
    u0 = SpectralField.from_modes(M, {k: A})
    phase = k * k * T - A * A * (1 - math.exp(-2 * gamma * T)) / (2 * gamma)
    exact = SpectralField.from_modes(M, {k: A * math.exp(-gamma * T) * np.exp(1j * phase)})
    errs = [l2_norm(integrate(u0, p, SchemeSpec(dt=dt, horizon=T, store_every=10 ** 9)).final - exact)
            for dt in (1e-3, 5e-4)]
    order = math.log2(errs[0] / errs[1])
    ok = errs[0] <= 1e-8 and order >= 1.9
    report(2, "single-mode closed form", ok, f"error {errs[0]:.2e} at dt=1e-3, order {order:.3f}")
    assert errs[0] <= 1e-8
    assert order >= 1.9


def test_c03_energy_law(report):
    M = 64
    dt = default_dt(M)
    worst, step_ratios, unit_ratios = 0.0, [], []
    for i in range(10):
        rng = np.random.default_rng(100 + i)
        gamma = rng.uniform(0.25, 1.0)
        p = PhysParams(gamma, random_field(M, rng, kmax=4, norm=rng.uniform(0.2, 1.0)))
        u0 = random_field(M, rng, kmax=8, norm=rng.uniform(0.5, 2.0), decay=1.0)
        a, b = (energy_residual(integrate(u0, p, SchemeSpec(dt=h, horizon=0.05)), p) for h in (dt, dt / 2))
        worst = max(worst, a.max)
        step_ratios.append(np.abs(a.residuals).max() / np.abs(b.residuals).max())
        unit_ratios.append(a.max / b.max)
    ok = worst <= 1e-6 and min(step_ratios) >= 4
    report(3, "energy law", ok, f"per-unit-time residual {worst:.2e} at dt={dt:.3e}; per-step residual "
           f"ratio min {min(step_ratios):.3f}; per-unit-time ratio min {min(unit_ratios):.3f}")
    assert worst <= 1e-6
    assert min(step_ratios) >= 4


def test_c04_absorbing_ball(report):
    start = time.perf_counter()
    r = run_absorbing_ball()
    viol = r.check("l2-bound").measured
    report(4, "absorbing ball", r.passed, f"{viol} violations over {r.config['members']} members, "
           f"{time.perf_counter() - start:.0f}s")
    assert r.passed


def test_c05_weak_limit(report):
    r = run_weak_limit()
    detail = ", ".join(f"{c.claim} {c.measured:.3g}" for c in r.checks)
    report(5, "weak-limit discontinuity", r.passed, detail)
    for claim in ("weak-convergence", "gap-law", "discontinuity"):
        assert r.check(claim).passed, claim


def test_c06_decomposition(report):
    r = run_decomposition()
    detail = ", ".join(f"{c.claim} {c.measured:.3g}" for c in r.checks)
    ok = all(r.check(c).passed for c in ("split-consistency", "high-mode-decay", "z-consistency"))
    report(6, "decomposition", ok, detail)
    assert r.check("split-consistency").measured <= 1e-6
    assert r.check("high-mode-decay").measured <= -0.8 * r.config["gamma"]
    assert r.check("z-consistency").measured <= 1e-6


def test_c07_resonance_identity(report):
    bad = resonance_sweep(10 ** 4, 2024)
    report(7, "resonance identity", not bad, f"{len(bad)} mismatches over 10^4 triples")
    assert bad == []


def test_c08_damping_scaling(report):
    start = time.perf_counter()
    rep = damping_scaling([8, 16, 32, 64], 100, 0, M=256)
    elapsed = time.perf_counter() - start
    ok = rep.slope <= -0.15 and elapsed < 300
    med = ", ".join(f"N={r['N']}: {r['median_ratio']:.3g}" for r in rep.records)
    report(8, "trilinear damping scaling", ok, f"slope {rep.slope:.3f} ({med}), {elapsed:.0f}s")
    assert rep.slope <= -0.15
    assert elapsed < 300


def test_c09_smoothing(report):
    r = run_smoothing()
    detail = ", ".join(f"{c.claim} {c.measured:.3g}" for c in r.checks)
    report(9, "smoothing signature", r.passed, f"{r.outcome}: {detail}")
    assert r.outcome == "pass"


def test_c10_infrastructure(report, tmp_path, capsys):
    cfg = {"M": 64, "gamma": 0.5, "f_profile": {"exponent": 0.6, "kmax": 16, "norm": 0.5},
           "u0_profile": {"exponent": 1.0, "kmax": 16, "norm": 1.0}, "seed": 11, "dt": 1e-3,
           "horizon": 0.4, "store_every": 25, "tail_N": [4, 8], "probe_kmax": 2}
    full = tmp_path / "full.json"
    full.write_text(json.dumps(cfg))
    half = tmp_path / "half.json"
    half.write_text(json.dumps(dict(cfg, horizon=0.2)))
    files = ("timeseries.csv", "checkpoint.ckpt", "config.json")
    codes = [cli.main(["simulate", "--config", str(full), "--out", str(tmp_path / d)]) for d in ("a", "b")]
    replay = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    codes.append(cli.main(["simulate", "--config", str(half), "--out", str(tmp_path / "r")]))
    codes.append(cli.main(["simulate", "--config", str(full), "--out", str(tmp_path / "r"),
                           "--resume", str(tmp_path / "r" / "checkpoint.ckpt")]))
    capsys.readouterr()
    resume = (tmp_path / "r" / "checkpoint.ckpt").read_bytes() == (tmp_path / "a" / "checkpoint.ckpt").read_bytes()
    inv = invariant_suite()
    inv_ok = all(r.passed for r in inv)
    worst = max(r.error for r in inv)
    ok = codes == [0, 0, 0, 0] and replay and resume and inv_ok
    report(10, "infrastructure", ok, f"replay {'identical' if replay else 'DIFFERS'}, resume "
           f"{'identical' if resume else 'DIFFERS'}, invariants {sum(r.passed for r in inv)}/{len(inv)} "
           f"(worst error {worst:.1e}) at M=16..1024")
    assert codes == [0, 0, 0, 0]
    assert replay and resume and inv_ok

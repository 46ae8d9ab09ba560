"""End-to-end scenarios with pass/fail summaries.

Each ``run_*`` function is a pure function of its keyword parameters and
``seed``: repeated calls give bit-identical reports.  Attractor proxies are
states obtained by running the full equation for a burn-in horizon; checks
made on them are labelled as proxy checks in the report.
"""
from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .diagnostics import (
    absorbing_check,
    decay_fit,
    probe_family,
    tail_profile,
    weak_pairing,
)
from .equations import DecompState, ModifiedState, PhysParams, absorbing_radius, steady_state_g
from .integrator import SchemeSpec, integrate
from .spectral import (
    TWO_PI,
    SpectralField,
    l2_norm,
    l2_norm_sq,
    power_law_field,
    project,
    random_field,
    sobolev_norm,
)

log = logging.getLogger(__name__)

CLAIMS = {
    "l2-bound": "||u(t)||^2 <= e^{-gamma t}||u0||^2 + (1 - e^{-gamma t})||f||^2/gamma^2 at every sample",
    "absorbing-ball": "every trajectory enters the ball of radius 2||f||/gamma and stays inside",
    "extra-mass": "||u0 + e^{inx}||^2 - ||u0||^2 = 2 pi for n outside supp u0",
    "weak-convergence": "u_n(t) -> v(t) weakly: probe gap to the modified solution decreases in n",
    "gap-law": "||u_n(t)||^2 - ||v(t)||^2 tracks 2 pi e^{-2 gamma t}",
    "discontinuity": "weak limit differs from the solution issued from the weak limit of the data",
    "split-consistency": "v + w reproduces the direct solution u",
    "high-mode-decay": "||w(t)|| decays at rate close to gamma",
    "low-mode-h2": "||v(t)||_{H^2} stays bounded over the horizon",
    "z-consistency": "Q_N v - Q_N g solves the z equation from -Q_N g",
    "tail-halving": "doubling N at least halves the fitted prefactor of ||w||",
    "h2-stabilization": "late-time H^2 norm settles (final-quarter variation below 10%)",
    "tail-vs-g": "late-time ||Q_N u|| <= 2 ||Q_N g|| for cutoffs in the resolved band",
    "h3-growth": "H^3 partial sums keep growing under cutoff doubling",
}


@dataclass
class Check:
    claim: str
    measured: float
    target: float
    passed: bool
    relation: str = "<="
    note: str = ""

    def __post_init__(self):
        if self.claim not in CLAIMS:
            raise ValueError(f"unknown claim id {self.claim!r}")


@dataclass
class ExperimentReport:
    name: str
    config: dict
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    status: str | None = None

    @property
    def passed(self) -> bool:
        return self.outcome == "pass"

    @property
    def outcome(self) -> str:
        if self.status is not None:
            return self.status
        return "pass" if self.checks and all(c.passed for c in self.checks) else "fail"

    def check(self, claim: str) -> Check:
        for c in self.checks:
            if c.claim == claim:
                return c
        raise KeyError(claim)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "outcome": self.outcome,
            "config": self.config,
            "checks": [asdict(c) | {"statement": CLAIMS[c.claim]} for c in self.checks],
            "artifacts": list(self.artifacts),
            "data": _jsonable(self.data),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _rng(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *path]))


def _field_from_modes(M: int, modes) -> SpectralField:
    return SpectralField.from_modes(M, {int(m[0]): complex(*m[1:]) if len(m) > 2 else m[1] for m in modes})


def _forcing(M: int, f, seed: int) -> SpectralField:
    """``f`` is a SpectralField, a mode list ``[[k, amp], [k, re, im]]`` or a profile dict."""
    if isinstance(f, SpectralField):
        return f
    if isinstance(f, dict):
        return power_law_field(M, _rng(seed, 99), f["exponent"], f.get("kmax"), f.get("norm"))
    return _field_from_modes(M, f)


def _write_artifacts(report: ExperimentReport, out_dir, trajectories=(), p=None, **csv_kw):
    if out_dir is None:
        return report
    from . import io as dio
    os.makedirs(out_dir, exist_ok=True)
    for label, traj, params in trajectories:
        path = os.path.join(out_dir, f"{report.name}_{label}.csv")
        dio.export_timeseries(traj, params, path, "csv", **csv_kw)
        report.artifacts.append(path)
    cfg_path = os.path.join(out_dir, f"{report.name}_config.json")
    dio.atomic_write_text(cfg_path, json.dumps(_jsonable(report.config), indent=2, sort_keys=True))
    report.artifacts.append(cfg_path)
    rep_path = os.path.join(out_dir, f"{report.name}_report.json")
    report.artifacts.append(rep_path)
    dio.atomic_write_text(rep_path, report.to_json())
    return report


def attractor_proxy(p: PhysParams, rng: np.random.Generator, burn_in: float,
                    dt: float | None = None, radius_fraction: float = 0.5) -> SpectralField:
    """Final state of a burn-in run started inside the absorbing ball."""
    M0 = absorbing_radius(p)
    u0 = random_field(p.M, rng, kmax=p.M // 4, decay=0.5, norm=radius_fraction * M0)
    traj = integrate(u0, p, SchemeSpec(dt=dt, horizon=burn_in, store_every=10 ** 9))
    return traj.final


# ---------------------------------------------------------------- absorbing ball

def run_absorbing_ball(*, M: int = 128, gammas=(0.25, 1.0), members: int = 8,
                       f=((1, 0.05),), radius_factors=None, horizon_factor: float = 20.0,
                       dt: float = 1e-3, store_every: int = 50, kmax: int = 4, seed: int = 0,
                       out_dir=None) -> ExperimentReport:
    """Ensemble of ``members`` runs split over ``gammas``, initial norms up to ``10 M0``."""
    if members < 1:
        raise ValueError("members must be >= 1")
    if radius_factors is None:
        radius_factors = np.linspace(0.0, 10.0, members) if members > 1 else [10.0]
    radius_factors = [float(r) for r in radius_factors]
    if len(radius_factors) != members:
        raise ValueError("radius_factors must have one entry per member")
    fM = _forcing(M, [list(m) for m in f] if not isinstance(f, (dict, SpectralField)) else f, seed)
    config = dict(M=M, gammas=list(gammas), members=members, f=_jsonable(_modes_of(fM)),
                  radius_factors=radius_factors, horizon_factor=horizon_factor, dt=dt,
                  store_every=store_every, kmax=kmax, seed=seed)
    report = ExperimentReport("absorbing_ball", config)
    rows, trajs = [], []
    n_viol, all_in = 0, True
    for i in range(members):
        gamma = float(gammas[i % len(gammas)])
        p = PhysParams(gamma, fM)
        M0 = absorbing_radius(p)
        u0 = random_field(M, _rng(seed, i), kmax=kmax, norm=radius_factors[i] * M0)
        traj = integrate(u0, p, SchemeSpec(dt=dt, horizon=horizon_factor / gamma, store_every=store_every))
        rep = absorbing_check(traj, u0, p)
        n_viol += len(rep.violations)
        all_in &= rep.entry_time is not None and rep.stays_inside
        rows.append(dict(member=i, gamma=gamma, u0_norm=l2_norm(u0), M0=M0,
                         violations=len(rep.violations), entry_time=rep.entry_time,
                         guaranteed_entry=rep.guaranteed_entry, stays_inside=rep.stays_inside,
                         final_l2_sq=float(rep.l2_sq[-1])))
        trajs.append((f"member{i}", traj, p))
    report.checks.append(Check("l2-bound", n_viol, 0, n_viol == 0, "=="))
    report.checks.append(Check("absorbing-ball", float(sum(r["stays_inside"] for r in rows)), members,
                               all_in, "==", "members inside the ball at the end and after entry"))
    report.data["members"] = rows
    return _write_artifacts(report, out_dir, trajs)


def _modes_of(u: SpectralField):
    nz = np.flatnonzero(u.coeffs)
    return [[int(u.k[i]), float(u.coeffs[i].real), float(u.coeffs[i].imag)] for i in nz]


# ---------------------------------------------------------------- weak limit

DEFAULT_U0 = ((0, 0.4), (1, 0.3, 0.2), (-1, 0.25), (2, 0.0, -0.2))
DEFAULT_F = ((0, 0.2), (1, 0.15), (-2, 0.0, 0.1))


def run_weak_limit(*, M: int = 256, gamma: float = 0.5, n_list=(8, 16, 32), u0=DEFAULT_U0,
                   f=DEFAULT_F, probe_kmax: int = 4, t_probe=(0.5, 1.0), horizon: float | None = None,
                   dt: float | None = None, store_every: int = 2000, seed: int = 0,
                   out_dir=None) -> ExperimentReport:
    """Oscillating data ``u0 + e^{inx}``: weak convergence to the modified equation.

    ``t_probe`` lists probe times in units of ``1/gamma``; the horizon defaults
    to the largest of them.  ``v`` solves the modified equation from ``u0``
    with ``a(0) = ||u0||^2 + 2 pi`` and ``a`` advanced by its own energy law.
    """
    n_list = [int(n) for n in n_list]
    if sorted(n_list) != n_list or len(set(n_list)) != len(n_list):
        raise ValueError("n_list must be strictly increasing")
    u0f = u0 if isinstance(u0, SpectralField) else _field_from_modes(M, u0)
    fM = _forcing(M, f, seed)
    supp = set(u0f.k[np.flatnonzero(u0f.coeffs)].tolist())
    for n in n_list:
        # the cubic of e^{inx} against the data reaches |k| ~ 3n / 2 + |supp|
        if 2 * n >= M // 2 or n in supp:
            raise ValueError(f"mode n={n} too close to M/2={M // 2} or inside supp u0")
    p = PhysParams(gamma, fM)
    times = sorted(float(t) / gamma for t in t_probe)
    horizon = times[-1] if horizon is None else float(horizon)
    scheme = SchemeSpec(dt=dt, horizon=horizon, store_every=store_every)
    config = dict(M=M, gamma=gamma, n_list=n_list, u0=_modes_of(u0f), f=_modes_of(fM),
                  probe_kmax=probe_kmax, t_probe=list(t_probe), horizon=horizon,
                  dt=scheme.resolved_dt(M), store_every=store_every, seed=seed)
    report = ExperimentReport("weak_limit", config)
    probes = probe_family(M, probe_kmax)

    extra = l2_norm_sq(u0f + SpectralField.from_modes(M, {n_list[-1]: 1.0})) - l2_norm_sq(u0f)
    report.checks.append(Check("extra-mass", extra, TWO_PI, abs(extra - TWO_PI) <= 1e-12 * TWO_PI, "=="))

    tr_u = integrate(u0f, p, scheme)
    tr_v = integrate(ModifiedState(u0f, l2_norm_sq(u0f) + TWO_PI), p, scheme, "modified")
    tr_n = {n: integrate(u0f + SpectralField.from_modes(M, {n: 1.0}), p, scheme) for n in n_list}

    def at(traj, t):
        i = int(np.argmin(np.abs(np.asarray(traj.times) - t)))
        if abs(traj.times[i] - t) > 0.5 * traj.dt * store_every + 1e-12:
            raise ValueError(f"probe time {t} not sampled; adjust store_every")
        return traj.fields[i]

    gaps_v, gaps_u = {}, {}
    monotone = True
    for t in times:
        v_t, u_t = at(tr_v, t), at(tr_u, t)
        gv = {n: {pid: abs(weak_pairing(at(tr_n[n], t) - v_t, phi)) for pid, phi in probes.items()}
              for n in n_list}
        gu = {n: {pid: abs(weak_pairing(at(tr_n[n], t) - u_t, phi)) for pid, phi in probes.items()}
              for n in n_list}
        med = [float(np.median(list(gv[n].values()))) for n in n_list]
        monotone &= all(b < a for a, b in zip(med, med[1:]))
        gaps_v[t] = {"median": med, "per_probe": gv}
        gaps_u[t] = gu
    worst = max(max(b / a for a, b in zip(g["median"], g["median"][1:])) for g in gaps_v.values())
    report.checks.append(Check("weak-convergence", worst, 1.0, monotone, "<",
                               "largest ratio of consecutive median probe gaps"))

    # gap law at the largest n
    nmax = n_list[-1]
    t_arr = np.asarray(tr_v.times)
    gap = np.array([l2_norm_sq(a) for a in tr_n[nmax].fields]) - tr_v.series("l2_sq")
    law = TWO_PI * np.exp(-2 * gamma * (t_arr - t_arr[0]))
    rel = np.abs(gap - law) / law
    report.checks.append(Check("gap-law", float(rel.max()), 0.1, bool(rel.max() <= 0.1), "<=",
                               f"max relative deviation at n={nmax}"))
    report.data["gap_law"] = dict(t=t_arr, measured=gap, law=law, a_gap=tr_v.series("gap"))

    # discontinuity at t = 1/gamma: separation from u against convergence gap to v at the largest n
    t1 = min(times, key=lambda t: abs(t - 1.0 / gamma))
    best, best_pid = 0.0, None
    for pid in probes:
        sep = min(gaps_u[t1][n][pid] for n in n_list)
        conv = gaps_v[t1]["per_probe"][nmax][pid]
        r = sep / conv if conv > 0 else math.inf
        if r > best:
            best, best_pid = r, pid
    report.checks.append(Check("discontinuity", best, 10.0, best > 10.0, ">",
                               f"best probe {best_pid} at t={t1:.6g}"))
    report.data["gaps_to_v"] = gaps_v
    report.data["gaps_to_u"] = gaps_u
    return _write_artifacts(report, out_dir, [("u", tr_u, p), ("v", tr_v, p), (f"n{nmax}", tr_n[nmax], p)],
                            probes=probes)


# ---------------------------------------------------------------- decomposition

def run_decomposition(*, M: int = 128, N: int = 16, gamma: float = 0.5,
                      f=None, burn_in: float | None = None, horizon: float = 10.0,
                      dt: float = 1e-3, store_every: int = 100, double_N: bool = False,
                      seed: int = 0, out_dir=None) -> ExperimentReport:
    """Low/high split ``u = v + w`` of an attractor proxy, checked against a direct run."""
    if not 0 < N < M // 4:
        raise ValueError(f"cutoff must satisfy 0 < N < M/4, got N={N}, M={M}")
    f = {"exponent": 0.6, "kmax": M // 4, "norm": 0.5} if f is None else f
    fM = _forcing(M, f, seed)
    p = PhysParams(gamma, fM)
    burn_in = 10.0 / gamma if burn_in is None else float(burn_in)
    u0 = attractor_proxy(p, _rng(seed, 1), burn_in, dt)
    scheme = SchemeSpec(dt=dt, horizon=horizon, store_every=store_every)
    config = dict(M=M, N=N, gamma=gamma, f=f if isinstance(f, dict) else _modes_of(fM), burn_in=burn_in,
                  horizon=horizon, dt=dt, store_every=store_every, double_N=double_N, seed=seed)
    report = ExperimentReport("decomposition", config)
    tr_u = integrate(u0, p, scheme)
    g = steady_state_g(fM, gamma)

    def split_run(NN):
        return integrate(DecompState.split(u0, NN, fM, gamma), p, scheme, "decomposition")

    tr = split_run(N)
    err = max(l2_norm(s.u - a) for s, a in zip(tr.states, tr_u.states))
    report.checks.append(Check("split-consistency", err, 1e-6, err <= 1e-6))

    t = np.asarray(tr.times)
    wn = np.sqrt(tr.series("w_l2_sq"))
    rate, pref = decay_fit(t, wn)
    report.checks.append(Check("high-mode-decay", rate, -0.8 * gamma, rate <= -0.8 * gamma, "<=",
                               f"prefactor {pref:.4g} vs ||Q_N u0|| {l2_norm(project(u0, N, 'high')):.4g}"))

    h2 = np.array([sobolev_norm(s.v, 2.0) for s in tr.states])
    half = len(h2) // 2
    growth = float(h2[half:].max() / h2[: half + 1].max())
    report.checks.append(Check("low-mode-h2", growth, 1.1, growth <= 1.1, "<=",
                               "max over second half / max over first half"))

    gN = project(g, N, "high")
    zerr = max(l2_norm(project(s.v, N, "high") - gN - s.z) for s in tr.states)
    report.checks.append(Check("z-consistency", zerr, 1e-6, zerr <= 1e-6))
    report.data.update(t=t, w_norm=wn, v_h2=h2, fit=dict(rate=rate, prefactor=pref),
                       q_n_u0=l2_norm(project(u0, N, "high")))
    trajs = [("direct", tr_u, p), (f"split_N{N}", tr, p)]
    if double_N:
        N2 = 2 * N
        if not N2 < M // 2:
            raise ValueError("doubled cutoff exceeds resolved band")
        tr2 = split_run(N2)
        rate2, pref2 = decay_fit(np.asarray(tr2.times), np.sqrt(tr2.series("w_l2_sq")))
        ratio = pref2 / pref
        report.checks.append(Check("tail-halving", ratio, 0.5, ratio <= 0.5, "<=",
                                   f"prefactor at N={N2} over N={N}"))
        report.data["doubled"] = dict(N=N2, rate=rate2, prefactor=pref2)
    return _write_artifacts(report, out_dir, trajs)


# ---------------------------------------------------------------- smoothing

def run_smoothing(*, M: int = 128, gamma: float = 0.5, delta: float = 0.1, f_norm: float = 0.3,
                  u0_norm: float = 2.0, members: int = 2, horizon_factor: float = 20.0,
                  dt: float = 1e-3, store_every: int = 200, tail_N=None,
                  seed: int = 0, out_dir=None) -> ExperimentReport:
    """Rough forcing and rough data: late-time H^2 settles and the tail follows ``g``.

    Outcome is ``pass``, ``inconclusive`` (H^2 still drifting at the horizon) or
    ``fail``.  The states are finite-time proxies; nothing is asserted about
    the attractor itself.
    """
    if horizon_factor < 20.0:
        raise ValueError("horizon must be at least 20/gamma")
    tail_N = [n for n in (2, 4, 8, 16, 32) if n < M // 4] if tail_N is None else [int(n) for n in tail_N]
    if any(not 0 < n < M // 2 for n in tail_N):
        raise ValueError("cutoff exceeds resolved band")
    expo = 0.5 + delta
    fM = power_law_field(M, _rng(seed, 99), expo, M // 4, f_norm)
    p = PhysParams(gamma, fM)
    g = steady_state_g(fM, gamma)
    g_tail = tail_profile(g, tail_N)
    config = dict(M=M, gamma=gamma, delta=delta, f_norm=f_norm, u0_norm=u0_norm, members=members,
                  horizon_factor=horizon_factor, dt=dt, store_every=store_every, tail_N=tail_N, seed=seed)
    report = ExperimentReport("smoothing", config)
    worst_var, worst_tail, h3_ratios, trajs, rows = 0.0, 0.0, [], [], []
    K = M // 4
    for i in range(members):
        u0 = power_law_field(M, _rng(seed, 10 + i), expo, None, u0_norm)
        tr = integrate(u0, p, SchemeSpec(dt=dt, horizon=horizon_factor / gamma, store_every=store_every))
        h2 = np.array([sobolev_norm(u, 2.0) for u in tr.fields])
        q = h2[-(len(h2) // 4):]
        var = float((q.max() - q.min()) / q.mean())
        late = tr.fields[-1]
        tail_ratio = tail_profile(late, tail_N) / g_tail
        # H^3 partial sums over |k| <= K and |k| <= K/2
        h3 = sobolev_norm(project(late, K, "low"), 3.0) / sobolev_norm(project(late, K // 2, "low"), 3.0)
        h2r = sobolev_norm(project(late, K, "low"), 2.0) / sobolev_norm(project(late, K // 2, "low"), 2.0)
        worst_var = max(worst_var, var)
        worst_tail = max(worst_tail, float(tail_ratio.max()))
        h3_ratios.append(h3)
        rows.append(dict(member=i, h2_final=float(h2[-1]), h2_variation=var, tail_ratio=tail_ratio,
                         h3_partial_ratio=h3, h2_partial_ratio=h2r))
        trajs.append((f"member{i}", tr, p))
    report.checks.append(Check("h2-stabilization", worst_var, 0.1, worst_var < 0.1, "<"))
    report.checks.append(Check("tail-vs-g", worst_tail, 2.0, worst_tail <= 2.0, "<=",
                               f"max over N in {tail_N} of ||Q_N u|| / ||Q_N g||"))
    h3min = float(min(h3_ratios))
    report.checks.append(Check("h3-growth", h3min, 1.5, h3min >= 1.5, ">=",
                               f"||P_K u||_H3 / ||P_(K/2) u||_H3 with K={K}"))
    report.data.update(members=rows, g_tail=g_tail, tail_N=tail_N)
    if not report.check("tail-vs-g").passed or not report.check("h3-growth").passed:
        report.status = "fail"
    elif not report.check("h2-stabilization").passed:
        report.status = "inconclusive"
    else:
        report.status = "pass"
    return _write_artifacts(report, out_dir, trajs, tail_N=tail_N)


EXPERIMENTS = {
    "absorbing_ball": run_absorbing_ball,
    "weak_limit": run_weak_limit,
    "decomposition": run_decomposition,
    "smoothing": run_smoothing,
}

__all__ = [
    "Check", "ExperimentReport", "CLAIMS", "EXPERIMENTS", "attractor_proxy", "run_absorbing_ball",
    "run_weak_limit", "run_decomposition", "run_smoothing",
]

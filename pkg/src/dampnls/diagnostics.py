"""Post-processing of trajectories: energy law, absorbing ball, tails, pairings, fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .equations import PhysParams, absorbing_radius
from .spectral import SpectralField, inner, l2_norm_sq, project, sobolev_norm

RESOLUTION_FLOOR = 1e-12


@dataclass
class DiagnosticRecord:
    t: float
    l2_sq: float
    hs_norms: dict = field(default_factory=dict)
    pairings: dict = field(default_factory=dict)
    energy_residual: float = 0.0
    tail: dict = field(default_factory=dict)


def _fields(traj):
    return traj.fields


def _energy_terms(traj, p: PhysParams):
    t = np.asarray(traj.times, dtype=float)
    fields = _fields(traj)
    e = np.array([l2_norm_sq(u) for u in fields])
    r = np.array([inner(p.forcing, u).real for u in fields])
    return t, e, r


@dataclass
class EnergyResidual:
    residuals: np.ndarray      # signed residual per sample interval
    per_unit_time: np.ndarray  # |residual| / interval length
    max: float
    mean: float


def energy_residual(traj, p: PhysParams) -> EnergyResidual:
    """Residual of ``d||u||^2 = (-2 gamma ||u||^2 + 2 Re(f, u)) dt`` over each sample interval.

    Time integrals use the trapezoid rule on the stored samples.
    """
    if len(traj) < 2:
        raise ValueError("energy residual needs at least 2 samples")
    t, e, r = _energy_terms(traj, p)
    dt = np.diff(t)
    res = (e[1:] - e[:-1]) + p.gamma * dt * (e[1:] + e[:-1]) - dt * (r[1:] + r[:-1])
    per = np.abs(res) / dt
    return EnergyResidual(res, per, float(per.max()), float(per.mean()))


@dataclass
class AbsorbingReport:
    M0: float
    bound: np.ndarray
    l2_sq: np.ndarray
    violations: list
    entry_time: float | None
    stays_inside: bool
    guaranteed_entry: float | None

    @property
    def ok(self) -> bool:
        return not self.violations


def absorbing_bound(t, u0_l2_sq: float, p: PhysParams) -> np.ndarray:
    """``e^{-gamma t} ||u0||^2 + (1 - e^{-gamma t}) ||f||^2 / gamma^2``."""
    t = np.asarray(t, dtype=float)
    decay = np.exp(-p.gamma * t)
    return decay * u0_l2_sq + (1 - decay) * l2_norm_sq(p.forcing) / p.gamma ** 2


def absorbing_check(traj, u0: SpectralField, p: PhysParams, tol: float = 1e-6) -> AbsorbingReport:
    t = np.asarray(traj.times, dtype=float) - traj.times[0]
    e = np.array([l2_norm_sq(u) for u in _fields(traj)])
    e0 = l2_norm_sq(u0)
    bound = absorbing_bound(t, e0, p)
    slack = tol * (1 + e0)
    violations = [(float(traj.times[i]), float(e[i]), float(bound[i]))
                  for i in np.flatnonzero(e > bound + slack)]
    M0 = absorbing_radius(p)
    inside = np.sqrt(e) <= M0 * (1 + tol)
    entry = None
    stays = False
    if inside.any():
        first = int(np.argmax(inside))
        entry = float(traj.times[first])
        stays = bool(inside[first:].all())
    # from the bound: e^{-gamma t} e0 + M0^2/4 <= M0^2 once e^{-gamma t} e0 <= 3 M0^2 / 4
    guaranteed = None
    if M0 > 0:
        guaranteed = max(0.0, math.log(max(e0, 1e-300) / (0.75 * M0 ** 2)) / p.gamma)
    return AbsorbingReport(M0, bound, e, violations, entry, stays, guaranteed)


@dataclass
class EquicontinuityReport:
    modulus: float
    bracket: float
    slopes: np.ndarray

    @property
    def ok(self) -> bool:
        return self.modulus <= self.bracket


def equicontinuity_modulus(traj, p: PhysParams) -> EquicontinuityReport:
    """Largest ``| ||u(t1)||^2 - ||u(t0)||^2 | / |t1 - t0|`` over sample pairs.

    Any chord slope is a weighted mean of the adjacent-sample slopes it spans,
    so the supremum over all pairs is attained on adjacent pairs.  The bound
    compared against is ``3 gamma sup ||u||^2 + ||f||^2 / gamma``.
    """
    t, e, _ = _energy_terms(traj, p)
    slopes = np.abs(np.diff(e)) / np.diff(t) if len(t) > 1 else np.zeros(0)
    modulus = float(slopes.max()) if slopes.size else 0.0
    bracket = 3 * p.gamma * float(e.max()) + l2_norm_sq(p.forcing) / p.gamma
    return EquicontinuityReport(modulus, bracket, slopes)


def tail_profile(u: SpectralField, N_list) -> np.ndarray:
    """``||Q_N u||`` for each cutoff in ``N_list``."""
    N_list = list(N_list)
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be increasing")
    return np.array([math.sqrt(l2_norm_sq(project(u, int(N), "high"))) for N in N_list])


def weak_pairing(u: SpectralField, probe: SpectralField) -> complex:
    """``(u, probe) = integral_T u conj(probe) dx``."""
    return inner(u, probe)


def decay_fit(times, values, floor: float = RESOLUTION_FLOOR):
    """Least-squares fit ``log values = log prefactor + rate * t`` on samples above ``floor``."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    keep = y > floor
    if keep.sum() < 2:
        raise ValueError("series entirely at the resolution floor")
    rate, intercept = np.polyfit(t[keep], np.log(y[keep]), 1)
    return float(rate), float(math.exp(intercept))


def probe_family(M: int, kmax: int = 4) -> dict:
    """``{"k<k>": exp(i k x)}`` for ``|k| <= kmax``."""
    return {f"k{k}": SpectralField.from_modes(M, {k: 1.0}) for k in range(-kmax, kmax + 1)}


def diagnostic_records(traj, p: PhysParams, s_list=(1.0, 2.0), tail_N=(), probes=None):
    """One :class:`DiagnosticRecord` per stored sample.

    ``energy_residual`` of sample ``m`` is the per-unit-time residual of the
    interval ending at ``t_m`` (0 for the first sample).
    """
    probes = probes or {}
    per = np.zeros(len(traj))
    if len(traj) >= 2:
        per[1:] = energy_residual(traj, p).per_unit_time
    out = []
    for i, (t, u) in enumerate(zip(traj.times, _fields(traj))):
        out.append(DiagnosticRecord(
            t=float(t),
            l2_sq=l2_norm_sq(u),
            hs_norms={s: sobolev_norm(u, s) for s in s_list},
            pairings={pid: weak_pairing(u, phi) for pid, phi in probes.items()},
            energy_residual=float(per[i]),
            tail={int(N): float(v) for N, v in zip(tail_N, tail_profile(u, tail_N))} if tail_N else {},
        ))
    return out

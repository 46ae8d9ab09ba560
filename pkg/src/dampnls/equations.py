"""Right-hand sides for the damped, driven cubic NLS and its companion systems.

All equations are written for ``u_t = ...`` with the sign convention

    u_t + gamma u + i u_xx + i sign |u|^2 u = f,

so in Fourier space ``u_t(k) = (i k^2 - gamma) u(k) - i sign F(|u|^2 u)(k) + f(k)``.
``sign = +1`` is the default; ``sign = 0`` switches the nonlinearity off.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    GridSpec,
    SpectralField,
    TWO_PI,
    _same_grid,
    cubic,
    cubic_product,
    inner,
    l2_norm_sq,
    project,
    wavenumbers,
)


@dataclass(frozen=True)
class PhysParams:
    gamma: float
    forcing: SpectralField
    nonlin_sign: int = 1
    pad: float = 2.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"damping gamma must be > 0, got {self.gamma}")
        if not self.forcing.is_finite():
            raise ValueError("forcing has non-finite coefficients")
        if self.nonlin_sign not in (1, -1, 0):
            raise ValueError(f"nonlin_sign must be +1, -1 or 0 (linear), got {self.nonlin_sign}")
        GridSpec(self.forcing.M, 0, self.pad)

    @property
    def M(self) -> int:
        return self.forcing.M

    def with_forcing(self, forcing: SpectralField) -> "PhysParams":
        return PhysParams(self.gamma, forcing, self.nonlin_sign, self.pad)


@dataclass(frozen=True)
class ModifiedState:
    """Field ``v`` together with the scalar ``a(t)`` of the modified equation."""

    v: SpectralField
    a: float

    def __post_init__(self):
        if self.a < 0:
            raise ValueError(f"a must be nonnegative, got {self.a}")


@dataclass(frozen=True)
class DecompState:
    """Low/high splitting ``u = v + w`` with cutoff ``N``; ``z`` optionally tracked."""

    v: SpectralField
    w: SpectralField
    N: int
    z: SpectralField | None = field(default=None)

    def __post_init__(self):
        _same_grid(self.v, self.w)
        GridSpec(self.v.M, self.N)

    @property
    def u(self) -> SpectralField:
        return self.v + self.w

    @classmethod
    def split(cls, u0: SpectralField, N: int, forcing: SpectralField | None = None,
              gamma: float | None = None) -> "DecompState":
        """Initial data ``v(0) = P_N u0``, ``w(0) = Q_N u0`` (and ``z(0) = -g_N`` if forcing given)."""
        z = None
        if forcing is not None:
            z = -project(steady_state_g(forcing, gamma), N, "high")
        return cls(project(u0, N, "low"), project(u0, N, "high"), N, z)


def linear_symbol(M: int, gamma: float) -> np.ndarray:
    """``i k^2 - gamma`` in centered order."""
    k = wavenumbers(M).astype(float)
    return 1j * k * k - gamma


def _linear(u: SpectralField, gamma: float) -> np.ndarray:
    return linear_symbol(u.M, gamma) * u.coeffs


def rhs_full(u: SpectralField, p: PhysParams) -> SpectralField:
    _same_grid(u, p.forcing)
    nl = cubic(u, p.pad).coeffs
    return SpectralField(_linear(u, p.gamma) - 1j * p.nonlin_sign * nl + p.forcing.coeffs)


def wick_lambda(u: SpectralField, pad: float = 2.0) -> SpectralField:
    """Wick-ordered cubic term ``|u|^2 u - (1/pi) ||u||^2 u``."""
    return cubic(u, pad) - (l2_norm_sq(u) / np.pi) * u


def wick_lambda_convolution(u: SpectralField) -> SpectralField:
    """Fourier-side form of the Wick term: non-resonant triads minus ``|c_k|^2 c_k``.

    Sums ``c_{k1} c_{k2} conj(c_{k3})`` over ``k1 + k2 - k3 = k`` with
    ``k3 not in {k1, k2}``.  O(M^3); reference implementation for tests.
    """
    M = u.M
    ks = wavenumbers(M)
    c = u.coeffs
    cc = np.conj(c)
    out = np.zeros(M, dtype=complex)
    for i1, k1 in enumerate(ks):
        if c[i1] == 0:
            continue
        for i2, k2 in enumerate(ks):
            if c[i2] == 0:
                continue
            kk = k1 + k2 - ks
            ok = (np.abs(kk) < M // 2) & (ks != k1) & (ks != k2)
            np.add.at(out, kk[ok] + M // 2, c[i1] * c[i2] * cc[ok])
    out -= np.abs(c) ** 2 * c
    out[0] = 0.0  # Nyquist outside the resolved band
    return SpectralField(out)


def modified_phase_rate(v: SpectralField, a: float, sign: int = 1) -> float:
    """Rate ``sign * (a - ||v||^2) / pi`` of the extra global phase in the modified equation."""
    return sign * (a - l2_norm_sq(v)) / np.pi


def rhs_modified(s: ModifiedState, p: PhysParams):
    """``(dv, da)`` for the modified equation with ``a`` driven by the limit energy law."""
    dv = rhs_full(s.v, p) - 1j * modified_phase_rate(s.v, s.a, p.nonlin_sign) * s.v
    da = -2.0 * p.gamma * s.a + 2.0 * inner(p.forcing, s.v).real
    return dv, da


def rhs_decomposition(s: DecompState, p: PhysParams):
    """``(dv, dw)`` for the coupled low/high system closed by ``u := v + w``."""
    _same_grid(s.v, p.forcing)
    N, sg = s.N, p.nonlin_sign
    cu = cubic(s.u, p.pad)
    cv = cubic(s.v, p.pad)
    dv = (_linear(s.v, p.gamma) + p.forcing.coeffs
          - 1j * sg * (project(cv, N, "high").coeffs + project(cu, N, "low").coeffs))
    dw = _linear(s.w, p.gamma) - 1j * sg * project(cu - cv, N, "high").coeffs
    return SpectralField(dv), SpectralField(dw)


def w_forcing_expanded(u: SpectralField, w: SpectralField, N: int, sign: int = 1,
                       pad: float = 2.0) -> SpectralField:
    """Nonlinear forcing of the high-frequency part with the cubic cross terms expanded.

    ``-i Q_N(|w|^2 w - 2|w|^2 u - w^2 conj(u)) - i Q_N(2|u|^2 w + u^2 conj(w))``;
    equals ``-i Q_N(|u|^2 u - |v|^2 v)`` for ``v = u - w``.
    """
    def prod(a, b, c):
        # a * b * conj(c)
        return cubic_product(a, b, c, (False, False, True), pad)

    first = prod(w, w, w) - 2 * prod(w, u, w) - prod(w, w, u)
    second = 2 * prod(u, w, u) + prod(u, u, w)
    return -1j * sign * project(first + second, N, "high")


def rhs_z(z: SpectralField, v: SpectralField, N: int, p: PhysParams) -> SpectralField:
    """``z_t = (i k^2 - gamma) z - i sign Q_N(|v|^2 v)`` for ``z = Q_N z``."""
    _same_grid(z, v)
    low = np.abs(z.k) <= N
    if np.any(z.coeffs[low] != 0):
        raise ValueError("z must have no Fourier content at |k| <= N")
    nl = project(cubic(v, p.pad), N, "high").coeffs
    return SpectralField(_linear(z, p.gamma) - 1j * p.nonlin_sign * nl)


def steady_state_g(f: SpectralField, gamma: float) -> SpectralField:
    """Steady state of the linear damped-driven flow: ``g(k) = f(k) / (gamma - i k^2)``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    return SpectralField(f.coeffs / (gamma - 1j * f.k.astype(float) ** 2))


def absorbing_radius(p: PhysParams) -> float:
    """``M0 = 2 ||f|| / gamma``."""
    return 2.0 * np.sqrt(l2_norm_sq(p.forcing)) / p.gamma


__all__ = [
    "PhysParams", "ModifiedState", "DecompState", "linear_symbol", "rhs_full", "wick_lambda",
    "wick_lambda_convolution", "rhs_modified", "rhs_decomposition", "w_forcing_expanded",
    "rhs_z", "steady_state_g", "absorbing_radius", "modified_phase_rate", "TWO_PI",
]

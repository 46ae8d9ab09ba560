"""Time integration of the full, modified and low/high-split equations.

The default scheme is Strang splitting ``L(dt/2) N(dt) L(dt/2)``:

* ``L`` solves ``u_t = (i k^2 - gamma) u + f`` exactly per mode (forcing via
  the Duhamel term), so damping and dispersion carry no time-step error;
* ``N`` solves ``u_t = -i sign |u|^2 u`` exactly pointwise on the padded
  grid, ``u(x) <- u(x) exp(-i sign |u(x)|^2 dt)``, and truncates back to the
  resolved band.

All stepping happens on coefficient arrays in numpy FFT order; fields are
converted to :class:`SpectralField` only when a sample is stored.  Sample
times are computed as ``t0 + step * dt`` from an absolute step counter so a
run resumed from a checkpoint reproduces the uninterrupted run bit for bit.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .equations import DecompState, ModifiedState, PhysParams, absorbing_radius
from .spectral import (
    GridSpec,
    SpectralField,
    TWO_PI,
    cubic_array,
    fft_wavenumbers,
    fsum_complex,
    fsum_real,
    from_physical_padded,
    to_physical_padded,
)

log = logging.getLogger(__name__)

METHODS = ("strang_split", "etd_rk2", "rk4_reference")
RHS_KINDS = ("full", "modified", "decomposition", "z")


class BlowUpError(RuntimeError):
    """Raised when a run leaves the region allowed by the a priori L2 bound."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


def default_dt(M: int) -> float:
    """``min(1e-3, 0.2 pi / M^2)``: keeps ``(M/2)^2 dt`` below ``pi/20``."""
    return min(1e-3, 0.1 * TWO_PI / M ** 2)


@dataclass(frozen=True)
class SchemeSpec:
    method: str = "strang_split"
    dt: float | None = None
    horizon: float = 1.0
    store_every: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.dt is not None and self.horizon < self.dt:
            raise ValueError(f"horizon {self.horizon} shorter than dt {self.dt}")
        if self.store_every < 1:
            raise ValueError("store_every must be >= 1")

    def resolved_dt(self, M: int) -> float:
        return self.dt if self.dt is not None else default_dt(M)

    def n_steps(self, M: int) -> int:
        dt = self.resolved_dt(M)
        n = self.horizon / dt
        return int(round(n)) if abs(n - round(n)) < 1e-6 else int(math.ceil(n))


@dataclass
class Trajectory:
    """Stored samples of a run; ``diagnostics[i]`` belongs to ``times[i]``."""

    kind: str
    dt: float
    times: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    states: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    @property
    def fields(self) -> list:
        """The physical field ``u`` of every sample (``v`` for modified, ``v + w`` for splits)."""
        return [state_field(s) for s in self.states]

    @property
    def final(self):
        return self.states[-1]

    def series(self, key: str) -> np.ndarray:
        return np.array([d[key] for d in self.diagnostics])


def state_field(state) -> SpectralField:
    if isinstance(state, SpectralField):
        return state
    if isinstance(state, ModifiedState):
        return state.v
    if isinstance(state, DecompState):
        return state.u
    raise TypeError(f"unsupported state type {type(state).__name__}")


# ---------------------------------------------------------------------------
# sub-steps


def phi1(z: np.ndarray) -> np.ndarray:
    """``(e^z - 1) / z`` without cancellation."""
    z = np.asarray(z, dtype=complex)
    return np.where(z == 0, 1.0, np.expm1(z) / np.where(z == 0, 1.0, z))


def phi2(z: np.ndarray) -> np.ndarray:
    """``(e^z - 1 - z) / z^2``; Taylor series for ``|z| < 0.1``."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.1
    zs = np.where(small, z, 0.0)
    series = np.zeros_like(zs)
    term = np.full_like(zs, 0.5)
    for n in range(2, 16):
        series += term
        term = term * zs / (n + 1)
    zb = np.where(small, 1.0, z)
    direct = (np.expm1(zb) - zb) / (zb * zb)
    return np.where(small, series, direct)


class _Kernel:
    """Per-mode multipliers for a fixed grid, parameter set and step."""

    def __init__(self, M: int, p: PhysParams, dt: float):
        self.M = M
        self.P = GridSpec(M, 0, p.pad).padded_size
        self.dt = dt
        self.sign = p.nonlin_sign
        self.gamma = p.gamma
        k = fft_wavenumbers(M).astype(float)
        self.k = k
        self.L = 1j * k * k - p.gamma
        self.f = p.forcing.fft_order()
        self.E_half = np.exp(self.L * (dt / 2))
        self.D_half = self.f * np.expm1(self.L * (dt / 2)) / self.L

    def half_linear(self, c, forcing=True):
        if forcing:
            return self.E_half * c + self.D_half
        return self.E_half * c

    def nonlinear(self, c, dt, extra_phase=0.0):
        if self.sign == 0:
            return c
        vals = pointwise_phase(to_physical_padded(c, self.P), dt, self.sign, extra_phase)
        return from_physical_padded(vals, self.M)

    def cubic(self, c):
        return cubic_array(c, self.P)


def linear_step(u: SpectralField, dt: float, p: PhysParams, with_forcing: bool = True) -> SpectralField:
    """Exact flow of ``u_t = (i k^2 - gamma) u + f`` over ``dt`` (forcing optional)."""
    k = u.k.astype(float)
    L = 1j * k * k - p.gamma
    E = np.exp(L * dt)
    out = E * u.coeffs
    if with_forcing:
        out = out + p.forcing.coeffs * np.expm1(L * dt) / L
    return SpectralField(out)


def pointwise_phase(values: np.ndarray, dt: float, sign: int = 1, extra_phase: float = 0.0) -> np.ndarray:
    """``u(x_j) exp(-i (sign |u(x_j)|^2 dt + extra_phase))``; keeps ``|u(x_j)|`` at every point."""
    phase = sign * dt * (values.real ** 2 + values.imag ** 2)
    if extra_phase:
        phase = phase + extra_phase
    return values * np.exp(-1j * phase)


def nonlinear_step(u: SpectralField, dt: float, sign: int = 1, pad: float = 2.0) -> SpectralField:
    """Exact pointwise flow of ``u_t = -i sign |u|^2 u`` on the padded grid, truncated."""
    if sign == 0:
        return u
    P = GridSpec(u.M, 0, pad).padded_size
    vals = pointwise_phase(to_physical_padded(u.fft_order(), P), dt, sign)
    return SpectralField.from_fft_order(from_physical_padded(vals, u.M))


def _l2sq(c) -> float:
    return TWO_PI * fsum_real(c.real ** 2 + c.imag ** 2)


def _re_inner(f, c) -> float:
    return TWO_PI * fsum_complex(c * np.conj(f)).real


# ---------------------------------------------------------------------------
# steppers: each maps an array-level state tuple one step forward


class _FullStepper:
    def __init__(self, kern: _Kernel, method: str):
        self.kern = kern
        self.method = method
        if method == "etd_rk2":
            z = kern.L * kern.dt
            self.E = np.exp(z)
            self.p1 = phi1(z) * kern.dt
            self.p2 = phi2(z) * kern.dt

    def _N(self, c):
        return -1j * self.kern.sign * self.kern.cubic(c) + self.kern.f

    def step(self, state, t):
        (c,) = state
        kern = self.kern
        if self.method == "strang_split":
            c = kern.half_linear(c)
            c = kern.nonlinear(c, kern.dt)
            c = kern.half_linear(c)
        elif self.method == "etd_rk2":
            n0 = self._N(c)
            a = self.E * c + self.p1 * n0
            c = a + self.p2 * (self._N(a) - n0)
        else:
            dt = kern.dt

            def rhs(x):
                return kern.L * x + self._N(x)

            k1 = rhs(c)
            k2 = rhs(c + 0.5 * dt * k1)
            k3 = rhs(c + 0.5 * dt * k2)
            k4 = rhs(c + dt * k3)
            c = c + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        return (c,)


class _ModifiedStepper:
    """Strang step for ``(v, a)``; ``a`` is either ODE-driven or read from ``a_func``.

    With the ODE, ``a`` moves only in the linear sub-steps, where the exact
    flow gives ``(a - ||v||^2)' = -2 gamma (a - ||v||^2)``.  So ``a`` is set to
    ``||v_new||^2 + e^{-gamma dt}(a - ||v_old||^2)`` across each half step,
    which is the integrating-factor solution with the forcing integral taken
    from the linear flow itself.  The nonlinear sub-step changes neither.
    """

    def __init__(self, kern: _Kernel, a_func: Callable[[float], float] | None):
        self.kern = kern
        self.a_func = a_func
        self.e_half = math.exp(-kern.gamma * kern.dt)

    def _half(self, c, a):
        before = _l2sq(c)
        c = self.kern.half_linear(c)
        after = _l2sq(c)
        return c, after + self.e_half * (a - before), after

    def step(self, state, t):
        c, a = state
        kern = self.kern
        dt = kern.dt
        c, a_mid, norm_mid = self._half(c, a)
        if self.a_func is not None:
            a_mid = float(self.a_func(t + dt / 2))
        phase = kern.sign * (a_mid - norm_mid) * dt / np.pi
        c = kern.nonlinear(c, dt, extra_phase=phase)
        if self.a_func is None:
            c, a_new, _ = self._half(c, a_mid)
        else:
            c = kern.half_linear(c)
            a_new = float(self.a_func(t + dt))
        return (c, max(a_new, 0.0))


class _DecompStepper:
    """Strang step for ``(v, w, z)``; the nonlinear sub-flow is advanced by classical RK4."""

    def __init__(self, kern: _Kernel, N: int):
        self.kern = kern
        self.high = np.abs(kern.k) > N

    def _nl(self, v, w):
        kern, high = self.kern, self.high
        cu = kern.cubic(v + w)
        cv = kern.cubic(v)
        s = -1j * kern.sign
        dv = s * np.where(high, cv, cu)
        dw = s * np.where(high, cu - cv, 0)
        dz = s * np.where(high, cv, 0)
        return dv, dw, dz

    def step(self, state, t):
        v, w, z = state
        kern = self.kern
        dt = kern.dt
        v = kern.half_linear(v)
        w = kern.half_linear(w, forcing=False)
        z = kern.half_linear(z, forcing=False)
        a1 = self._nl(v, w)
        a2 = self._nl(v + 0.5 * dt * a1[0], w + 0.5 * dt * a1[1])
        a3 = self._nl(v + 0.5 * dt * a2[0], w + 0.5 * dt * a2[1])
        a4 = self._nl(v + dt * a3[0], w + dt * a3[1])
        v, w, z = (x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                   for x, k1, k2, k3, k4 in zip((v, w, z), a1, a2, a3, a4))
        v = kern.half_linear(v)
        w = kern.half_linear(w, forcing=False)
        z = kern.half_linear(z, forcing=False)
        return (v, w, z)


# ---------------------------------------------------------------------------


def _pack(state, kind, p: PhysParams, gamma=None):
    M = p.M
    if kind == "full":
        if not isinstance(state, SpectralField):
            raise TypeError("rhs_kind 'full' needs a SpectralField initial state")
        if state.M != M:
            raise ValueError(f"incompatible grids: state M={state.M}, forcing M={M}")
        return (_resolved(state.fft_order()),)
    if kind == "modified":
        if not isinstance(state, ModifiedState):
            raise TypeError("rhs_kind 'modified' needs a ModifiedState initial state")
        if state.v.M != M:
            raise ValueError("incompatible grids")
        return (_resolved(state.v.fft_order()), float(state.a))
    if not isinstance(state, DecompState):
        raise TypeError(f"rhs_kind {kind!r} needs a DecompState initial state")
    if state.v.M != M:
        raise ValueError("incompatible grids")
    z = state.z
    if z is None:
        from .equations import steady_state_g
        from .spectral import project
        z = -project(steady_state_g(p.forcing, p.gamma), state.N, "high")
    return tuple(_resolved(x.fft_order()) for x in (state.v, state.w, z))


def _resolved(c):
    c[c.size // 2] = 0.0  # Nyquist lies outside the resolved band
    return c


def _unpack(arrs, kind, template):
    if kind == "full":
        return SpectralField.from_fft_order(arrs[0])
    if kind == "modified":
        return ModifiedState(SpectralField.from_fft_order(arrs[0]), float(arrs[1]))
    v, w, z = (SpectralField.from_fft_order(x) for x in arrs)
    return DecompState(v, w, template.N, z)


def _record(arrs, kind, p: PhysParams):
    if kind == "full":
        return {"l2_sq": _l2sq(arrs[0])}
    if kind == "modified":
        l2 = _l2sq(arrs[0])
        return {"l2_sq": l2, "a": arrs[1], "gap": arrs[1] - l2}
    v, w, z = arrs
    return {"l2_sq": _l2sq(v + w), "v_l2_sq": _l2sq(v), "w_l2_sq": _l2sq(w), "z_l2_sq": _l2sq(z)}


def integrate(initial, p: PhysParams, scheme: SchemeSpec, rhs_kind: str = "full", *,
              t0: float = 0.0, step0: int = 0, a_func: Callable[[float], float] | None = None,
              guard_scale: float | None = None, on_sample: Callable | None = None) -> Trajectory:
    """Integrate ``initial`` over ``scheme.horizon`` and return the stored samples.

    ``rhs_kind`` is one of ``full`` (SpectralField), ``modified`` (ModifiedState),
    ``decomposition`` or ``z`` (DecompState; both carry ``z`` along).
    Samples are stored when the absolute step index ``step0 + n`` is a multiple
    of ``store_every`` and always at the final step.  ``a_func`` supplies a
    tabulated ``a(t)`` for the modified equation instead of the ODE for ``a``.
    """
    if rhs_kind not in RHS_KINDS:
        raise ValueError(f"unknown rhs_kind {rhs_kind!r}; expected one of {RHS_KINDS}")
    kind = "decomposition" if rhs_kind == "z" else rhs_kind
    if scheme.method != "strang_split" and kind != "full":
        raise ValueError(f"method {scheme.method!r} supports rhs_kind 'full' only")
    M = p.M
    dt = scheme.resolved_dt(M)
    kern = _Kernel(M, p, dt)
    if kind == "full":
        stepper = _FullStepper(kern, scheme.method)
    elif kind == "modified":
        stepper = _ModifiedStepper(kern, a_func)
    else:
        stepper = _DecompStepper(kern, initial.N)

    arrs = _pack(initial, kind, p)
    if guard_scale is None:
        guard_scale = max(math.sqrt(_l2sq(arrs[0] if kind != "decomposition" else arrs[0] + arrs[1])),
                          absorbing_radius(p), 1e-300)
    limit = 1e6 * guard_scale
    traj = Trajectory(kind=rhs_kind, dt=dt)
    n_steps = scheme.n_steps(M)
    every = scheme.store_every

    def store(step):
        t = t0 + step * dt
        rec = _record(arrs, kind, p)
        if not math.isfinite(rec["l2_sq"]) or math.sqrt(rec["l2_sq"]) > limit:
            raise BlowUpError(
                f"norm {math.sqrt(rec['l2_sq']) if math.isfinite(rec['l2_sq']) else rec['l2_sq']} "
                f"exceeds guard {limit:.3g} at t={t:.6g}", traj)
        rec["t"] = t
        state = _unpack([x.copy() if isinstance(x, np.ndarray) else x for x in arrs], kind, initial)
        traj.times.append(t)
        traj.steps.append(step)
        traj.states.append(state)
        traj.diagnostics.append(rec)
        if on_sample is not None:
            on_sample(step, t, state)

    store(step0)
    last = step0 + n_steps
    for step in range(step0, last):
        arrs = stepper.step(arrs, t0 + step * dt)
        if (step + 1) % every == 0 or step + 1 == last:
            store(step + 1)
    log.debug("integrated %d steps of %s (%s), dt=%g", n_steps, rhs_kind, scheme.method, dt)
    return traj


def tabulated(times, values) -> Callable[[float], float]:
    """Piecewise-linear ``a(t)`` from samples, e.g. an ensemble average of ``||u_n(t)||^2``."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    return lambda t: float(np.interp(t, times, values))

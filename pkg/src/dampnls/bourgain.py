"""Discrete space-time surrogates: X^{b,s} norms, the L^4 ratio, resonance bookkeeping
and the high-frequency damping scaling of the trilinear term.

Time frequencies are measured in the interaction picture: a lattice field
``U(t, k)`` is first multiplied by ``exp(-i k^2 t)``, which undoes the free
linear flow ``u_t = i k^2 u``.  The dual variable ``sigma`` then measures the
distance from the free dispersion relation directly, and the weight is
``<sigma>^b <k>^s``.  Free evolutions sit exactly at ``sigma = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.signal.windows import tukey

from .spectral import TWO_PI, japanese_bracket, pad_spectrum, wavenumbers

DEFAULT_EPS = 1.0 / 16.0


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Samples ``U(t_m, k)`` with ``t_m = m T / L`` over the window ``[0, T)``.

    ``values`` has shape ``(L, M)``; columns are centered spatial Fourier
    coefficients.  ``taper`` records the Tukey fraction applied at construction.
    """

    values: np.ndarray
    window: float
    taper: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.ndim != 2:
            raise ValueError("values must be 2-D (time, wavenumber)")
        L, M = v.shape
        if L < 2 or L % 2 or M < 2 or M % 2:
            raise ValueError(f"L and M must be even and >= 2, got L={L}, M={M}")
        if not np.all(np.isfinite(v)):
            raise ValueError("space-time field has non-finite values")
        if not self.window > 0:
            raise ValueError(f"window must be > 0, got {self.window}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def L(self) -> int:
        return self.values.shape[0]

    @property
    def M(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.L) * (self.window / self.L)

    @property
    def dt(self) -> float:
        return self.window / self.L

    def dual_frequencies(self) -> np.ndarray:
        """``sigma_j = (2 pi / T) j`` for ``j = -L/2 .. L/2 - 1``."""
        return (TWO_PI / self.window) * np.arange(-self.L // 2, self.L // 2)

    def __mul__(self, c):
        return SpaceTimeField(self.values * c, self.window, self.taper)

    __rmul__ = __mul__

    def __add__(self, other: "SpaceTimeField"):
        if other.values.shape != self.values.shape or other.window != self.window:
            raise ValueError("space-time fields live on different lattices")
        return SpaceTimeField(self.values + other.values, self.window, self.taper)

    @classmethod
    def from_samples(cls, values, window: float, taper: float = 0.0) -> "SpaceTimeField":
        """Wrap samples, multiplying by a Tukey (cosine-taper) window of fraction ``taper``."""
        v = np.asarray(values, dtype=np.complex128)
        if not 0.0 <= taper <= 1.0:
            raise ValueError(f"taper fraction must lie in [0, 1], got {taper}")
        if taper > 0:
            # sym=False: periodic window, matching the half-open sample grid
            v = v * tukey(v.shape[0], taper, sym=False)[:, None]
        return cls(v, window, taper)

    @classmethod
    def free_evolution(cls, phi_coeffs, L: int, window: float, taper: float = 0.0):
        """Samples of the free flow ``exp(i k^2 t) phi(k)``."""
        phi = np.asarray(phi_coeffs, dtype=np.complex128)
        k = wavenumbers(phi.size).astype(float)
        t = np.arange(L) * (window / L)
        return cls.from_samples(np.exp(1j * np.outer(t, k * k)) * phi, window, taper)

    @classmethod
    def from_interaction_spectrum(cls, W_hat, window: float) -> "SpaceTimeField":
        """Field whose interaction-picture time spectrum is ``W_hat[j, k]`` (``sigma`` centered)."""
        W_hat = np.asarray(W_hat, dtype=np.complex128)
        L, M = W_hat.shape
        W = np.fft.ifft(np.fft.ifftshift(W_hat, axes=0), axis=0) * L
        t = np.arange(L) * (window / L)
        k = wavenumbers(M).astype(float)
        return cls(np.exp(1j * np.outer(t, k * k)) * W, window)


def interaction_spectrum(F: SpaceTimeField) -> np.ndarray:
    """``W_hat(sigma_j, k) = (1/L) sum_m exp(-i k^2 t_m) U(t_m, k) exp(-i sigma_j t_m)``, sigma centered."""
    k = wavenumbers(F.M).astype(float)
    W = np.exp(-1j * np.outer(F.times, k * k)) * F.values
    return np.fft.fftshift(np.fft.fft(W, axis=0), axes=0) / F.L


def xbs_norm(F: SpaceTimeField, b: float, s: float) -> float:
    """Windowed surrogate of ``|| <sigma>^b <k>^s W_hat ||_{L^2 l^2}``.

    Normalized so that ``b = s = 0`` gives ``sqrt(dt sum_m ||u(t_m)||^2)``.
    """
    W_hat = interaction_spectrum(F)
    w = (japanese_bracket(F.dual_frequencies())[:, None] ** (2 * b)
         * japanese_bracket(wavenumbers(F.M))[None, :] ** (2 * s))
    total = math.fsum((w * (W_hat.real ** 2 + W_hat.imag ** 2)).ravel())
    return math.sqrt(F.window * TWO_PI * total)


def spacetime_l2(F: SpaceTimeField) -> float:
    """``sqrt(dt sum_m ||u(t_m)||^2)`` with the true-integral spatial norm."""
    a = F.values
    return math.sqrt(F.dt * TWO_PI * math.fsum((a.real ** 2 + a.imag ** 2).ravel()))


def l4_norm(F: SpaceTimeField) -> float:
    """``(dt sum_m int |u(t_m, x)|^4 dx)^{1/4}``.

    The spatial integral is exact: ``|u|^4`` has bandwidth below ``2M`` and
    is summed on a ``2M`` point grid.
    """
    P = 2 * F.M
    c_fft = np.fft.ifftshift(F.values, axes=1)
    phys = np.stack([np.fft.ifft(pad_spectrum(row, P)) * P for row in c_fft])
    q = (phys.real ** 2 + phys.imag ** 2) ** 2
    return (F.dt * (TWO_PI / P) * math.fsum(q.ravel())) ** 0.25


def l4_ratio(F: SpaceTimeField) -> float:
    """``||F||_{L^4} / ||F||_{X^{3/8,0}}`` on the lattice."""
    den = xbs_norm(F, 3.0 / 8.0, 0.0)
    if den == 0.0:
        raise ValueError("l4_ratio of the zero field")
    return l4_norm(F) / den


# ---------------------------------------------------------------- resonance

def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def resonance_factor(k1: int, k2: int, k3: int, tau_terms):
    """Both sides of ``sigma - sigma1 - sigma2 - sigma3~ = 2 (k3 + k1)(k3 + k2)``.

    ``tau_terms`` is ``(tau1, tau2, tau3)`` or ``(tau, tau1, tau2, tau3)`` with
    ``tau = tau1 + tau2 + tau3``; ``k = k1 + k2 + k3``, ``sigma = tau + k^2``,
    ``sigma_i = tau_i + k_i^2`` (i = 1, 2) and ``sigma3~ = tau3 - k3^2``.
    Evaluated in exact rational arithmetic; returns ``(lhs, rhs)``.
    """
    for kk in (k1, k2, k3):
        if int(kk) != kk:
            raise ValueError("wavenumbers must be integers")
    k1, k2, k3 = int(k1), int(k2), int(k3)
    taus = [_frac(x) for x in tau_terms]
    if len(taus) == 3:
        t1, t2, t3 = taus
        tau = t1 + t2 + t3
    elif len(taus) == 4:
        tau, t1, t2, t3 = taus
        if tau != t1 + t2 + t3:
            raise ValueError("tau must equal tau1 + tau2 + tau3")
    else:
        raise ValueError("tau_terms needs 3 or 4 entries")
    k = k1 + k2 + k3
    sigma = tau + k * k
    s1 = t1 + k1 * k1
    s2 = t2 + k2 * k2
    s3 = t3 - k3 * k3
    lhs = sigma - s1 - s2 - s3
    rhs = Fraction(2 * (k3 + k1) * (k3 + k2))
    return lhs, rhs


def modulus_bound(k1: int, k2: int, k3: int) -> int:
    """``|2 (k3 + k1)(k3 + k2)|``; the largest of the four modulations is at least a quarter of it."""
    return abs(2 * (int(k3) + int(k1)) * (int(k3) + int(k2)))


def resonance_sweep(n: int, seed: int, kmax: int = 10 ** 4):
    """Evaluate the resonance identity on ``n`` random triples with random dyadic-rational taus."""
    rng = np.random.default_rng(seed)
    ks = rng.integers(-kmax, kmax + 1, size=(n, 3))
    taus = rng.uniform(-1e6, 1e6, size=(n, 3))
    bad = []
    for (k1, k2, k3), t in zip(ks.tolist(), taus.tolist()):
        lhs, rhs = resonance_factor(k1, k2, k3, t)
        if lhs != rhs:
            bad.append([k1, k2, k3])
    return bad


# ---------------------------------------------------------------- random trials

def random_interaction_spectrum(rng: np.random.Generator, M: int, L: int, window: float,
                                support: np.ndarray, b_weight: float = 0.5,
                                s_weight: float = 0.0) -> np.ndarray:
    """Complex Gaussian ``W_hat[j, k] / (<sigma_j>^{b_weight} <k>^{s_weight})`` on ``support``."""
    sig = (TWO_PI / window) * np.arange(-L // 2, L // 2)
    g = rng.standard_normal((L, M)) + 1j * rng.standard_normal((L, M))
    g /= japanese_bracket(sig)[:, None] ** b_weight
    g /= japanese_bracket(wavenumbers(M))[None, :] ** s_weight
    g[:, ~np.asarray(support, dtype=bool)] = 0.0
    return g


def _xbs_from_spectrum(W_hat, window, b) -> float:
    L = W_hat.shape[0]
    sig = (TWO_PI / window) * np.arange(-L // 2, L // 2)
    w = japanese_bracket(sig)[:, None] ** (2 * b)
    return math.sqrt(window * TWO_PI * float(np.sum(w * np.abs(W_hat) ** 2)))


@dataclass
class L4Ensemble:
    M: int
    L: int
    ratios: np.ndarray

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max())


def l4_ensemble(M: int, L: int, trials: int, seed: int, window: float = TWO_PI) -> L4Ensemble:
    """L^4 ratios of random fields with spectrum ``~ <sigma>^{-1} <k>^{-1}``.

    The decay makes the ensemble comparable across lattice resolutions.
    """
    seeds = np.random.SeedSequence(seed).spawn(trials)
    full = np.ones(M, dtype=bool)
    full[0] = False  # Nyquist
    out = np.empty(trials)
    for i, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        W_hat = random_interaction_spectrum(rng, M, L, window, full, 1.0, 1.0)
        out[i] = l4_ratio(SpaceTimeField.from_interaction_spectrum(W_hat, window))
    return L4Ensemble(M, L, out)


# ---------------------------------------------------------------- trilinear damping

@dataclass
class _TripleTable:
    """Triples ``(k1, k2, k3)`` with ``|k1|, |k2| <= N/2 < N < |k3| < M/2``, grouped by output ``k1 + k2 - k3``."""

    N: int
    groups: list  # (i1, i2, i3, omega) index arrays per output wavenumber


def _triple_table(M: int, N: int) -> _TripleTable:
    k = wavenumbers(M)
    low = np.flatnonzero(np.abs(k) <= N // 2)
    high = np.flatnonzero((np.abs(k) > N) & (np.abs(k) < M // 2))
    i1, i2, i3 = (a.ravel() for a in np.meshgrid(low, low, high, indexing="ij"))
    k1, k2, k3 = k[i1], k[i2], k[i3]
    kout = k1 + k2 - k3
    # phase of the product relative to the free flow at the output wavenumber
    omega = 2 * (k3 - k1) * (k3 - k2)
    order = np.argsort(kout, kind="stable")
    kout, i1, i2, i3, omega = kout[order], i1[order], i2[order], i3[order], omega[order]
    cuts = np.flatnonzero(np.diff(kout)) + 1
    groups = [(a, b, c, o) for a, b, c, o in zip(np.split(i1, cuts), np.split(i2, cuts),
                                                np.split(i3, cuts), np.split(omega, cuts))]
    return _TripleTable(N, groups)


def _time_samples(W_hat: np.ndarray, Lt: int) -> np.ndarray:
    """Interaction-picture samples ``W(t_m, k)`` on ``Lt`` points of ``[0, 2 pi)`` (integer sigma)."""
    L = W_hat.shape[0]
    sig = np.arange(-L // 2, L // 2)
    t = np.arange(Lt) * (TWO_PI / Lt)
    return np.exp(1j * np.outer(t, sig)) @ W_hat


def trilinear_norm(W1, W2, W3, table: _TripleTable, b: float, Lt: int) -> float:
    """``|| u1 u2 conj(u3) ||_{X^{b,0}}`` for periodic fields on ``T = 2 pi`` given by integer-sigma spectra.

    The product is summed triple by triple in the interaction picture, so
    no time aliasing of the large free phases occurs; the output is not
    truncated in ``k``.
    """
    L = W1.shape[0]
    if Lt < 3 * L:
        raise ValueError("Lt must be at least 3 L to resolve the product's time spectrum")
    s = np.fft.fftfreq(Lt, 1.0 / Lt).astype(np.int64)
    a1, a2, a3 = _time_samples(W1, Lt), _time_samples(W2, Lt), np.conj(_time_samples(W3, Lt))
    total = []
    for i1, i2, i3, omega in table.groups:
        coef = np.fft.fft(a1[:, i1] * a2[:, i2] * a3[:, i3], axis=0) / Lt
        sig = (s[:, None] - omega[None, :]).ravel()
        lo = sig.min()
        key = sig - lo
        acc_re = np.bincount(key, weights=coef.real.ravel())
        acc_im = np.bincount(key, weights=coef.imag.ravel())
        sig_axis = np.arange(lo, lo + acc_re.size, dtype=float)
        total.append(float(np.sum(japanese_bracket(sig_axis) ** (2 * b) * (acc_re ** 2 + acc_im ** 2))))
    return math.sqrt(TWO_PI * TWO_PI * math.fsum(total))


@dataclass
class DampingReport:
    N_list: list
    ratios: np.ndarray          # (len(N_list), trials)
    slope: float
    eps: float
    records: list = field(default_factory=list)

    def to_records(self) -> list:
        return list(self.records)


def damping_scaling(N_list, trials: int, rng_seed: int, M: int = 256, eps: float = DEFAULT_EPS,
                    L_tau: int = 8, Lt: int | None = None) -> DampingReport:
    """Ensemble scaling of ``||P u1 P u2 conj(Q_N u3)||_{X^{-1/2+eps,0}}`` with unit ``X^{1/2,0}`` factors.

    Each factor is drawn on its own frequency band (``|k| <= N/2`` for u1, u2;
    ``N < |k| < M/2`` for u3) with ``L_tau`` integer time modes on ``T = 2 pi``
    and normalized after projection.  The same trial seeds are reused for
    every ``N``.  The slope is the least-squares fit of log median ratio
    against log N.
    """
    N_list = [int(n) for n in N_list]
    if len(N_list) < 3:
        raise ValueError("need at least 3 cutoffs to fit a slope")
    for N in N_list:
        if not 2 <= N < M // 2:
            raise ValueError(f"cutoff {N} outside the lattice band (M={M})")
    Lt = Lt or 3 * L_tau
    k = wavenumbers(M)
    seeds = np.random.SeedSequence(rng_seed).spawn(trials)
    ratios = np.zeros((len(N_list), trials))
    for a, N in enumerate(N_list):
        table = _triple_table(M, N)
        low = np.abs(k) <= N // 2
        high = (np.abs(k) > N) & (np.abs(k) < M // 2)
        for j, ss in enumerate(seeds):
            rng = np.random.default_rng(ss)
            Ws = []
            for supp in (low, low, high):
                W = random_interaction_spectrum(rng, M, L_tau, TWO_PI, supp, 0.5)
                Ws.append(W / _xbs_from_spectrum(W, TWO_PI, 0.5))
            ratios[a, j] = trilinear_norm(*Ws, table, -0.5 + eps, Lt)
    med = np.median(ratios, axis=1)
    slope = float(np.polyfit(np.log(N_list), np.log(med), 1)[0])
    records = [{"N": N, "median_ratio": float(m), "max_ratio": float(r.max()), "slope": slope}
               for N, m, r in zip(N_list, med, ratios)]
    return DampingReport(N_list, ratios, slope, eps, records)


__all__ = [
    "SpaceTimeField", "interaction_spectrum", "xbs_norm", "spacetime_l2", "l4_norm", "l4_ratio",
    "resonance_factor", "modulus_bound", "resonance_sweep", "random_interaction_spectrum", "l4_ensemble",
    "L4Ensemble", "trilinear_norm", "damping_scaling", "DampingReport", "DEFAULT_EPS",
]

"""Fourier-collocation fields on the 2*pi torus.

A :class:`SpectralField` stores the coefficients ``c_k`` of a periodic
complex function ``u(x) = sum_k c_k exp(i k x)`` for the ``M`` integer
wavenumbers ``k = -M/2, ..., M/2 - 1`` in centered order.  The forward
transform follows the continuum convention

    c_k = (1 / 2 pi) * integral_T exp(-i k x) u(x) dx

discretized on ``x_j = 2 pi j / M``, so ``c_k = (1/M) sum_j u(x_j) exp(-i k x_j)``.

Norms are the true integral norms on the torus, i.e.
``||u||^2 = integral_T |u|^2 dx = 2 pi sum_k |c_k|^2``.  This differs by a
factor ``sqrt(2 pi)`` from the plain l2 norm of the coefficient sequence.

The Nyquist mode ``k = -M/2`` is stored (so the transform pair is an exact
bijection) but it is outside the *resolved band* ``|k| < M/2``: dealiased
products never populate it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


def fsum_real(values) -> float:
    """Compensated (exactly rounded) sum of a real array."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


def fsum_complex(values) -> complex:
    values = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))


def wavenumbers(M: int) -> np.ndarray:
    """Integer wavenumbers in centered order, ``-M/2 .. M/2-1``."""
    return np.arange(-(M // 2), M - M // 2)


def fft_wavenumbers(M: int) -> np.ndarray:
    """Integer wavenumbers in numpy FFT order."""
    return np.fft.fftfreq(M, d=1.0 / M).round().astype(int)


def grid_points(M: int) -> np.ndarray:
    return TWO_PI * np.arange(M) / M


def _check_M(M: int) -> None:
    if M <= 0 or M % 2:
        raise ValueError(f"grid size M must be an even positive integer, got {M}")


@dataclass(frozen=True)
class GridSpec:
    """Grid size ``M``, projection cutoff ``N`` and dealiasing pad factor."""

    M: int
    N: int = 0
    dealias_pad: float = 2.0

    def __post_init__(self):
        _check_M(self.M)
        if not 0 <= self.N < self.M // 2:
            raise ValueError(
                f"cutoff exceeds resolved band: need 0 <= N < M/2 = {self.M // 2}, got N={self.N}"
            )
        if self.dealias_pad < 2:
            raise ValueError(f"dealias_pad must be >= 2 for cubic products, got {self.dealias_pad}")
        padded = self.dealias_pad * self.M
        if abs(padded - round(padded)) > 1e-9 or round(padded) % 2:
            raise ValueError(f"dealias_pad * M must be an even integer, got {padded}")

    @property
    def padded_size(self) -> int:
        return int(round(self.dealias_pad * self.M))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex Fourier coefficients of a 2*pi-periodic function (centered order)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim != 1:
            raise ValueError("coeffs must be one-dimensional")
        _check_M(c.size)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def M(self) -> int:
        return self.coeffs.size

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.M)

    @classmethod
    def zeros(cls, M: int) -> "SpectralField":
        return cls(np.zeros(M, dtype=complex))

    @classmethod
    def from_modes(cls, M: int, modes) -> "SpectralField":
        """Build a field from ``{k: amplitude}`` or an iterable of ``(k, amplitude)``."""
        items = modes.items() if isinstance(modes, dict) else modes
        c = np.zeros(M, dtype=complex)
        for k, amp in items:
            k = int(k)
            if not -(M // 2) <= k < M // 2:
                raise ValueError(f"wavenumber {k} outside grid of size {M}")
            c[k + M // 2] += amp
        return cls(c)

    @classmethod
    def from_fft_order(cls, arr) -> "SpectralField":
        return cls(np.fft.fftshift(np.asarray(arr)))

    def fft_order(self) -> np.ndarray:
        """Writable copy of the coefficients in numpy FFT order."""
        return np.fft.ifftshift(self.coeffs).copy()

    def mode(self, k: int) -> complex:
        return complex(self.coeffs[k + self.M // 2])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))

    def __add__(self, other):
        _same_grid(self, other)
        return SpectralField(self.coeffs + other.coeffs)

    def __sub__(self, other):
        _same_grid(self, other)
        return SpectralField(self.coeffs - other.coeffs)

    def __neg__(self):
        return SpectralField(-self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            return NotImplemented
        return SpectralField(self.coeffs * scalar)

    __rmul__ = __mul__

    def conj(self) -> "SpectralField":
        """Coefficients of the complex conjugate function ``conj(u(x))``."""
        c = np.conj(self.coeffs)
        out = np.zeros_like(c)
        # conj(u) has coefficient conj(c_{-k}) at k; the Nyquist mode maps to itself
        out[1:] = c[1:][::-1]
        out[0] = c[0]
        return SpectralField(out)

    def __eq__(self, other):
        if not isinstance(other, SpectralField):
            return NotImplemented
        return self.M == other.M and bool(np.array_equal(self.coeffs, other.coeffs))

    def __repr__(self):
        return f"SpectralField(M={self.M}, l2={l2_norm(self):.6g})"


def _same_grid(*fields: SpectralField) -> None:
    sizes = {f.M for f in fields}
    if len(sizes) != 1:
        raise ValueError(f"incompatible grids: sizes {sorted(sizes)}")


def transform_forward(samples) -> SpectralField:
    """Coefficients of the trigonometric interpolant of ``samples`` at ``x_j = 2 pi j / M``."""
    samples = np.asarray(samples, dtype=np.complex128)
    if samples.ndim != 1:
        raise ValueError("samples must be one-dimensional")
    _check_M(samples.size)
    if not np.all(np.isfinite(samples)):
        bad = np.flatnonzero(~np.isfinite(samples))
        raise ValueError(f"non-finite samples at indices {bad[:8].tolist()}")
    return SpectralField.from_fft_order(np.fft.fft(samples) / samples.size)


def transform_inverse(field: SpectralField) -> np.ndarray:
    """Point values ``u(x_j)`` of the field on its own collocation grid."""
    return np.fft.ifft(field.fft_order()) * field.M


def project(field: SpectralField, N: int, part: str = "low") -> SpectralField:
    """``P_N`` (``part='low'``, keeps ``|k| <= N``) or ``Q_N`` (``'high'``, keeps ``|k| > N``)."""
    if not 0 <= N < field.M // 2:
        raise ValueError(f"cutoff exceeds resolved band: N={N}, M/2={field.M // 2}")
    low = np.abs(field.k) <= N
    if part == "low":
        mask = low
    elif part == "high":
        mask = ~low
    else:
        raise ValueError(f"part must be 'low' or 'high', got {part!r}")
    return SpectralField(np.where(mask, field.coeffs, 0))


def japanese_bracket(k) -> np.ndarray:
    """``<k> = (1 + |k|^2)^{1/2}``."""
    k = np.asarray(k, dtype=float)
    return np.sqrt(1.0 + k * k)


def sobolev_norm(field: SpectralField, s: float = 0.0) -> float:
    """``||u||_{H^s} = (2 pi sum_k <k>^{2s} |c_k|^2)^{1/2}``; ``s=0`` is the L2 integral norm."""
    weights = (1.0 + field.k.astype(float) ** 2) ** s
    return math.sqrt(TWO_PI * fsum_real(weights * np.abs(field.coeffs) ** 2))


def l2_norm(field: SpectralField) -> float:
    return sobolev_norm(field, 0.0)


def l2_norm_sq(field: SpectralField) -> float:
    return TWO_PI * fsum_real(np.abs(field.coeffs) ** 2)


def inner(u: SpectralField, phi: SpectralField) -> complex:
    """``(u, phi) = integral_T u conj(phi) dx = 2 pi sum_k c_k conj(d_k)``."""
    _same_grid(u, phi)
    return TWO_PI * fsum_complex(u.coeffs * np.conj(phi.coeffs))


# ---------------------------------------------------------------------------
# dealiased products, array level (numpy FFT order)


def pad_spectrum(c_fft: np.ndarray, P: int) -> np.ndarray:
    """Zero-pad an FFT-ordered spectrum of size M to size P (Nyquist kept as ``k=-M/2``)."""
    M = c_fft.shape[-1]
    out = np.zeros(c_fft.shape[:-1] + (P,), dtype=np.complex128)
    h = M // 2
    out[..., :h] = c_fft[..., :h]
    out[..., P - h:] = c_fft[..., h:]
    return out


def truncate_spectrum(c_fft: np.ndarray, M: int) -> np.ndarray:
    """Keep the resolved band ``|k| < M/2`` of an FFT-ordered spectrum; Nyquist set to zero."""
    P = c_fft.shape[-1]
    h = M // 2
    out = np.zeros(c_fft.shape[:-1] + (M,), dtype=np.complex128)
    out[..., :h] = c_fft[..., :h]
    out[..., h + 1:] = c_fft[..., P - h + 1:]
    return out


def to_physical_padded(c_fft: np.ndarray, P: int) -> np.ndarray:
    return np.fft.ifft(pad_spectrum(c_fft, P)) * P


def from_physical_padded(values: np.ndarray, M: int) -> np.ndarray:
    P = values.shape[-1]
    return truncate_spectrum(np.fft.fft(values) / P, M)


def cubic_array(c_fft: np.ndarray, P: int) -> np.ndarray:
    """Dealiased ``|u|^2 u`` for FFT-ordered coefficients (hot path of the integrator)."""
    up = to_physical_padded(c_fft, P)
    return from_physical_padded(np.abs(up) ** 2 * up, c_fft.shape[-1])


def cubic_product(a: SpectralField, b: SpectralField, c: SpectralField,
                  conjugate_mask=(False, False, True), pad: float = 2.0) -> SpectralField:
    """Dealiased product of three fields, truncated back to the resolved band.

    ``conjugate_mask[i]`` selects whether the i-th factor enters conjugated;
    the default gives ``a * b * conj(c)`` (so ``a=b=c=u`` yields ``|u|^2 u``).
    With ``pad >= 2`` the product is exact on the resolved band for all inputs.
    """
    _same_grid(a, b, c)
    grid = GridSpec(a.M, 0, pad)
    P = grid.padded_size
    out = np.ones(P, dtype=np.complex128)
    for f, conj in zip((a, b, c), conjugate_mask):
        vals = to_physical_padded(f.fft_order(), P)
        out *= np.conj(vals) if conj else vals
    return SpectralField.from_fft_order(from_physical_padded(out, a.M))


def cubic(u: SpectralField, pad: float = 2.0) -> SpectralField:
    """``|u|^2 u``, dealiased."""
    P = GridSpec(u.M, 0, pad).padded_size
    return SpectralField.from_fft_order(cubic_array(u.fft_order(), P))


def convolution_cubic(a: SpectralField, b: SpectralField, c: SpectralField) -> SpectralField:
    """Direct O(M^3) convolution sum for ``a * b * conj(c)`` on the resolved band.

    Independent reference for :func:`cubic_product`; only for small ``M``.
    """
    _same_grid(a, b, c)
    M = a.M
    ks = wavenumbers(M)
    out = np.zeros(M, dtype=complex)
    ca, cb, cc = a.coeffs, b.coeffs, np.conj(c.coeffs)
    for i1, k1 in enumerate(ks):
        if ca[i1] == 0:
            continue
        for i2, k2 in enumerate(ks):
            if cb[i2] == 0:
                continue
            kk = k1 + k2 - ks
            ok = np.abs(kk) < M // 2
            np.add.at(out, kk[ok] + M // 2, ca[i1] * cb[i2] * cc[ok])
    return SpectralField(out)


# ---------------------------------------------------------------------------
# seeded field generators


def random_field(M: int, rng: np.random.Generator, kmax: int | None = None,
                 decay: float = 0.0, norm: float | None = None) -> SpectralField:
    """Complex Gaussian coefficients times ``<k>^{-decay}`` on ``|k| <= kmax``.

    ``kmax`` defaults to the whole resolved band; ``norm`` rescales to that L2 norm.
    """
    _check_M(M)
    kmax = M // 2 - 1 if kmax is None else int(kmax)
    if not 0 <= kmax < M // 2:
        raise ValueError(f"cutoff exceeds resolved band: kmax={kmax}, M/2={M // 2}")
    k = wavenumbers(M)
    c = (rng.standard_normal(M) + 1j * rng.standard_normal(M)) / np.sqrt(2.0)
    c = np.where(np.abs(k) <= kmax, c * japanese_bracket(k) ** (-decay), 0.0)
    u = SpectralField(c)
    if norm is not None:
        n0 = l2_norm(u)
        u = u * (norm / n0) if n0 > 0 else u
    return u


def power_law_field(M: int, rng: np.random.Generator, exponent: float, kmax: int | None = None,
                    norm: float | None = None) -> SpectralField:
    """``|c_k| = <k>^{-exponent}`` with independent uniform random phases on ``|k| <= kmax``."""
    _check_M(M)
    kmax = M // 2 - 1 if kmax is None else int(kmax)
    if not 0 <= kmax < M // 2:
        raise ValueError(f"cutoff exceeds resolved band: kmax={kmax}, M/2={M // 2}")
    k = wavenumbers(M)
    phase = np.exp(1j * rng.uniform(0.0, TWO_PI, M))
    c = np.where(np.abs(k) <= kmax, japanese_bracket(k) ** (-exponent) * phase, 0.0)
    u = SpectralField(c)
    if norm is not None:
        u = u * (norm / l2_norm(u))
    return u

"""Self-checks of the spectral machinery, run by ``dampnls check``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    TWO_PI,
    SpectralField,
    l2_norm_sq,
    project,
    random_field,
    transform_forward,
    transform_inverse,
)

DEFAULT_SIZES = (16, 32, 64, 128, 256, 512, 1024)


@dataclass
class InvariantResult:
    name: str
    M: int
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.error <= self.tol


def invariant_suite(sizes=DEFAULT_SIZES, seed: int = 0, trials: int = 3) -> list:
    """Roundtrip, Parseval and projection identities on random fields.

    * roundtrip: ``forward(inverse(u)) == u`` and ``inverse(forward(x)) == x`` (relative max error)
    * parseval: ``(2 pi / M) sum_j |u(x_j)|^2 == ||u||^2`` (relative)
    * projection: ``P_N u + Q_N u == u`` exactly, ``P_N Q_N u == 0`` exactly, ``P_N P_N == P_N``
    """
    rng = np.random.default_rng(seed)
    out = []
    for M in sizes:
        rt = pv = pj = 0.0
        for _ in range(trials):
            u = random_field(M, rng)
            x = rng.standard_normal(M) + 1j * rng.standard_normal(M)
            back = transform_forward(transform_inverse(u)).coeffs
            rt = max(rt, float(np.max(np.abs(back - u.coeffs)) / np.max(np.abs(u.coeffs))))
            xx = transform_inverse(transform_forward(x))
            rt = max(rt, float(np.max(np.abs(xx - x)) / np.max(np.abs(x))))
            phys = transform_inverse(u)
            quad = TWO_PI / M * math.fsum(np.abs(phys) ** 2)
            pv = max(pv, abs(quad - l2_norm_sq(u)) / l2_norm_sq(u))
            for N in sorted({0, 1, M // 8, M // 4, M // 2 - 1}):
                lo, hi = project(u, N, "low"), project(u, N, "high")
                pj = max(pj, float(np.max(np.abs((lo + hi).coeffs - u.coeffs))),
                         float(np.max(np.abs(project(hi, N, "low").coeffs))),
                         float(np.max(np.abs(project(lo, N, "low").coeffs - lo.coeffs))))
        out += [InvariantResult("roundtrip", M, rt, 1e-12), InvariantResult("parseval", M, pv, 1e-12),
                InvariantResult("projection", M, pj, 0.0)]
    return out


__all__ = ["InvariantResult", "invariant_suite", "DEFAULT_SIZES"]

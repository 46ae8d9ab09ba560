"""Single Fourier mode: the one case with a closed-form solution.

For u0 = A e^{ikx} and f = 0 the cubic term only rotates the phase, so
the amplitude decays like e^{-gamma t} and the phase picks up
k^2 t - |A|^2 (1 - e^{-2 gamma t}) / (2 gamma).  We use it to watch the
Strang splitting converge at second order.
"""
import math

import numpy as np

from dampnls import PhysParams, SchemeSpec, SpectralField, integrate, l2_norm

# %%
M, A, k, gamma, T = 64, 1.0, 3, 0.5, 10.0
p = PhysParams(gamma, SpectralField.zeros(M))
u0 = SpectralField.from_modes(M, {k: A})

phase = k * k * T - A * A * (1 - math.exp(-2 * gamma * T)) / (2 * gamma)
exact = SpectralField.from_modes(M, {k: A * math.exp(-gamma * T) * np.exp(1j * phase)})

# %% halve dt a few times; the error should drop by about 4 each time
prev = None
for dt in (4e-3, 2e-3, 1e-3, 5e-4):
    tr = integrate(u0, p, SchemeSpec(dt=dt, horizon=T, store_every=10 ** 9))
    err = l2_norm(tr.final - exact)
    ratio = "" if prev is None else f"  ratio {prev / err:.3f}"
    print(f"dt={dt:.1e}  error {err:.3e}{ratio}")
    prev = err

# %% the other integrators agree on a short run
for method in ("strang_split", "etd_rk2", "rk4_reference"):
    tr = integrate(u0, p, SchemeSpec(method, dt=1e-3, horizon=1.0, store_every=10 ** 9))
    print(f"{method:14s} |u(1)|^2 = {tr.diagnostics[-1]['l2_sq']:.12f}")
print("exact          |u(1)|^2 =", f"{2 * math.pi * A * A * math.exp(-2 * gamma):.12f}")

"""Energy balance and the absorbing ball.

Pairing the equation with u gives d/dt ||u||^2 = -2 gamma ||u||^2 + 2 Re(f, u).
We check that balance sample by sample, then start trajectories well
outside the ball of radius 2||f||/gamma and watch them fall in.
"""
import numpy as np

from dampnls import PhysParams, SchemeSpec, integrate, random_field
from dampnls.diagnostics import absorbing_check, energy_residual
from dampnls.equations import absorbing_radius
from dampnls.experiments import run_absorbing_ball
from dampnls.integrator import default_dt

rng = np.random.default_rng(0)
M = 64

# %% energy residual at the default step and at half of it
p = PhysParams(0.5, random_field(M, rng, kmax=4, norm=0.5))
u0 = random_field(M, rng, kmax=8, norm=1.5, decay=1.0)
dt = default_dt(M)
res = [energy_residual(integrate(u0, p, SchemeSpec(dt=h, horizon=0.05)), p) for h in (dt, dt / 2)]
print(f"max residual per unit time: {res[0].max:.3e} (dt) -> {res[1].max:.3e} (dt/2)")
print(f"max residual per step:      {np.abs(res[0].residuals).max():.3e} -> {np.abs(res[1].residuals).max():.3e}")

# %% one trajectory from 8 radii out
M0 = absorbing_radius(p)
u0 = random_field(M, rng, kmax=4, norm=8 * M0)
tr = integrate(u0, p, SchemeSpec(dt=1e-3, horizon=20.0, store_every=100))
rep = absorbing_check(tr, u0, p)
print(f"M0 = {M0:.4f}; entered at t = {rep.entry_time:.3f} (bound guarantees by {rep.guaranteed_entry:.3f})")
print(f"violations of the L2 envelope: {len(rep.violations)}, stays inside: {rep.stays_inside}")

# %% a small ensemble through the experiment driver
r = run_absorbing_ball(M=32, members=4, horizon_factor=10, dt=2e-3, store_every=50)
for row in r.data["members"]:
    print(f"gamma={row['gamma']:.2f} |u0|/M0={row['u0_norm'] / row['M0']:.2f} entry={row['entry_time']}")
print("outcome:", r.outcome)

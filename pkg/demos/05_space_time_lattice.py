"""Space-time norms on a lattice.

Fields are sampled on [0, T) x {modes}; after removing the free phase
e^{ik^2 t} the time spectrum measures distance from free evolution.
Three small studies: the resonance identity, the L^4 ratio, and how the
low-low-high trilinear term shrinks as the high cutoff N grows.
"""
import numpy as np

from dampnls.bourgain import (
    SpaceTimeField,
    damping_scaling,
    l4_ensemble,
    resonance_factor,
    resonance_sweep,
    xbs_norm,
)

# %% resonance identity in exact arithmetic
print("(1, 2, 3):", resonance_factor(1, 2, 3, (0.5, -0.25, 2.0)))
print("mismatches over 2000 random triples:", len(resonance_sweep(2000, 0)))

# %% free evolutions carry no modulation
phi = np.random.default_rng(1).standard_normal(16) + 0j
F = SpaceTimeField.free_evolution(phi, 32, 2 * np.pi)
print(f"X^(0.5,0) = {xbs_norm(F, 0.5, 0):.6f}, X^(0,0) = {xbs_norm(F, 0, 0):.6f}")

# %% L^4 ratio is stable when the lattice is refined
for M in (16, 32, 64):
    e = l4_ensemble(M, M, 40, 0)
    print(f"M=L={M:3d}: max L4 / X^(3/8,0) ratio {e.max_ratio:.4f}")

# %% trilinear damping: median ratio against N
rep = damping_scaling([4, 8, 16], 10, 0, M=64)
for rec in rep.to_records():
    print(f"N={rec['N']:3d}  median {rec['median_ratio']:.4e}")
print(f"fitted slope {rep.slope:.3f}")

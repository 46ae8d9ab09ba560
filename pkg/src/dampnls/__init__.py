"""Pseudospectral toolkit for the damped, driven cubic Schrodinger equation on the torus."""
from .spectral import (
    GridSpec,
    SpectralField,
    cubic,
    inner,
    l2_norm,
    l2_norm_sq,
    power_law_field,
    project,
    random_field,
    sobolev_norm,
    transform_forward,
    transform_inverse,
)
from .equations import (
    DecompState,
    ModifiedState,
    PhysParams,
    absorbing_radius,
    rhs_full,
    rhs_modified,
    steady_state_g,
    wick_lambda,
)
from .integrator import BlowUpError, SchemeSpec, Trajectory, default_dt, integrate
from .diagnostics import (
    absorbing_check,
    decay_fit,
    energy_residual,
    equicontinuity_modulus,
    tail_profile,
    weak_pairing,
)

__version__ = "0.1.0"

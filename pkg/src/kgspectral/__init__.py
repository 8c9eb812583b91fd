"""Spectral solver and verification harness for the damped Klein-Gordon equation
u_tt - L u + b u_t + m^2 u = |u|^p on tori and SU(2) (central functions)."""

from .fourier import (
    SpectralField,
    analyze,
    homogeneous_sobolev_norm,
    plancherel_l2_norm,
    random_field,
    sobolev_norm,
    synthesize,
)
from .linear_solver import EvolutionState, energy, evolve_homogeneous, verify_decay
from .propagator import (
    EvolutionParams,
    decay_function,
    duhamel_multiplier,
    g0,
    g1,
    propagate_mode,
)
from .semilinear_solver import (
    SemilinearConfig,
    Trajectory,
    apply_N,
    estimate_epsilon0,
    nonlinearity,
    picard_iterate,
    scale_data,
    xt_norm,
)
from .spectral_groups import (
    SU2_CENTRAL,
    TORUS_D1,
    TORUS_D2,
    TORUS_D3,
    GroupKind,
    GroupSpec,
    Mode,
    enumerate_modes,
    evaluate_basis,
    quadrature_grid,
)

__version__ = "0.1.0"

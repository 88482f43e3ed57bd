"""Exact Fourier-space solutions, profiles and rate experiments for the
linearized compressible Navier-Stokes system

    rho_t + gamma div v = 0,
    v_t - alpha Lap v - beta grad div v + gamma grad rho = 0.
"""

from .catalog import (
    InitialDatum,
    build_datum,
    combine,
    make_gaussian,
    make_monomial_gaussian,
    moment_expansion_remainder,
    scale,
    shift,
    zero,
)
from .core import (
    Envelope,
    FluidParams,
    QuadratureError,
    Thresholds,
    decay_function,
    sphere_measure,
    sphere_quadratic_moment,
    sphere_quartic_moment,
    thresholds_of,
    weighted_l1_norm,
)
from .lab import (
    RateReport,
    fit_power,
    fit_sqrt_log,
    geometric_time_grid,
    run_prop31,
    run_theorem1,
    run_theorem2,
    run_threshold_sweep,
)
from .multipliers import eval_multiplier, multiplier_gap, profile_first_order, profile_second_order
from .norms import (
    DivergentAtOrigin,
    l2_norm_field,
    l2_norm_radial,
    solution_norm,
    solution_norms,
    synthesize_grid_field,
)
from .quadrature import QuadratureSpec
from .solver import FrequencyWindow, char_roots, exp_diff, rho_hat, system_residual, v_hat

__version__ = "0.1.0"

"""levyclaw: scalar conservation laws with symmetric Levy-jump diffusion.

A monotone finite-difference solver for du/dt + dF(u)/dx + g[A(u)] = 0
in one space dimension together with the kinetic machinery that makes
its structural guarantees checkable: the discrete nonlocal dissipation
density, the recovered entropy defect field, entropy-inequality
residuals, and exact contraction/comparison harnesses.
"""

from .kernels import (
    LevyMeasure, WeightTable, bounded_kernel, fractional_laplacian,
    spectral_constant, tabulated_from_csv, tabulated_measure,
    tempered_stable, uniform_kernel,
)
from .kinetic import (
    EntropyTriple, FluxSpec, F_functional, F_functional_array,
    G_functional, G_functional_array, Nonlinearity,
    burgers_flux, char_conv, chi, chi_grid, chi_l1_distance,
    identity_nonlinearity, kruzhkov_entropy, linear_flux,
    piecewise_linear_nonlinearity, polynomial_flux, power_nonlinearity,
    quadratic_entropy, taylor_identity_residual, truncate,
    truncation_inequality_check, zero_flux, zero_nonlinearity,
)
from .operator import Boundary, DiscreteOperator, GridFunction, apply_g, bilinear_form
from .scheme import (
    ModelSpec, SolverState, Trajectory, build_table, cfl_dt,
    initial_profile, make_grid, run, step,
)
from .dissipation import (
    DissipationField, EntropyResidualReport, SpaceTimeBump, compute_n,
    entropy_residual, entropy_residual_batch, kinetic_consistency,
    kruzhkov_family, nu_slice_bound, recover_m, xi_grid_for, xi_slice_bounds,
)
from .harness import PairedRunReport, comparison_check, contraction_check

__version__ = "0.1.0"

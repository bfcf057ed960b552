"""Quadrature-based spectral solver for the Allen-Cahn equation on S^2."""

__version__ = "0.1.0"

from .harmonics import (
    BasisIndex,
    GridEvaluator,
    PoleError,
    SURFACE_AREA,
    dim_pn,
    eval_basis,
    eval_expansion,
    eval_surface_gradient,
    kernel_value,
    laplace_eigenvalue,
    z_dim,
)
from .hyperinterpolation import (
    HarmonicCoefficients,
    discrete_inner,
    hyperinterpolate,
    uniform_norm_bound,
)
from .quadrature import (
    MZReport,
    QuadratureFileError,
    QuadratureRule,
    equal_area_rule,
    exactness_error,
    gauss_product_rule,
    load_rule,
    mesh_norm,
    mz_constant,
    random_rule,
)
from .solver import (
    BlowUpError,
    RunResult,
    SolverConfig,
    SolverState,
    StabilityConstants,
    StepDiagnostics,
    benchmark_initial_condition,
    continuous_energy,
    discrete_energy,
    effective_envelope,
    galerkin_residual,
    init_state,
    nonlinear_f,
    potential_F,
    run,
    stability_constants,
    step,
    step_mixed,
    uniform_norm_estimate,
)

__all__ = [
    "BasisIndex",
    "BlowUpError",
    "GridEvaluator",
    "HarmonicCoefficients",
    "MZReport",
    "PoleError",
    "QuadratureFileError",
    "QuadratureRule",
    "RunResult",
    "SURFACE_AREA",
    "SolverConfig",
    "SolverState",
    "StabilityConstants",
    "StepDiagnostics",
    "benchmark_initial_condition",
    "continuous_energy",
    "dim_pn",
    "discrete_energy",
    "discrete_inner",
    "effective_envelope",
    "equal_area_rule",
    "eval_basis",
    "eval_expansion",
    "eval_surface_gradient",
    "exactness_error",
    "galerkin_residual",
    "gauss_product_rule",
    "hyperinterpolate",
    "init_state",
    "kernel_value",
    "laplace_eigenvalue",
    "load_rule",
    "mesh_norm",
    "mz_constant",
    "nonlinear_f",
    "potential_F",
    "random_rule",
    "run",
    "stability_constants",
    "step",
    "step_mixed",
    "uniform_norm_bound",
    "uniform_norm_estimate",
    "z_dim",
]

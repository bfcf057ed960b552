"""Semi-implicit spectral time stepper for the Allen-Cahn equation on S^2.

One step of the scheme: sample the current polynomial solution at the
evolution rule's points, hyperinterpolate the cubic nonlinearity back to
coefficients, then apply the implicit diffusion solve, which is diagonal
because the basis functions are Laplace-Beltrami eigenfunctions:

    c_new = (c - tau * hhat) / (1 + tau * nu^2 * l*(l+1))

Each step therefore costs exactly two basis-matrix products (one
evaluation, one projection) plus vector work.  The module also provides
the energy functionals, uniform-norm probes, the maximum-principle
envelope, and the stability constants that bound long-time behavior.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .harmonics import (
    SURFACE_AREA,
    GridEvaluator,
    eigenvalue_vector,
    eval_basis,
    eval_basis_gradient,
    expansion_pole_values,
    _point_chunks,
    dim_pn,
)
from .hyperinterpolation import HarmonicCoefficients
from .quadrature import QuadratureRule, gauss_product_rule

# Basis matrix-vector products performed by step(); read with
# basis_matvec_count().  Diagnostics (energies, probes) do not count.
_MATVECS = 0


def basis_matvec_count() -> int:
    return _MATVECS


def reset_basis_matvec_count() -> None:
    global _MATVECS
    _MATVECS = 0


class BlowUpError(RuntimeError):
    """The solution left the representable range (non-finite coefficients).

    Carries the failing step index and, when raised from run(), the
    diagnostics collected so far.
    """

    def __init__(self, step: int, diagnostics=None, snapshots=None):
        super().__init__(
            f"solution blew up at step {step} (non-finite coefficients)"
        )
        self.step = step
        self.diagnostics = diagnostics or []
        self.snapshots = snapshots or []


def nonlinear_f(u):
    """Double-well reaction term f(u) = u^3 - u."""
    return u * u * u - u


def potential_F(u):
    """Double-well potential F(u) = (u^2 - 1)^2 / 4."""
    q = u * u - 1.0
    return 0.25 * q * q


@dataclass
class SolverConfig:
    """Full description of one simulation."""

    nu: float
    tau: float
    N: int
    steps: int
    evolution_rule: QuadratureRule
    init_rule: QuadratureRule | None = None
    energy_rule: QuadratureRule | None = None
    probe_grid: tuple | None = None
    alpha0: float | None = None
    snapshot_every: int = 0

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError(f"nu must be > 0, got {self.nu}")
        if self.tau <= 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if self.alpha0 is not None and self.alpha0 < 0:
            raise ValueError(f"alpha0 must be >= 0, got {self.alpha0}")
        if self.init_rule is None:
            self.init_rule = self.evolution_rule
        if self.energy_rule is None:
            self.energy_rule = gauss_product_rule(4 * self.N)
        if self.probe_grid is None:
            self.probe_grid = (4 * self.N + 4, 8 * self.N + 8)
        n_lat, n_lon = self.probe_grid
        if n_lat < 2 * self.N + 2 or n_lon < 4 * self.N + 4:
            raise ValueError(
                f"probe grid {self.probe_grid} is below the minimum "
                f"({2 * self.N + 2}, {4 * self.N + 4}) for degree {self.N}"
            )


@dataclass
class SolverState:
    """Numerical solution at time n*tau."""

    n: int
    time: float
    coeffs: HarmonicCoefficients


@dataclass
class StepDiagnostics:
    """Per-step record of the monitored quantities."""

    n: int
    time: float
    uniform_norm: float
    discrete_energy: float
    continuous_energy: float
    envelope: float
    l2_norm: float


@dataclass
class StabilityConstants:
    """Constants from the L-infinity and energy stability bounds."""

    theta: float
    M0: float
    tau1: float
    zeta_max: float
    M1: float


@dataclass
class RunResult:
    """Diagnostics trace plus optional probe-grid snapshots."""

    diagnostics: list
    snapshots: list  # (n, time, grid) tuples
    final_state: SolverState


def _cached_basis(rule: QuadratureRule, N: int) -> np.ndarray:
    key = ("basis", N)
    if key not in rule._cache:
        rule._cache[key] = eval_basis(rule.points, N)
    return rule._cache[key]


def _cached_gradient(rule: QuadratureRule, N: int):
    key = ("gradient", N)
    if key not in rule._cache:
        rule._cache[key] = eval_basis_gradient(rule.points, N)
    return rule._cache[key]


def _cached_grid_evaluator(rule: QuadratureRule, N: int) -> GridEvaluator:
    zs, _, phis = rule.grid
    key = ("grid_eval", N)
    if key not in rule._cache:
        rule._cache[key] = GridEvaluator(N, np.arccos(zs), phis)
    return rule._cache[key]


def init_state(config: SolverConfig, u0_values) -> SolverState:
    """Hyperinterpolate initial samples (taken at the init rule's points)
    onto the degree-N solution space."""
    from .hyperinterpolation import hyperinterpolate

    coeffs = hyperinterpolate(config.init_rule, u0_values, config.N)
    return SolverState(n=0, time=0.0, coeffs=coeffs)


def step(state: SolverState, config: SolverConfig) -> SolverState:
    """Advance one time step with the evolution rule."""
    global _MATVECS
    A = _cached_basis(config.evolution_rule, config.N)
    lam = eigenvalue_vector(config.N)
    c = state.coeffs.values

    # Overflow to inf is the expected failure mode near blow-up; the
    # finiteness check below is the handler.
    with np.errstate(over="ignore", invalid="ignore"):
        u_vals = A @ c
        _MATVECS += 1
        h = nonlinear_f(u_vals)
        hhat = A.T @ (config.evolution_rule.weights * h)
        _MATVECS += 1
        c_new = (c - config.tau * hhat) / (
            1.0 + config.tau * config.nu**2 * lam
        )
    if not np.isfinite(c_new).all():
        raise BlowUpError(step=state.n + 1)
    return SolverState(
        n=state.n + 1,
        time=(state.n + 1) * config.tau,
        coeffs=HarmonicCoefficients(config.N, c_new),
    )


def step_mixed(state: SolverState, config: SolverConfig) -> SolverState:
    """Evolution step of the mixed-quadrature scheme.

    Identical to step(): the mixing lives entirely in init_state, where
    the (possibly inexact, e.g. scattered-data) init rule builds u^0
    while evolution keeps its own exactness-bearing rule.  Named so
    configurations document intent.
    """
    return step(state, config)


def continuous_energy(
    coeffs: HarmonicCoefficients, nu: float, energy_rule: QuadratureRule
) -> float:
    """Energy functional: (nu^2/2) * integral |grad u|^2 + integral F(u).

    The gradient term is spectral (sum of l*(l+1)*c^2, exact by the
    Green-Beltrami identity); the potential term uses the energy rule and
    is exact when that rule is 4N-exact, since F(u) has degree 4N.
    """
    if (
        energy_rule.exactness_hint is not None
        and energy_rule.exactness_hint < 4 * coeffs.N
    ):
        warnings.warn(
            f"energy rule exactness {energy_rule.exactness_hint} is below "
            f"4N = {4 * coeffs.N}; the potential term is not exact",
            stacklevel=2,
        )
    lam = eigenvalue_vector(coeffs.N)
    grad_term = 0.5 * nu * nu * float(np.dot(lam, coeffs.values**2))
    if energy_rule.grid is not None:
        zs, zw, phis = energy_rule.grid
        vals = _cached_grid_evaluator(energy_rule, coeffs.N).values(
            coeffs.values
        )
        f_term = float(
            np.dot(zw, potential_F(vals).sum(axis=1)) * (2.0 * np.pi / len(phis))
        )
    else:
        f_term = 0.0
        D = dim_pn(coeffs.N)
        for lo, hi in _point_chunks(energy_rule.m, D):
            u_vals = eval_basis(energy_rule.points[lo:hi], coeffs.N) @ coeffs.values
            f_term += float(
                np.dot(energy_rule.weights[lo:hi], potential_F(u_vals))
            )
    return grad_term + f_term


def discrete_energy(
    coeffs: HarmonicCoefficients, rule: QuadratureRule, nu: float
) -> float:
    """Quadrature energy: sum_j w_j ((nu^2/2)|grad u(x_j)|^2 + F(u(x_j))).

    Requires the rule's points to stay off the poles (surface gradients
    are undefined there)."""
    d_theta, d_phi = _cached_gradient(rule, coeffs.N)
    A = _cached_basis(rule, coeffs.N)
    g2 = (d_theta @ coeffs.values) ** 2 + (d_phi @ coeffs.values) ** 2
    u_vals = A @ coeffs.values
    integrand = 0.5 * nu * nu * g2 + potential_F(u_vals)
    return float(np.dot(rule.weights, integrand))


_PROBE_EVALUATORS: dict = {}


def _probe_evaluator(N: int, n_lat: int, n_lon: int) -> GridEvaluator:
    key = (N, n_lat, n_lon)
    if key not in _PROBE_EVALUATORS:
        thetas = np.pi * (np.arange(n_lat) + 1.0) / (n_lat + 1.0)
        phis = 2.0 * np.pi * np.arange(n_lon) / n_lon
        _PROBE_EVALUATORS[key] = GridEvaluator(N, thetas, phis)
    return _PROBE_EVALUATORS[key]


def uniform_norm_estimate(coeffs: HarmonicCoefficients, probe_grid) -> float:
    """Max of |u| over an equiangular probe grid plus the two poles.

    Interior latitudes theta_i = pi*(i+1)/(n_lat+1) avoid the poles; the
    pole values come from the zonal coefficients.  A lower estimate of
    the true uniform norm.
    """
    n_lat, n_lon = probe_grid
    grid = _probe_evaluator(coeffs.N, n_lat, n_lon).values(coeffs.values)
    north, south = expansion_pole_values(coeffs)
    return float(max(np.abs(grid).max(), abs(north), abs(south)))


def stability_constants(tau: float, eps0: float = 0.01) -> StabilityConstants:
    """Constants governing L-infinity and energy stability at step size tau.

    M0 bounds the uniform norm for 1/2 < tau < 2.  tau1 is the unique
    real root of 1/2 + 1/x = (3/2) * ((2/3) (1+x)^{3/2} / sqrt(3x))^2 and
    marks the end of the provable energy-decay range.  zeta_max is the
    largest headroom available at this tau (zero at tau1, negative
    beyond); M1 adds the headroom earned by staying eps0 below tau1.
    """
    if not 0.0 < tau < 2.0:
        raise ValueError(f"tau must lie in (0, 2), got {tau}")
    if not 0.0 < eps0 <= 0.1:
        raise ValueError(f"eps0 must lie in (0, 0.1], got {eps0}")

    def base(t):
        return (2.0 / 3.0) * (1.0 + t) ** 1.5 / math.sqrt(3.0 * t)

    def zeta_cap(t):
        return math.sqrt((2.0 / 3.0) * (0.5 + 1.0 / t)) - base(t)

    theta = 1.0 - 2.0 * tau
    M0 = 0.5 * (base(tau) + math.sqrt((2.0 + tau) / tau))
    tau1 = 0.5 * (
        -2.0
        + (9.0 - 3.0 * math.sqrt(6.0)) ** (1.0 / 3.0)
        + (9.0 + 3.0 * math.sqrt(6.0)) ** (1.0 / 3.0)
    )
    zeta_max = zeta_cap(tau)
    zeta_eps = zeta_cap(tau1 - eps0)
    M1 = base(tau) + min(zeta_max, zeta_eps)
    return StabilityConstants(
        theta=theta, M0=M0, tau1=tau1, zeta_max=zeta_max, M1=M1
    )


def effective_envelope(n: int, alpha0: float, tau: float) -> float:
    """Decaying uniform-norm envelope 1 + (1-2*tau)^n * alpha0.

    The degree-independent part of the effective maximum principle; only
    defined for 0 < tau <= 1/2 (the degree-dependent correction carries a
    non-constructive constant and is not computed).
    """
    if not 0.0 < tau <= 0.5:
        raise ValueError(f"tau must lie in (0, 1/2], got {tau}")
    if alpha0 < 0:
        raise ValueError(f"alpha0 must be >= 0, got {alpha0}")
    return 1.0 + (1.0 - 2.0 * tau) ** n * alpha0


def galerkin_residual(
    prev: SolverState, nxt: SolverState, config: SolverConfig
) -> float:
    """Largest violation of the discrete Galerkin identity over all test
    basis functions of degree <= N, using the evolution rule's inner
    product.  Zero (to rounding) whenever the rule is 2N-exact."""
    A = _cached_basis(config.evolution_rule, config.N)
    w = config.evolution_rule.weights
    lam = eigenvalue_vector(config.N)
    c0 = prev.coeffs.values
    c1 = nxt.coeffs.values
    dudt_vals = A @ ((c1 - c0) / config.tau)
    lap_vals = A @ (-lam * c1)
    f_vals = nonlinear_f(A @ c0)
    residual = A.T @ (w * (dudt_vals - config.nu**2 * lap_vals + f_vals))
    return float(np.abs(residual).max())


def run(config: SolverConfig, u0_sampler) -> RunResult:
    """Initialize from samples and advance config.steps steps.

    `u0_sampler` is called on the init rule's (m, 3) point array and must
    return the m initial values.  Diagnostics are recorded for u^0 and
    after every step; probe-grid snapshots are taken at n = 0, every
    snapshot_every steps (if positive), and at the final step.  On
    blow-up the partial trace is attached to the raised error.
    """
    u0_values = np.asarray(u0_sampler(config.init_rule.points), dtype=float)
    state = init_state(config, u0_values)

    alpha0 = config.alpha0
    if alpha0 is None:
        alpha0 = max(0.0, uniform_norm_estimate(state.coeffs, config.probe_grid) - 1.0)

    def diagnose(st: SolverState) -> StepDiagnostics:
        # inf-valued diagnostics are retained on the way into a blow-up
        with np.errstate(over="ignore", invalid="ignore"):
            un = uniform_norm_estimate(st.coeffs, config.probe_grid)
            e_disc = discrete_energy(st.coeffs, config.evolution_rule, config.nu)
            e_cont = continuous_energy(st.coeffs, config.nu, config.energy_rule)
        if config.tau <= 0.5:
            env = effective_envelope(st.n, alpha0, config.tau)
        else:
            env = float("nan")
        return StepDiagnostics(
            n=st.n,
            time=st.time,
            uniform_norm=un,
            discrete_energy=e_disc,
            continuous_energy=e_cont,
            envelope=env,
            l2_norm=st.coeffs.l2_norm(),
        )

    def snapshot(st: SolverState):
        n_lat, n_lon = config.probe_grid
        grid = _probe_evaluator(config.N, n_lat, n_lon).values(st.coeffs.values)
        return (st.n, st.time, grid)

    def wants_snapshot(n: int) -> bool:
        if config.snapshot_every > 0 and n % config.snapshot_every == 0:
            return True
        return n == config.steps

    diagnostics = [diagnose(state)]
    snapshots = [snapshot(state)] if wants_snapshot(0) else []
    try:
        for _ in range(config.steps):
            state = step(state, config)
            diagnostics.append(diagnose(state))
            if wants_snapshot(state.n):
                snapshots.append(snapshot(state))
    except BlowUpError as exc:
        raise BlowUpError(
            step=exc.step, diagnostics=diagnostics, snapshots=snapshots
        ) from None
    return RunResult(
        diagnostics=diagnostics, snapshots=snapshots, final_state=state
    )


def benchmark_initial_condition(points) -> np.ndarray:
    """Initial condition cos(cosh(5xz) - 10y) used by the desk-scale
    experiments and the command line."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return np.cos(np.cosh(5.0 * pts[:, 0] * pts[:, 2]) - 10.0 * pts[:, 1])

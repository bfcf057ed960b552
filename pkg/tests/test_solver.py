import math

import numpy as np
import pytest

from acsphere import (
    BlowUpError,
    HarmonicCoefficients,
    SolverConfig,
    SolverState,
    benchmark_initial_condition,
    continuous_energy,
    dim_pn,
    discrete_energy,
    effective_envelope,
    equal_area_rule,
    eval_basis,
    eval_expansion,
    galerkin_residual,
    gauss_product_rule,
    hyperinterpolate,
    init_state,
    nonlinear_f,
    potential_F,
    random_rule,
    run,
    stability_constants,
    step,
    step_mixed,
    uniform_norm_estimate,
)
from acsphere.harmonics import eigenvalue_vector
from acsphere.quadrature import QuadratureRule
from acsphere.solver import basis_matvec_count, reset_basis_matvec_count
from conftest import rotation_matrix

FOUR_PI = 4.0 * math.pi


def make_config(**kw):
    defaults = dict(
        nu=0.1, tau=0.5, N=15, steps=10, evolution_rule=gauss_product_rule(30)
    )
    defaults.update(kw)
    return SolverConfig(**defaults)


def test_double_well_values():
    assert nonlinear_f(0.0) == 0.0
    assert nonlinear_f(1.0) == 0.0
    assert nonlinear_f(-1.0) == 0.0
    assert nonlinear_f(2.0) == 6.0
    assert potential_F(1.0) == 0.0
    assert potential_F(-1.0) == 0.0
    assert potential_F(0.0) == 0.25
    assert potential_F(2.0) == 2.25


def test_config_validation():
    with pytest.raises(ValueError):
        make_config(nu=0.0)
    with pytest.raises(ValueError):
        make_config(tau=-0.1)
    with pytest.raises(ValueError):
        make_config(N=0)
    with pytest.raises(ValueError):
        make_config(steps=-1)
    with pytest.raises(ValueError, match="probe grid"):
        make_config(probe_grid=(10, 10))


def test_config_defaults():
    cfg = make_config()
    assert cfg.init_rule is cfg.evolution_rule
    assert cfg.energy_rule.exactness_hint == 60
    assert cfg.probe_grid == (64, 128)


def test_init_state(rule30):
    cfg = make_config()
    zero = init_state(cfg, np.zeros(rule30.m))
    assert zero.n == 0 and zero.time == 0.0
    assert np.all(zero.coeffs.values == 0.0)
    ones = init_state(cfg, np.ones(rule30.m))
    assert abs(ones.coeffs.values[0] - math.sqrt(FOUR_PI)) <= 1e-12
    assert np.abs(ones.coeffs.values[1:]).max() <= 1e-12
    with pytest.raises(ValueError):
        init_state(cfg, np.ones(3))


def test_step_matches_quadrature_oracle():
    # independent oracle: project the nonlinearity with a much more
    # exact rule and apply the diagonal update by hand
    N = 15
    a = 0.1
    c0 = np.zeros(dim_pn(N))
    c0[2] = a
    state = SolverState(0, 0.0, HarmonicCoefficients(N, c0))
    cfg = make_config(N=N, evolution_rule=gauss_product_rule(4 * N), steps=1)
    out = step(state, cfg)

    oracle_rule = gauss_product_rule(6 * N + 3)
    u_vals = eval_expansion(state.coeffs, oracle_rule.points)
    hhat = eval_basis(oracle_rule.points, N).T @ (
        oracle_rule.weights * nonlinear_f(u_vals)
    )
    lam = eigenvalue_vector(N)
    expected = (c0 - cfg.tau * hhat) / (1.0 + cfg.tau * cfg.nu**2 * lam)
    np.testing.assert_allclose(out.coeffs.values, expected, rtol=0, atol=1e-12)
    assert out.n == 1 and out.time == cfg.tau


def test_zero_is_exact_fixed_point():
    cfg = make_config(evolution_rule=equal_area_rule(961))
    state = SolverState(0, 0.0, HarmonicCoefficients(15, np.zeros(256)))
    for _ in range(100):
        state = step(state, cfg)
    assert np.all(state.coeffs.values == 0.0)


@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_constant_phases_are_fixed_points(rule30, sign):
    cfg = make_config()
    state = init_state(cfg, sign * np.ones(rule30.m))
    start = state.coeffs.values.copy()
    for _ in range(100):
        state = step(state, cfg)
    assert np.abs(state.coeffs.values - start).max() <= 1e-12


def test_step_mixed_is_bitwise_alias(rule30):
    cfg = make_config()
    state = init_state(cfg, benchmark_initial_condition(rule30.points))
    a = step(state, cfg)
    b = step_mixed(state, cfg)
    assert np.array_equal(a.coeffs.values, b.coeffs.values)


def test_mixed_configuration_runs():
    # scattered-data initialization with an exactness-bearing evolution rule
    cfg = SolverConfig(
        nu=0.1,
        tau=0.5,
        N=10,
        steps=5,
        evolution_rule=gauss_product_rule(20),
        init_rule=random_rule(2000, 3),
    )
    result = run(cfg, benchmark_initial_condition)
    assert len(result.diagnostics) == 6
    assert all(np.isfinite(d.l2_norm) for d in result.diagnostics)


def test_blow_up_raises_with_partial_diagnostics(rule30):
    cfg = make_config(tau=2.5, steps=400)
    with pytest.raises(BlowUpError) as info:
        run(cfg, benchmark_initial_condition)
    err = info.value
    assert err.step >= 1
    assert len(err.diagnostics) == err.step
    assert "step" in str(err)


def test_continuous_energy_reference_states(rule30):
    energy_rule = gauss_product_rule(60)
    ones = hyperinterpolate(rule30, np.ones(rule30.m), 15)
    assert abs(continuous_energy(ones, 0.1, energy_rule)) <= 1e-12
    zero = HarmonicCoefficients(15, np.zeros(256))
    assert abs(continuous_energy(zero, 0.1, energy_rule) - math.pi) <= 1e-12


def test_continuous_energy_zonal_oracle():
    # independent oracle: for u = a * (zonal degree-1 function) the
    # gradient term is nu^2 a^2 and the potential term reduces to a 1-D
    # integral evaluated with bare Gauss-Legendre nodes
    N, a, nu = 15, 0.3, 0.2
    c = np.zeros(dim_pn(N))
    c[2] = a
    coeffs = HarmonicCoefficients(N, c)
    value = continuous_energy(coeffs, nu, gauss_product_rule(4 * N))

    amp = a * math.sqrt(3.0 / FOUR_PI)
    zs, zw = np.polynomial.legendre.leggauss(200)
    f_term = 2.0 * math.pi * float(zw @ (0.25 * ((amp * zs) ** 2 - 1.0) ** 2))
    expected = 0.5 * nu * nu * 2.0 * a * a + f_term
    assert abs(value - expected) <= 1e-10


def test_continuous_energy_warns_below_4n(rule30):
    coeffs = HarmonicCoefficients(15, np.zeros(256))
    with pytest.warns(UserWarning, match="4N"):
        continuous_energy(coeffs, 0.1, rule30)


def test_discrete_energy_matches_continuous_under_4n():
    rng = np.random.default_rng(12)
    N = 12
    coeffs = HarmonicCoefficients(N, 0.2 * rng.standard_normal(dim_pn(N)))
    rule = gauss_product_rule(4 * N)
    e_disc = discrete_energy(coeffs, rule, 0.3)
    e_cont = continuous_energy(coeffs, 0.3, rule)
    assert abs(e_disc - e_cont) <= 1e-10 * (1.0 + abs(e_cont))


def test_discrete_energy_gradient_term_is_spectral():
    rng = np.random.default_rng(13)
    N = 12
    coeffs = HarmonicCoefficients(N, 0.2 * rng.standard_normal(dim_pn(N)))
    rule = gauss_product_rule(2 * N)
    nu = 0.3
    f_term = float(
        rule.weights @ potential_F(eval_expansion(coeffs, rule.points))
    )
    grad_term = discrete_energy(coeffs, rule, nu) - f_term
    expected = 0.5 * nu * nu * float(eigenvalue_vector(N) @ coeffs.values**2)
    assert abs(grad_term - expected) <= 1e-10 * (1.0 + abs(expected))


def test_discrete_energy_vanishes_at_phase(rule30):
    ones = hyperinterpolate(rule30, np.ones(rule30.m), 15)
    assert abs(discrete_energy(ones, rule30, 0.1)) <= 1e-12


def test_uniform_norm_estimate_basics():
    const = np.zeros(4)
    const[0] = math.sqrt(FOUR_PI)
    assert abs(uniform_norm_estimate(HarmonicCoefficients(1, const), (10, 20)) - 1.0) <= 1e-12
    zonal = np.zeros(4)
    zonal[2] = 1.0
    est = uniform_norm_estimate(HarmonicCoefficients(1, zonal), (10, 20))
    assert abs(est - math.sqrt(3.0 / FOUR_PI)) <= 1e-6


def test_uniform_norm_estimate_monotone_under_refinement():
    rng = np.random.default_rng(17)
    coeffs = HarmonicCoefficients(7, rng.standard_normal(64))
    grids = [(16, 32), (33, 64), (67, 128)]  # nested interior latitudes
    values = [uniform_norm_estimate(coeffs, g) for g in grids]
    assert values[0] <= values[1] + 1e-12
    assert values[1] <= values[2] + 1e-12


def test_stability_constants():
    sc = stability_constants(1.0)
    assert sc.theta == -1.0
    assert abs(sc.M0 - 1.41036) <= 1e-5
    assert abs(sc.tau1 - 0.860018) <= 5e-6
    # headroom closes exactly at tau1
    at_tau1 = stability_constants(sc.tau1)
    assert abs(at_tau1.zeta_max) <= 1e-9
    assert stability_constants(0.7).zeta_max > 0.0
    half = stability_constants(0.5)
    assert half.theta == 0.0
    assert half.M1 >= (2.0 / 3.0) * 1.5**1.5 / math.sqrt(1.5)
    with pytest.raises(ValueError):
        stability_constants(2.0)
    with pytest.raises(ValueError):
        stability_constants(0.0)
    with pytest.raises(ValueError):
        stability_constants(1.0, eps0=0.5)


def test_effective_envelope():
    assert effective_envelope(0, 0.3, 0.25) == 1.3
    assert effective_envelope(1, 0.3, 0.5) == 1.0
    assert effective_envelope(7, 0.3, 0.5) == 1.0
    vals = [effective_envelope(n, 0.4, 0.2) for n in range(6)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        effective_envelope(1, 0.3, 0.6)
    with pytest.raises(ValueError):
        effective_envelope(1, -0.1, 0.3)


def test_galerkin_residual_zero_states():
    cfg = make_config()
    zero = SolverState(0, 0.0, HarmonicCoefficients(15, np.zeros(256)))
    assert galerkin_residual(zero, step(zero, cfg), cfg) == 0.0


def test_galerkin_residual_exact_rule(rule30):
    cfg = make_config(steps=10)
    state = init_state(cfg, benchmark_initial_condition(rule30.points))
    worst = 0.0
    for _ in range(10):
        nxt = step(state, cfg)
        worst = max(worst, galerkin_residual(state, nxt, cfg))
        state = nxt
    assert worst <= 1e-10


def test_galerkin_residual_fails_without_exactness():
    rule = gauss_product_rule(15)
    cfg = make_config(evolution_rule=rule)
    state = init_state(cfg, benchmark_initial_condition(rule.points))
    nxt = step(state, cfg)
    assert galerkin_residual(state, nxt, cfg) > 1e-6


def test_rotation_equivariance():
    # rotating the rule and the initial samples by a common rotation
    # rotates the whole trajectory
    R = rotation_matrix((1.0, 2.0, 0.5), 1.234)
    N = 10
    base = gauss_product_rule(2 * N)
    rotated = QuadratureRule(base.points @ R.T, base.weights.copy())
    cfg_a = SolverConfig(nu=0.1, tau=0.5, N=N, steps=10, evolution_rule=base)
    cfg_b = SolverConfig(nu=0.1, tau=0.5, N=N, steps=10, evolution_rule=rotated)
    sa = init_state(cfg_a, benchmark_initial_condition(base.points))
    sb = init_state(cfg_b, benchmark_initial_condition(rotated.points @ R))
    for _ in range(10):
        sa = step(sa, cfg_a)
        sb = step(sb, cfg_b)
    probe = gauss_product_rule(40)
    ua = eval_expansion(sa.coeffs, probe.points)
    ub = eval_expansion(sb.coeffs, probe.points @ R.T)
    l2 = math.sqrt(float(probe.weights @ (ua - ub) ** 2))
    assert l2 <= 1e-8


def test_exactly_two_matvecs_per_step(rule30):
    cfg = make_config()
    state = init_state(cfg, benchmark_initial_condition(rule30.points))
    reset_basis_matvec_count()
    state = step(state, cfg)
    assert basis_matvec_count() == 2
    for _ in range(5):
        state = step(state, cfg)
    assert basis_matvec_count() == 12


def test_run_zero_steps(rule30):
    cfg = make_config(steps=0)
    result = run(cfg, benchmark_initial_condition)
    assert len(result.diagnostics) == 1
    d = result.diagnostics[0]
    assert d.n == 0 and d.time == 0.0
    assert np.isfinite(d.uniform_norm)
    assert result.final_state.n == 0
    # the final frame is always captured
    assert len(result.snapshots) == 1


def test_run_snapshot_schedule(rule30):
    cfg = make_config(steps=10, snapshot_every=4)
    result = run(cfg, benchmark_initial_condition)
    assert [s[0] for s in result.snapshots] == [0, 4, 8, 10]
    n_lat, n_lon = cfg.probe_grid
    assert result.snapshots[0][2].shape == (n_lat, n_lon)


def test_run_envelope_column(rule30):
    cfg = make_config(steps=3)
    d = run(cfg, benchmark_initial_condition).diagnostics
    # tau = 1/2 collapses the envelope to 1 after the first step
    assert d[0].envelope >= 1.0
    assert d[1].envelope == 1.0
    cfg_big_tau = make_config(steps=2, tau=0.9)
    d = run(cfg_big_tau, benchmark_initial_condition).diagnostics
    assert math.isnan(d[0].envelope)


def test_energy_decay_implication_on_resolved_run():
    # whenever consecutive uniform norms satisfy the decay
    # precondition 1/tau + 1/2 >= (3/2) max^2, the discrete energy
    # must not increase
    cfg = SolverConfig(
        nu=0.3, tau=0.4, N=20, steps=60, evolution_rule=gauss_product_rule(40)
    )
    d = run(cfg, benchmark_initial_condition).diagnostics
    cap = math.sqrt((2.0 / 3.0) * (1.0 / cfg.tau + 0.5))
    checked = 0
    for a, b in zip(d, d[1:]):
        if max(a.uniform_norm, b.uniform_norm) <= cap:
            checked += 1
            assert b.discrete_energy <= a.discrete_energy + 1e-9
    assert checked > 0


def test_envelope_bound_on_resolved_run():
    # a smooth low-degree start with overshoot decays inside the
    # envelope (with the estimation slack)
    def u0(points):
        pts = np.atleast_2d(points)
        return 1.1 * np.cos(2.0 * np.arccos(np.clip(pts[:, 2], -1.0, 1.0)))

    cfg = SolverConfig(
        nu=0.3, tau=0.4, N=20, steps=60, evolution_rule=gauss_product_rule(40)
    )
    d = run(cfg, u0).diagnostics
    alpha0 = max(0.0, d[0].uniform_norm - 1.0)
    for row in d:
        bound = effective_envelope(row.n, alpha0, cfg.tau) + 0.05
        assert row.uniform_norm <= bound


def test_benchmark_initial_condition_values():
    pts = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    vals = benchmark_initial_condition(pts)
    # cos(cosh(0)) = cos(1) at both poles of the x and z axes
    assert abs(vals[0] - math.cos(1.0)) <= 1e-15
    assert abs(vals[1] - math.cos(1.0)) <= 1e-15
    assert abs(vals[2] - math.cos(math.cosh(0.0) - 10.0)) <= 1e-15

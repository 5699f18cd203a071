import math

import numpy as np
import pytest
from scipy.linalg import expm

from kirchheat import (
    Domain,
    ModalState,
    ModelParams,
    SolverDivergenceError,
    StepperConfig,
    build_basis,
    default_dt,
    grad_norm_sq,
    kirchhoff_coefficient,
    linear_system_matrix,
    simulate,
    step,
    zero_state,
)

BASIS_1 = build_basis(Domain.interval(math.pi), 1)
BASIS_4 = build_basis(Domain.interval(math.pi), 4)
LIN = ModelParams(m0=1.0, m1=0.0, alpha=1.0, beta=1.0)
NONLIN = ModelParams(m0=1.0, m1=0.5, alpha=1.0, beta=1.0)


def small_state(basis, seed=0, scale=0.3):
    rng = np.random.default_rng(seed)
    n = basis.n_modes
    return ModalState(0.0, scale * rng.standard_normal(n),
                      scale * rng.standard_normal(n), scale * rng.standard_normal(n))


def test_stepper_config_validation():
    with pytest.raises(ValueError):
        StepperConfig(method="euler", dt=0.1)
    with pytest.raises(ValueError):
        StepperConfig(dt=0.0)
    with pytest.raises(ValueError):
        StepperConfig(dt=0.1, newton_tol=0.0)
    with pytest.raises(ValueError):
        StepperConfig(dt=0.1, newton_max_iter=0)


@pytest.mark.parametrize("method", ["implicit_midpoint", "rk4"])
def test_zero_state_is_exact_fixed_point(method):
    cfg = StepperConfig(method=method, dt=1e-2)
    new, d_inc = step(NONLIN, BASIS_4, zero_state(BASIS_4), cfg)
    assert not new.h.any() and not new.v.any() and not new.c.any()
    assert d_inc == 0.0


@pytest.mark.parametrize("method,order", [("implicit_midpoint", 3), ("rk4", 5)])
def test_single_step_matches_matrix_exponential(method, order):
    """m1 = 0 single mode: one step agrees with expm(dt A) x0 at the local
    order; halving dt shrinks the defect by ~2^order."""
    a = linear_system_matrix(LIN, 1.0)
    x0 = np.array([0.7, -0.2, 0.4])

    def defect(dt):
        state = ModalState(0.0, x0[:1].copy(), x0[1:2].copy(), x0[2:3].copy())
        new, _ = step(LIN, BASIS_1, state, StepperConfig(method=method, dt=dt))
        exact = expm(dt * a) @ x0
        return float(np.abs(np.array([new.h[0], new.v[0], new.c[0]]) - exact).max())

    d1, d2 = defect(2e-2), defect(1e-2)
    assert d1 <= 5.0 * (2e-2) ** order
    ratio = d1 / d2
    nominal = 2.0 ** order
    assert 0.8 * nominal <= ratio <= 1.2 * nominal


def test_record_count_contract():
    state0 = small_state(BASIS_4)
    cfg = StepperConfig(dt=1e-2)
    # 100 steps land exactly on t_end
    traj = simulate(NONLIN, BASIS_4, state0, 1.0, cfg, record_every=5)
    assert len(traj.records) == 1 + 100 // 5
    traj = simulate(NONLIN, BASIS_4, state0, 1.0, cfg, record_every=7)
    assert len(traj.records) == 1 + 100 // 7 + 1
    # partial final step appends one more record
    traj = simulate(NONLIN, BASIS_4, state0, 1.005, cfg, record_every=5)
    assert len(traj.records) == 1 + 100 // 5 + 1
    assert traj.records[-1].t == 1.005
    assert traj.n_steps == 101


def test_record_times_and_states_align():
    state0 = small_state(BASIS_4, seed=1)
    traj = simulate(NONLIN, BASIS_4, state0, 0.5, StepperConfig(dt=1e-2), record_every=3)
    times = traj.times
    assert times[0] == 0.0
    assert times[-1] == 0.5
    assert np.all(np.diff(times) > 0.0)
    assert [s.t for s in traj.states] == list(times)
    np.testing.assert_allclose(np.diff(times)[:-1], 3e-2, rtol=1e-12)


def test_simulate_argument_validation():
    state0 = small_state(BASIS_4)
    with pytest.raises(ValueError):
        simulate(NONLIN, BASIS_4, state0, 0.0, StepperConfig(dt=1e-2))
    with pytest.raises(ValueError):
        simulate(NONLIN, BASIS_4, state0, 1.0, StepperConfig(dt=1e-2), record_every=0)


def test_rk4_stability_guard():
    cfg = StepperConfig(method="rk4", dt=1.0)  # dt * lambda_max = 16
    with pytest.raises(ValueError, match="rk4 unstable"):
        simulate(NONLIN, BASIS_4, small_state(BASIS_4), 2.0, cfg)


def test_energy_never_increases_beyond_tolerance():
    state0 = small_state(BASIS_4, seed=2)
    traj = simulate(NONLIN, BASIS_4, state0, 5.0, StepperConfig(dt=1e-3))
    e = np.array([r.E for r in traj.records])
    assert np.diff(e).max() <= 1e-9 * e[0]
    assert e[-1] < e[0]


def test_dissipation_accumulator_tracks_energy_drop():
    # the in-step accumulator of int_0^T E' ds reproduces E(T) - E(0) exactly
    # for the quadratic energy (m1 = 0); the quartic term adds O(dt^2) defect
    state0 = small_state(BASIS_4, seed=3)
    lin = simulate(LIN, BASIS_4, state0, 2.0, StepperConfig(dt=1e-3))
    drop = lin.records[-1].E - lin.records[0].E
    assert lin.records[-1].diss_int == pytest.approx(drop, abs=1e-13 * lin.records[0].E)

    traj = simulate(NONLIN, BASIS_4, state0, 2.0, StepperConfig(dt=1e-3))
    drop = traj.records[-1].E - traj.records[0].E
    assert traj.records[-1].diss_int == pytest.approx(drop, abs=1e-5 * traj.records[0].E)


def test_default_dt_formula():
    state0 = small_state(BASIS_4, seed=4)
    phi = kirchhoff_coefficient(NONLIN, grad_norm_sq(BASIS_4, state0.h))
    expected = 0.1 / math.sqrt(phi * BASIS_4.lambda_max)
    assert default_dt(NONLIN, BASIS_4, state0) == pytest.approx(expected, rel=1e-14)


def test_midpoint_linear_solve_is_iteration_free():
    # m1 = 0 converges immediately even with a one-iteration budget
    cfg = StepperConfig(dt=0.1, newton_max_iter=1)
    new, _ = step(LIN, BASIS_4, small_state(BASIS_4, seed=5), cfg)
    assert np.isfinite(new.h).all()


def test_solver_divergence_reported_with_time_and_residual():
    # nonlinear phi update cannot settle within a single iteration at 1e-12
    cfg = StepperConfig(dt=0.2, newton_max_iter=1, newton_tol=1e-12)
    state = small_state(BASIS_4, seed=6, scale=1.5)
    state.t = 0.75
    with pytest.raises(SolverDivergenceError) as err:
        step(NONLIN, BASIS_4, state, cfg)
    assert err.value.t == 0.75
    assert err.value.residual > 1e-12


def test_simulate_attaches_failing_time():
    cfg = StepperConfig(dt=0.2, newton_max_iter=1, newton_tol=1e-15)
    with pytest.raises(SolverDivergenceError) as err:
        simulate(NONLIN, BASIS_4, small_state(BASIS_4, seed=7, scale=1.5), 3.0, cfg)
    assert 0.0 <= err.value.t < 3.0


def test_coupling_sign_flip_with_negated_temperature():
    """(alpha, beta, theta0) -> (-alpha, -beta, -theta0) reproduces the same
    displacement/velocity path with the temperature negated, bit for bit."""
    state0 = small_state(BASIS_4, seed=8)
    flipped_params = ModelParams(m0=NONLIN.m0, m1=NONLIN.m1,
                                 alpha=-NONLIN.alpha, beta=-NONLIN.beta)
    s0f = state0.copy()
    s0f.c = -s0f.c
    cfg = StepperConfig(dt=2e-3)
    a = simulate(NONLIN, BASIS_4, state0, 1.0, cfg)
    b = simulate(flipped_params, BASIS_4, s0f, 1.0, cfg)
    for sa, sb in zip(a.states, b.states):
        np.testing.assert_array_equal(sa.h, sb.h)
        np.testing.assert_array_equal(sa.v, sb.v)
        np.testing.assert_array_equal(sa.c, -sb.c)
    for ra, rb in zip(a.records, b.records):
        assert ra.E == rb.E and ra.D == rb.D and ra.E_star == rb.E_star


def test_balance_residual_second_order():
    from kirchheat import energy_balance_residual
    state0 = small_state(BASIS_4, seed=9)
    r = []
    for dt in (2e-3, 1e-3):
        traj = simulate(NONLIN, BASIS_4, state0, 2.0, StepperConfig(dt=dt))
        r.append(energy_balance_residual(traj))
    assert 3.25 <= r[0] / r[1] <= 4.92


def test_rk4_midpoint_cross_agreement():
    state0 = small_state(BASIS_4, seed=10)
    mid = simulate(NONLIN, BASIS_4, state0, 1.0, StepperConfig(dt=5e-4))
    rk = simulate(NONLIN, BASIS_4, state0, 1.0, StepperConfig(method="rk4", dt=5e-4))
    assert abs(mid.records[-1].E - rk.records[-1].E) <= 1e-7 * mid.records[0].E

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eagletune import _backend
from eagletune.errors import InvalidTimeStep, NonFinite
from eagletune.lyapunov import PMatrix, is_hurwitz, solve_lyapunov
from eagletune.plant import (
    CSV_HEADER,
    AdaptationParams,
    AdaptiveGains,
    GenericPlantParams,
    MotorParams,
    PIDGains,
    ReferenceModelParams,
    StepProfile,
    bldc_dynamics,
    build_error_model,
    generic_plant_dynamics,
    motor_time_constants,
    reference_model_dynamics,
    rk4_step,
    simulate_closed_loop,
    simulate_cost,
    update_adaptive_gains,
)

MODEL = ReferenceModelParams()
MATCHED = GenericPlantParams.matching(MODEL)


def test_time_constants():
    assert motor_time_constants(MotorParams(Ke=1, Kt=1, Ra=1, La=1, J=1, B=1)) == (1.0, 1.0)
    tm, te = motor_time_constants(MotorParams(Ke=0.5, Kt=0.5, Ra=2, La=1, J=0.5, B=1))
    assert (tm, te) == pytest.approx((4.0, 0.5), rel=1e-15)
    base = MotorParams()
    doubled = MotorParams(J=2 * base.J)
    assert motor_time_constants(doubled)[0] == pytest.approx(2 * motor_time_constants(base)[0], rel=1e-15)
    assert motor_time_constants(doubled)[1] == motor_time_constants(base)[1]
    assert motor_time_constants(base) == pytest.approx((0.1, 0.005))


def test_motor_params_must_be_positive():
    with pytest.raises(ValueError):
        MotorParams(J=0.0)


def unit_motor(tau_m, tau_e, Ke=1.0):
    # Ra=1, Kt=Ke: tau_m = J/Ke^2, tau_e = La
    return MotorParams(Ke=Ke, Kt=Ke, Ra=1.0, La=tau_e, J=tau_m * Ke * Ke, B=1.0)


def test_bldc_dynamics_examples():
    p = unit_motor(1.0, 1.0)
    assert bldc_dynamics(p, (0.0, 0.0), 1.0) == pytest.approx((0.0, 1.0))
    p = unit_motor(2.0, 0.5)
    assert bldc_dynamics(p, (0.0, 1.0), 0.0) == pytest.approx((1.0, -2.0))
    p = MotorParams()
    U = 0.3
    assert bldc_dynamics(p, (U / p.Ke, 0.0), U)[1] == pytest.approx(0.0, abs=1e-9)


def test_reference_model_dynamics_examples():
    assert reference_model_dynamics(ReferenceModelParams(), (0.0, 0.0), 0.0) == (0.0, 0.0)
    assert reference_model_dynamics(ReferenceModelParams(1.0, 0.5), (0.0, 1.0), 0.0) == (1.0, -1.0)
    assert reference_model_dynamics(ReferenceModelParams(2.0, 0.25), (0.0, 0.0), 1.0) == (0.0, 4.0)


def test_build_error_model():
    assert build_error_model(ReferenceModelParams(1.0, 0.5)).tolist() == [[0, -1], [1, -1]]
    assert build_error_model(ReferenceModelParams(2.0, 1.0)).tolist() == [[0, -1], [4, -4]]


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 10))
def test_error_model_always_hurwitz(omega_n, zeta):
    A = build_error_model(ReferenceModelParams(omega_n, zeta))
    assert np.trace(A) < 0 and np.linalg.det(A) > 0
    assert is_hurwitz(A)


# --- RK4 -------------------------------------------------------------------


def test_rk4_constant_and_zero():
    x = rk4_step(lambda x, u: np.zeros_like(x), [1.5, -2.0], None, 0.1)
    assert x.tolist() == [1.5, -2.0]
    for dt in (0.125, 0.25, 0.5):
        assert rk4_step(lambda x, u: np.ones_like(x), [0.0], None, dt)[0] == 0.0 + dt
    assert rk4_step(lambda x, u: np.ones_like(x), [0.0], None, 0.1)[0] == pytest.approx(0.1, abs=1e-16)


def test_rk4_exponential():
    x1 = rk4_step(lambda x, u: -x, [1.0], None, 0.1)[0]
    assert abs(x1 - math.exp(-0.1)) < 1e-7
    assert x1 == pytest.approx(0.904837418, abs=1e-7)


def rk4_global_error(dt, T=1.0):
    x = np.array([1.0])
    for _ in range(int(round(T / dt))):
        x = rk4_step(lambda y, u: -y, x, None, dt)
    return abs(x[0] - math.exp(-T))


def test_rk4_fourth_order():
    errs = [rk4_global_error(dt) for dt in (0.2, 0.1, 0.05)]
    assert errs[0] / errs[1] >= 14
    assert errs[1] / errs[2] >= 14


def test_rk4_rejects_bad_step():
    with pytest.raises(InvalidTimeStep):
        rk4_step(lambda x, u: x, [1.0], None, 0.0)
    with pytest.raises(NonFinite):
        rk4_step(lambda x, u: x * np.inf, [1.0], None, 0.1)


def test_reference_model_step_response_closed_form():
    m = ReferenceModelParams(10.0, 0.7)
    U, dt, T = 1.0, 1e-3, 2.0
    x = np.zeros(2)
    dyn = lambda s, u: np.array(reference_model_dynamics(m, s, u))
    for _ in range(int(round(T / dt))):
        x = rk4_step(dyn, x, U, dt)
    a = 2 * m.zeta * m.omega_n
    v_ss = m.omega_n**2 * U / a
    x2 = v_ss * (1 - math.exp(-a * T))
    x1 = v_ss * (T - (1 - math.exp(-a * T)) / a)
    assert x[1] == pytest.approx(x2, abs=1e-6)
    assert x[0] == pytest.approx(x1, abs=1e-6)


@pytest.mark.parametrize("tau_m, tau_e, Ke", [(0.1, 0.005, 0.05), (1.0, 0.2, 2.0), (0.02, 0.01, 0.5)])
def test_plant_dc_gain(tau_m, tau_e, Ke):
    p = unit_motor(tau_m, tau_e, Ke)
    U = 2.0
    dt = min(tau_m, tau_e) / 20
    T = 10 * max(tau_m, tau_e)
    x = np.zeros(2)
    dyn = lambda s, u: np.array(bldc_dynamics(p, s, u))
    for _ in range(int(round(T / dt))):
        x = rk4_step(dyn, x, U, dt)
    assert x[0] == pytest.approx(U / Ke, rel=0.01)


# --- adaptive gains ------------------------------------------------------------

P_EX = PMatrix(1.5, -0.5, 1.0)


def test_adaptive_zero_error_keeps_gains():
    g = AdaptiveGains.initial(0.7, 0.2)
    g2 = update_adaptive_gains(g, AdaptationParams(), P_EX, 0.0, 0.0, 3.0, 4.0, 1.0, 0.1)
    assert (g2.kp, g2.kd) == (0.7, 0.2)


def test_adaptive_kp_step():
    g = AdaptiveGains.initial(0.0, 0.0)
    g2 = update_adaptive_gains(g, AdaptationParams(1.0, 1.0), P_EX, 1.0, 1.0, 2.0, 0.0, 1.0, 0.1)
    assert g2.kp == pytest.approx(0.1, abs=1e-15)
    assert g2.kd == 0.0


def test_adaptive_kd_sign():
    g = AdaptiveGains.initial(0.0, 0.0)
    g2 = update_adaptive_gains(g, AdaptationParams(1.0, 1.0), P_EX, 1.0, 1.0, 0.0, 2.0, 1.0, 0.1)
    assert g2.kd == pytest.approx(-0.1, abs=1e-15)
    assert g2.kp == 0.0


def test_adaptive_rejects_nan():
    with pytest.raises(NonFinite):
        update_adaptive_gains(AdaptiveGains.initial(0, 0), AdaptationParams(), P_EX, math.nan, 0, 0, 0, 1, 0.1)


# --- closed loop -------------------------------------------------------------


def test_zero_setpoint_stays_at_rest():
    log = simulate_closed_loop(MotorParams(), MODEL, PIDGains(1, 0.5, 0.01), 0.0, T=0.5)
    assert not log.diverged
    assert np.all(log.data[:, 1:8] == 0.0)  # states, errors, u


def test_matched_plant_tracks_exactly():
    log = simulate_closed_loop(MATCHED, MODEL, PIDGains(1, 0, 0), 1.0, T=5.0, dt=1e-4)
    assert len(log) == 50001
    assert np.max(np.abs(log.e_x)) < 1e-9
    assert np.max(np.abs(log.e_theta)) < 1e-9
    assert log.x1m[-1] == pytest.approx(1.0, abs=1e-3)


def test_generic_plant_realises_modified_equation():
    # x2p' = b_p*kp*eps - (a_p + kd*b_p)*x2p under u = kp*eps - kd*x2p
    p = GenericPlantParams(a_p=3.0, b_p=2.0)
    kp, kd, eps, x2 = 1.5, 0.25, 0.4, -0.3
    u = kp * eps - kd * x2
    assert generic_plant_dynamics(p, (0.0, x2), u)[1] == pytest.approx(
        p.b_p * kp * eps - (p.a_p + kd * p.b_p) * x2
    )


def test_errors_recomputable_from_states():
    log = simulate_closed_loop(MotorParams(), MODEL, PIDGains(0.3, 2.0, 0.01), StepProfile((0.0, 1.0), (1.0, -0.5)), T=2.0)
    assert np.array_equal(log.e_x, log.x1p - log.x1m)
    assert np.array_equal(log.e_theta, log.x2p - log.x2m)
    assert np.all(np.diff(log.t) > 0)
    assert np.allclose(np.diff(log.t), 1e-4, rtol=1e-9, atol=1e-15)


def test_step_profile_sampling():
    sp = StepProfile((0.5, 1.0), (2.0, -1.0))
    assert sp.sample(np.array([0.0, 0.49, 0.5, 0.99, 1.0, 3.0])).tolist() == [0, 0, 2, 2, -1, -1]


def test_adaptive_mode_zero_error_fixed_point():
    g = AdaptiveGains.initial(1.0, 0.0)
    log = simulate_closed_loop(MATCHED, MODEL, g, 1.0, T=1.0, dt=1e-4, adaptation=AdaptationParams(0.5, 0.5))
    assert np.all(log.kp == 1.0)
    assert np.all(log.kd == 0.0)
    assert np.max(np.abs(log.e_x)) < 1e-12


def test_adaptive_mode_matches_stepwise_updates():
    motor = MotorParams()
    P = solve_lyapunov(build_error_model(MODEL))
    a = AdaptationParams(0.01, 0.01)
    dt = 1e-4
    log = simulate_closed_loop(motor, MODEL, AdaptiveGains.initial(0.5, 0.0), 1.0, T=0.05, dt=dt, P=P, adaptation=a)
    tm, te = motor_time_constants(motor)
    g = AdaptiveGains.initial(0.5, 0.0)
    for k in range(len(log) - 1):
        assert log.kp[k] == pytest.approx(g.kp, rel=1e-12, abs=1e-15)
        assert log.kd[k] == pytest.approx(g.kd, rel=1e-12, abs=1e-15)
        g = update_adaptive_gains(
            g, a, P, log.e_x[k], log.e_theta[k], 1.0 - log.x1p[k], log.x2p[k], motor.Ke * tm * te, dt
        )
    assert log.kp[-1] != 0.5  # gains did adapt


def test_divergence_stops_early():
    log = simulate_closed_loop(MotorParams(), MODEL, PIDGains(-10, 0, 0), 1.0, T=5.0)
    assert log.diverged
    assert len(log) < 50001
    assert np.all(np.abs(log.data[:, 1:5]) <= 1e6)


def test_time_step_guard():
    with pytest.raises(InvalidTimeStep):
        simulate_closed_loop(MotorParams(), MODEL, PIDGains(), 1.0, T=5.0, dt=1e-3)
    with pytest.raises(InvalidTimeStep):
        simulate_closed_loop(MotorParams(), MODEL, PIDGains(), 1.0, T=1e-5, dt=1e-4)
    with pytest.raises(NonFinite):
        simulate_closed_loop(MotorParams(), MODEL, PIDGains(math.inf, 0, 0), 1.0, T=0.1)


def test_csv_format():
    import io

    log = simulate_closed_loop(MotorParams(), MODEL, PIDGains(), 1.0, T=0.001)
    buf = io.StringIO()
    log.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,x1p,x2p,x1m,x2m,e_x,e_theta,u,kp,ki,kd,diverged"
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + 11
    assert lines[1].split(",")[-1] == "0"
    assert all(len(line.split(",")) == 12 for line in lines[1:])
    assert lines[2].split(",")[0] == "0.0001"


# regression anchor: baseline PID (1, 0, 0) on the default motor/model, T=5 s.
# Frozen after checking that dt/2 agrees within 1%.
BASELINE_COST = 3.9328209866631623


def test_baseline_cost_anchor_and_refinement():
    r = simulate_cost(MotorParams(), MODEL, PIDGains(1, 0, 0), 1.0, T=5.0, dt=1e-4)
    half = simulate_cost(MotorParams(), MODEL, PIDGains(1, 0, 0), 1.0, T=5.0, dt=5e-5)
    assert not r.diverged
    assert abs(half.cost - r.cost) / r.cost < 0.01
    assert r.cost == pytest.approx(BASELINE_COST, rel=1e-12)


# --- backends ------------------------------------------------------------------

needs_cython = pytest.mark.skipif("cython" not in _backend.available(), reason="compiled kernel not built")

CASES = [
    (MotorParams(), PIDGains(1, 0, 0), 1.0),
    (MotorParams(), PIDGains(0.3, 2.0, 0.05), StepProfile((0.0, 0.3), (1.0, 0.2))),
    (MotorParams(), PIDGains(-10, 0, 0), 1.0),
    (MATCHED, PIDGains(1, 0, 0), 1.0),
    (MotorParams(), AdaptiveGains.initial(0.5, 0.0), 1.0),
]


@needs_cython
@pytest.mark.parametrize("plant, ctrl, sp", CASES)
def test_backends_bit_identical(plant, ctrl, sp):
    kw = dict(T=0.5, dt=1e-4, adaptation=AdaptationParams(0.01, 0.01))
    a = simulate_closed_loop(plant, MODEL, ctrl, sp, backend="python", **kw)
    b = simulate_closed_loop(plant, MODEL, ctrl, sp, backend="cython", **kw)
    assert a.diverged == b.diverged
    assert np.array_equal(a.data, b.data)
    ca = simulate_cost(plant, MODEL, ctrl, sp, backend="python", **kw)
    cb = simulate_cost(plant, MODEL, ctrl, sp, backend="cython", **kw)
    assert ca.cost == cb.cost and ca.steps == cb.steps


def test_python_backend_always_available():
    assert "python" in _backend.available()
    with pytest.raises(ValueError):
        _backend.get("fortran")


def test_fallback_selected_when_extension_missing(monkeypatch):
    monkeypatch.setattr(_backend, "_compiled", None)
    assert _backend.get() is _backend._simcore_py
    assert _backend.available() == ["python"]
    with pytest.raises(ImportError):
        _backend.get("cython")
    r = simulate_cost(MotorParams(), MODEL, PIDGains(1, 0, 0), 1.0, T=0.5)
    assert not r.diverged and r.cost > 0

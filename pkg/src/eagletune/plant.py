"""BLDC plant, second-order reference model, controllers and closed-loop runs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from . import _backend
from .errors import InvalidTimeStep, NonFinite
from .lyapunov import PMatrix, solve_lyapunov

DIVERGENCE_LIMIT = 1e6
LOG_COLUMNS = ("t", "x1p", "x2p", "x1m", "x2m", "e_x", "e_theta", "u", "kp", "ki", "kd")
CSV_HEADER = ",".join(LOG_COLUMNS + ("diverged",))


@dataclass(frozen=True)
class MotorParams:
    Ke: float = 0.05
    Kt: float = 0.05
    Ra: float = 1.0
    La: float = 0.005
    J: float = 2.5e-4
    B: float = 1e-4

    def __post_init__(self):
        for name in ("Ke", "Kt", "Ra", "La", "J", "B"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"MotorParams.{name} must be positive, got {v!r}")


@dataclass(frozen=True)
class ReferenceModelParams:
    omega_n: float = 10.0
    zeta: float = 0.7

    def __post_init__(self):
        if not (self.omega_n > 0 and self.zeta > 0):
            raise ValueError("omega_n and zeta must be positive")


@dataclass(frozen=True)
class GenericPlantParams:
    """Plant b_p / (s^2 + a_p s)."""

    a_p: float
    b_p: float

    def __post_init__(self):
        if self.b_p == 0 or not math.isfinite(self.b_p) or not math.isfinite(self.a_p):
            raise ValueError("b_p must be finite and nonzero")

    @classmethod
    def matching(cls, model: ReferenceModelParams) -> "GenericPlantParams":
        """A plant with exactly the reference model's open-loop dynamics."""
        return cls(a_p=2.0 * model.zeta * model.omega_n, b_p=model.omega_n ** 2)


@dataclass(frozen=True)
class PIDGains:
    kp: float = 1.0
    ki: float = 0.0
    kd: float = 0.0

    def as_tuple(self):
        return (self.kp, self.ki, self.kd)


@dataclass(frozen=True)
class AdaptationParams:
    alpha21: float = 1.0
    alpha22: float = 1.0

    def __post_init__(self):
        if not (self.alpha21 > 0 and self.alpha22 > 0):
            raise ValueError("adaptation rates must be positive")


@dataclass(frozen=True)
class AdaptiveGains:
    kp: float
    kd: float
    kp0: float
    kd0: float
    integral_state_p: float = 0.0
    integral_state_d: float = 0.0

    @classmethod
    def initial(cls, kp0: float, kd0: float) -> "AdaptiveGains":
        return cls(kp0, kd0, kp0, kd0)


Plant = Union[MotorParams, GenericPlantParams]


def motor_time_constants(p: MotorParams) -> tuple[float, float]:
    """Mechanical and electrical time constants ``(tau_m, tau_e)`` in seconds."""
    return p.Ra * p.J / (p.Ke * p.Kt), p.La / p.Ra


def bldc_dynamics(p: MotorParams, state, u: float):
    """Derivatives of ``(y, y')`` for ``tau_m*tau_e*y'' + tau_m*y' + y = u/Ke``."""
    tau_m, tau_e = motor_time_constants(p)
    y, ydot = state
    return ydot, (u / p.Ke - tau_m * ydot - y) / (tau_m * tau_e)


def generic_plant_dynamics(p: GenericPlantParams, state, u: float):
    x1, x2 = state
    return x2, p.b_p * u - p.a_p * x2


def reference_model_dynamics(m: ReferenceModelParams, state, U: float):
    _, x2m = state
    return x2m, m.omega_n ** 2 * U - 2.0 * m.zeta * m.omega_n * x2m


def build_error_model(m: ReferenceModelParams) -> np.ndarray:
    """State matrix of the error-augmented reference model."""
    return np.array([[0.0, -1.0], [m.omega_n ** 2, -2.0 * m.zeta * m.omega_n]])


def update_adaptive_gains(
    g: AdaptiveGains,
    a: AdaptationParams,
    P: PMatrix,
    e1: float,
    e2: float,
    eps: float,
    x2p: float,
    KeTmTe: float,
    dt: float,
) -> AdaptiveGains:
    """Advance the adaptive (kp, kd) laws by one explicit-Euler step."""
    vals = (e1, e2, eps, x2p, KeTmTe, dt, g.integral_state_p, g.integral_state_d)
    if not all(math.isfinite(v) for v in vals):
        raise NonFinite("non-finite input to adaptive gain update")
    if dt <= 0:
        raise InvalidTimeStep("dt must be positive")
    s = P.p21 * e1 + P.p22 * e2
    acc_p = g.integral_state_p + s * eps * dt
    acc_d = g.integral_state_d + s * x2p * dt
    return AdaptiveGains(
        kp=g.kp0 + (KeTmTe / a.alpha21) * acc_p,
        kd=g.kd0 - (KeTmTe / a.alpha22) * acc_d,
        kp0=g.kp0,
        kd0=g.kd0,
        integral_state_p=acc_p,
        integral_state_d=acc_d,
    )


def rk4_step(dynamics: Callable, state, u, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of ``x' = dynamics(x, u)`` with u held."""
    if not dt > 0:
        raise InvalidTimeStep("dt must be positive")
    x = np.asarray(state, dtype=float)
    k1 = np.asarray(dynamics(x, u), dtype=float)
    k2 = np.asarray(dynamics(x + 0.5 * dt * k1, u), dtype=float)
    k3 = np.asarray(dynamics(x + 0.5 * dt * k2, u), dtype=float)
    k4 = np.asarray(dynamics(x + dt * k3, u), dtype=float)
    out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NonFinite("RK4 step produced non-finite state")
    return out


@dataclass(frozen=True)
class StepProfile:
    """Piecewise-constant setpoint: ``levels[i]`` holds from ``times[i]`` on."""

    times: tuple = (0.0,)
    levels: tuple = (1.0,)

    def __post_init__(self):
        if len(self.times) != len(self.levels) or not self.times:
            raise ValueError("times and levels must be non-empty and equal length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("step times must be strictly increasing")

    def sample(self, t: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(np.asarray(self.times), t, side="right") - 1
        levels = np.concatenate(([0.0], np.asarray(self.levels, dtype=float)))
        return levels[idx + 1]


Setpoint = Union[float, StepProfile]


@dataclass
class TrajectoryLog:
    data: np.ndarray
    diverged: bool = False
    dt: float = 0.0

    def __len__(self):
        return self.data.shape[0]

    def __getattr__(self, name):
        # column access: log.t, log.e_x, ...
        if name in LOG_COLUMNS:
            return self.data[:, LOG_COLUMNS.index(name)]
        raise AttributeError(name)

    def to_csv(self, path_or_file) -> None:
        flag = "1" if self.diverged else "0"
        lines = [CSV_HEADER]
        for row in self.data:
            lines.append(",".join(f"{v:.9g}" for v in row) + "," + flag)
        text = "\n".join(lines) + "\n"
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w", newline="") as fh:
                fh.write(text)


@dataclass
class SimResult:
    """Kernel output: optional log plus the accumulated tracking cost."""

    log: TrajectoryLog | None
    diverged: bool
    cost: float
    steps: int
    dt: float = field(default=0.0)


def plant_coefficients(plant: Plant) -> tuple[float, float, float, float]:
    if isinstance(plant, MotorParams):
        tau_m, tau_e = motor_time_constants(plant)
        return (1.0 / plant.Ke, 1.0, tau_m, tau_m * tau_e)
    return (plant.b_p, 0.0, plant.a_p, 1.0)


def model_coefficients(m: ReferenceModelParams) -> tuple[float, float, float, float]:
    return (m.omega_n ** 2, 0.0, 2.0 * m.zeta * m.omega_n, 1.0)


def inverse_input_gain(plant: Plant) -> float:
    """Ke*tau_m*tau_e for the BLDC plant, 1/b_p for the generic one."""
    if isinstance(plant, MotorParams):
        tau_m, tau_e = motor_time_constants(plant)
        return plant.Ke * tau_m * tau_e
    return 1.0 / plant.b_p


def max_time_step(plant: Plant, m: ReferenceModelParams) -> float:
    fastest = 1.0 / (m.zeta * m.omega_n)
    if isinstance(plant, MotorParams):
        fastest = min(fastest, motor_time_constants(plant)[1])
    elif plant.a_p > 0:
        fastest = min(fastest, 1.0 / plant.a_p)
    return fastest / 10.0


def _run(plant, model, controller, setpoint, T, dt, P, adaptation, record, backend):
    if not (dt > 0 and T > 0 and dt <= T):
        raise InvalidTimeStep(f"need 0 < dt <= T, got dt={dt}, T={T}")
    guard = max_time_step(plant, model)
    if dt > guard * (1 + 1e-12):
        raise InvalidTimeStep(f"dt={dt} exceeds the stability guard {guard:g}")
    n_steps = int(round(T / dt))

    if isinstance(controller, AdaptiveGains):
        mode = 1
        gains = (controller.kp, 0.0, controller.kd)
        if controller.integral_state_p != 0.0 or controller.integral_state_d != 0.0:
            raise ValueError("adaptive runs start from zero integral accumulators")
        adaptation = adaptation or AdaptationParams()
    else:
        mode = 0
        gains = controller.as_tuple()
        adaptation = adaptation or AdaptationParams()
    if not all(math.isfinite(v) for v in gains):
        raise NonFinite(f"controller gains must be finite, got {gains}")

    if P is None:
        P = solve_lyapunov(build_error_model(model))
    t = np.arange(n_steps + 1) * dt
    if isinstance(setpoint, StepProfile):
        R = setpoint.sample(t)
    else:
        R = np.full(n_steps + 1, float(setpoint))

    kernel = _backend.get(backend)
    adapt = (adaptation.alpha21, adaptation.alpha22, P.p21, P.p22, inverse_input_gain(plant))
    out, rows, diverged, cost = kernel.simulate(
        plant_coefficients(plant),
        model_coefficients(model),
        mode,
        gains,
        adapt,
        (P.p11, P.p12, P.p22),
        R,
        dt,
        n_steps,
        DIVERGENCE_LIMIT,
        record,
    )
    log = TrajectoryLog(np.asarray(out), bool(diverged), dt) if record else None
    return SimResult(log, bool(diverged), float(cost), int(rows) - 1, dt)


def simulate_closed_loop(
    plant: Plant,
    model: ReferenceModelParams,
    controller: PIDGains | AdaptiveGains,
    setpoint: Setpoint = 1.0,
    T: float = 5.0,
    dt: float = 1e-4,
    P: PMatrix | None = None,
    adaptation: AdaptationParams | None = None,
    backend: str | None = None,
) -> TrajectoryLog:
    """Integrate plant and reference model in closed loop and log every sample.

    Both loops are sampled at ``dt``: the plant sees ``u`` from the PID (or
    adaptive) law on ``eps = R - x1p``, the reference model sees
    ``U = R - x1m``. Inputs are held constant across each RK4 step. The run
    stops early with ``diverged=True`` once any state leaves ``[-1e6, 1e6]``.
    """
    return _run(plant, model, controller, setpoint, T, dt, P, adaptation, True, backend).log


def simulate_cost(
    plant: Plant,
    model: ReferenceModelParams,
    controller: PIDGains | AdaptiveGains,
    setpoint: Setpoint = 1.0,
    T: float = 5.0,
    dt: float = 1e-4,
    P: PMatrix | None = None,
    adaptation: AdaptationParams | None = None,
    backend: str | None = None,
) -> SimResult:
    """Like :func:`simulate_closed_loop` but only accumulates ``sum e'Pe dt``."""
    return _run(plant, model, controller, setpoint, T, dt, P, adaptation, False, backend)

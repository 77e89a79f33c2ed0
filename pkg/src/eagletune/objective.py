"""Lyapunov-weighted tracking objective and analytic test functions."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NonFinite, UnknownName
from .lyapunov import PMatrix, is_positive_definite, solve_lyapunov
from .plant import (
    MotorParams,
    PIDGains,
    Plant,
    ReferenceModelParams,
    Setpoint,
    build_error_model,
    simulate_cost,
)

DEFAULT_SENTINEL = 1000.0


def instant_cost(e, P: PMatrix, a=(), b=(), alpha_w=(), beta_w=()) -> float:
    """Pointwise cost ``e'Pe + sum(alpha_w*a^2) + sum(beta_w*b^2)``."""
    e1, e2 = e
    vals = (e1, e2, *a, *b)
    if not all(math.isfinite(v) for v in vals):
        raise NonFinite("non-finite argument to instant_cost")
    if len(a) != len(alpha_w) or len(b) != len(beta_w):
        raise ValueError("deviation vectors and weights must have matching lengths")
    cost = P.quad(e1, e2)
    cost += sum(w * x * x for w, x in zip(alpha_w, a))
    cost += sum(w * x * x for w, x in zip(beta_w, b))
    return cost


@dataclass(frozen=True)
class LyapunovObjectiveSpec:
    Q: tuple = ((1.0, 0.0), (0.0, 1.0))
    alpha_w: float = 0.0
    beta_w: float = 0.0
    kp_nominal: float = 1.0
    kd_nominal: float = 0.0
    T: float = 5.0
    dt: float = 1e-4
    setpoint: Setpoint = 1.0
    divergence_penalty: float = DEFAULT_SENTINEL

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        if Q.shape != (2, 2) or not np.allclose(Q, Q.T):
            raise ValueError("Q must be a symmetric 2x2 matrix")
        if not (Q[0, 0] > 0 and np.linalg.det(Q) > 0):
            raise ValueError("Q must be positive definite")
        if self.alpha_w < 0 or self.beta_w < 0:
            raise ValueError("penalty weights must be non-negative")
        if not self.T > 0:
            raise ValueError("horizon T must be positive")
        if not self.divergence_penalty > 0:
            raise ValueError("divergence_penalty must be positive")


def lyapunov_weight(spec: LyapunovObjectiveSpec, model: ReferenceModelParams) -> PMatrix:
    return solve_lyapunov(build_error_model(model), np.asarray(spec.Q, dtype=float))


def tracking_objective(
    spec: LyapunovObjectiveSpec,
    motor: Plant,
    model: ReferenceModelParams,
    candidate: PIDGains,
    P: PMatrix | None = None,
    backend: str | None = None,
) -> float:
    """Integrated Lyapunov tracking cost of one PID candidate.

    Returns ``spec.divergence_penalty`` for runs that blow up.
    """
    if P is None:
        P = lyapunov_weight(spec, model)
    res = simulate_cost(
        motor, model, candidate, spec.setpoint, spec.T, spec.dt, P=P, backend=backend
    )
    if res.diverged:
        return spec.divergence_penalty
    a = candidate.kp - spec.kp_nominal
    b = candidate.kd - spec.kd_nominal
    # deviation penalties are constant along the run
    deviation = spec.alpha_w * a * a + spec.beta_w * b * b
    value = res.cost + deviation * res.steps * spec.dt
    if not math.isfinite(value):
        return spec.divergence_penalty
    return value


def _sphere(x: np.ndarray) -> float:
    return float(np.sum(x * x))


def _rosenbrock(x: np.ndarray) -> float:
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def _rastrigin(x: np.ndarray) -> float:
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


BENCHMARKS: dict[str, Callable[[np.ndarray], float]] = {
    "sphere": _sphere,
    "rosenbrock": _rosenbrock,
    "rastrigin": _rastrigin,
}

DEFAULT_BOUNDS = {
    "sphere": (-5.0, 5.0),
    "rosenbrock": (-5.0, 10.0),
    "rastrigin": (-5.12, 5.12),
}


@dataclass
class ObjectiveFunction:
    """A named, box-bounded scalar function that counts its evaluations."""

    name: str
    dimension: int
    bounds: np.ndarray
    evaluator: Callable[[np.ndarray], float]
    evaluations: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=float).reshape(self.dimension, 2)
        if np.any(self.bounds[:, 0] > self.bounds[:, 1]):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def lower(self) -> np.ndarray:
        return self.bounds[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.bounds[:, 1]

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(f"expected a point of dimension {self.dimension}, got {x.shape}")
        with self._lock:
            self.evaluations += 1
        return float(self.evaluator(x))


def _expand_bounds(bounds, n: int) -> np.ndarray:
    arr = np.asarray(bounds, dtype=float)
    if arr.shape == (2,):
        arr = np.tile(arr, (n, 1))
    if arr.shape != (n, 2):
        raise ValueError(f"bounds must be a (lo, hi) pair or shape ({n}, 2)")
    return arr


def make_benchmark(name: str, n: int, bounds=None) -> ObjectiveFunction:
    if name not in BENCHMARKS:
        raise UnknownName(f"unknown benchmark {name!r}; choose from {sorted(BENCHMARKS)}")
    if n < 1:
        raise ValueError("dimension must be at least 1")
    if bounds is None:
        bounds = DEFAULT_BOUNDS[name]
    return ObjectiveFunction(name, n, _expand_bounds(bounds, n), BENCHMARKS[name])


PID_BOUNDS = ((-10.0, 10.0), (-10.0, 10.0), (-1.0, 1.0))


def make_bldc_objective(
    spec: LyapunovObjectiveSpec | None = None,
    motor: Plant | None = None,
    model: ReferenceModelParams | None = None,
    bounds: Sequence = PID_BOUNDS,
    backend: str | None = None,
) -> ObjectiveFunction:
    """PID tuning problem over ``(kp, ki, kd)`` scored by :func:`tracking_objective`."""
    spec = spec or LyapunovObjectiveSpec()
    motor = motor or MotorParams()
    model = model or ReferenceModelParams()
    P = lyapunov_weight(spec, model)
    if not is_positive_definite(P):
        raise ValueError("Lyapunov weight is not positive definite")

    def evaluate(x: np.ndarray) -> float:
        return tracking_objective(spec, motor, model, PIDGains(*map(float, x)), P=P, backend=backend)

    return ObjectiveFunction("bldc-pid", 3, _expand_bounds(bounds, 3), evaluate)

"""PSO and Firefly local search, and the two-stage Eagle Strategy driver.

All algorithms minimise. Each run owns one ``numpy.random.Generator`` so a
64-bit seed replays a run exactly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from .errors import BudgetTooSmall, UnknownName
from .levy import LevyParams, global_explore
from .objective import ObjectiveFunction


@dataclass(frozen=True)
class PsoParams:
    c1: float = 2.0
    c2: float = 2.0
    w: float = 1.0
    swarm_size: int = 30
    max_iterations: int = 20

    def __post_init__(self):
        if min(self.c1, self.c2, self.w) < 0:
            raise ValueError("c1, c2 and w must be non-negative")
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be at least 2")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")

    @property
    def population(self) -> int:
        return self.swarm_size


@dataclass(frozen=True)
class FireflyParams:
    beta0: float = 0.2
    gamma: float = 1.0
    alpha: float = 0.3
    population: int = 30
    max_iterations: int = 20

    def __post_init__(self):
        if not self.beta0 > 0:
            raise ValueError("beta0 must be positive")
        if self.gamma < 0 or self.alpha < 0:
            raise ValueError("gamma and alpha must be non-negative")
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


LocalParams = PsoParams | FireflyParams


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    pbest_position: np.ndarray
    pbest_value: float = math.inf


@dataclass
class FireflyAgent:
    position: np.ndarray
    value: float = math.inf


# --- PSO ---------------------------------------------------------------------


def pso_step(swarm: Sequence[Particle], gbest, params: PsoParams, lower, upper, rng) -> list[Particle]:
    """Move every particle once with the inertia/cognitive/social velocity rule.

    ``r1`` and ``r2`` are scalars drawn per particle. Coordinates pushed past a
    bound are clamped and their velocity component is zeroed. Personal bests
    are carried over untouched; use :func:`pso_accept` after evaluating.
    """
    gbest = np.asarray(gbest, dtype=float)
    out = []
    for p in swarm:
        r1, r2 = rng.random(2)
        v = (
            params.w * p.velocity
            + params.c1 * r1 * (p.pbest_position - p.position)
            + params.c2 * r2 * (gbest - p.position)
        )
        x = p.position + v
        clamped = (x < lower) | (x > upper)
        x = np.clip(x, lower, upper)
        v = np.where(clamped, 0.0, v)
        out.append(Particle(x, v, p.pbest_position, p.pbest_value))
    return out


def pso_accept(particle: Particle, new_value: float) -> Particle:
    """Replace the personal best only on strict improvement."""
    if new_value < particle.pbest_value:
        return replace(particle, pbest_position=particle.position.copy(), pbest_value=new_value)
    return particle


# --- Firefly -----------------------------------------------------------------


def firefly_step(
    agents: Sequence[FireflyAgent],
    params: FireflyParams,
    lower,
    upper,
    rng,
    objective=None,
) -> list[FireflyAgent]:
    """One asynchronous firefly generation.

    Agent ``i`` moves towards every strictly brighter (lower-cost) ``j`` in
    index order, using positions already updated this sweep and brightness
    from the start of the sweep. An agent with no brighter neighbour takes
    only the random-walk term. The walk is ``alpha*(r - 1/2)`` per coordinate
    in tenths of that coordinate's range. When ``objective`` is given every
    moved agent is re-evaluated; otherwise values are left as NaN.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    unit = (upper - lower) / 10.0
    values = [a.value for a in agents]
    pos = [a.position.astype(float, copy=True) for a in agents]
    dim = lower.size
    for i in range(len(pos)):
        brighter = [j for j in range(len(pos)) if values[j] < values[i]]
        if not brighter:
            r = rng.random(dim)
            pos[i] = np.clip(pos[i] + params.alpha * (r - 0.5) * unit, lower, upper)
            continue
        for j in brighter:
            diff = pos[j] - pos[i]
            dist2 = float(diff @ diff)
            beta = params.beta0 * math.exp(-params.gamma * dist2) if params.gamma != math.inf else 0.0
            r = rng.random(dim)
            pos[i] = np.clip(pos[i] + beta * diff + params.alpha * (r - 0.5) * unit, lower, upper)
    if objective is None:
        return [FireflyAgent(x, math.nan) for x in pos]
    return [FireflyAgent(x, objective(x)) for x in pos]


def firefly_accept(agent_prev: FireflyAgent, agent_new: FireflyAgent) -> FireflyAgent:
    return agent_new if agent_new.value < agent_prev.value else agent_prev


# --- runs --------------------------------------------------------------------


@dataclass(frozen=True)
class EagleConfig:
    levy: LevyParams = field(default_factory=LevyParams)
    local: LocalParams = field(default_factory=PsoParams)
    local_algo: Literal["PSO", "FFA"] = "PSO"
    global_fraction: float = 0.2
    tolerance: float = 1e-9
    eval_budget: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.local_algo not in ("PSO", "FFA"):
            raise UnknownName(f"unknown local algorithm {self.local_algo!r}")
        expected = PsoParams if self.local_algo == "PSO" else FireflyParams
        if not isinstance(self.local, expected):
            raise ValueError(f"{self.local_algo} needs {expected.__name__}")
        if not 0.0 < self.global_fraction < 1.0:
            raise ValueError("global_fraction must lie in (0, 1)")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    @property
    def budget(self) -> int:
        if self.eval_budget is not None:
            return self.eval_budget
        return self.local.population * self.local.max_iterations

    @property
    def local_generations_per_cycle(self) -> int:
        return max(1, round((1.0 - self.global_fraction) / self.global_fraction))


@dataclass
class RunResult:
    best_position: np.ndarray
    best_value: float
    history: list = field(default_factory=list)
    terminated_by: str = "budget"
    evaluations_used: int = 0
    algorithm: str = ""
    seed: int = 0

    def history_csv(self) -> str:
        dim = len(self.best_position)
        header = ["iteration", "evals", "best_value"] + [f"best_position_{i}" for i in range(dim)]
        lines = [",".join(header)]
        for it, evals, val, pos in self.history:
            lines.append(",".join([str(it), str(evals), repr(float(val))] + [repr(float(v)) for v in pos]))
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "best_value": float(self.best_value),
            "best_position": [float(v) for v in self.best_position],
            "terminated_by": self.terminated_by,
            "evaluations_used": self.evaluations_used,
            "iterations": len(self.history) - 1,
        }

    def summary_json(self, config_echo: dict | None = None) -> str:
        data = self.summary()
        if config_echo is not None:
            data["config"] = config_echo
        return json.dumps(data, indent=2, sort_keys=True) + "\n"


class _Tracker:
    """Best-so-far bookkeeping shared by all three drivers."""

    def __init__(self, objective: ObjectiveFunction, budget: int):
        self.objective = objective
        self.budget = budget
        self.start = objective.evaluations
        self.best_value = math.inf
        self.best_position = None
        self.history = []

    @property
    def used(self) -> int:
        return self.objective.evaluations - self.start

    def can_afford(self, n: int) -> bool:
        return self.used + n <= self.budget

    def offer(self, position, value: float) -> None:
        if value < self.best_value:
            self.best_value = value
            self.best_position = np.array(position, dtype=float)

    def record(self) -> None:
        self.history.append((len(self.history), self.used, self.best_value, self.best_position.copy()))


class _Population:
    """Local-search state for either PSO or Firefly behind one interface."""

    def __init__(self, algo, params, objective: ObjectiveFunction, tracker: _Tracker, rng):
        self.algo = algo
        self.params = params
        self.objective = objective
        self.tracker = tracker
        self.rng = rng
        lo, hi = objective.lower, objective.upper
        n, d = params.population, objective.dimension
        init = rng.uniform(lo, hi, size=(n, d))
        if algo == "PSO":
            self.members = []
            for x in init:
                val = objective(x)
                tracker.offer(x, val)
                self.members.append(Particle(x.copy(), np.zeros(d), x.copy(), val))
        else:
            self.members = []
            for x in init:
                val = objective(x)
                tracker.offer(x, val)
                self.members.append(FireflyAgent(x.copy(), val))

    def seeds(self) -> np.ndarray:
        if self.algo == "PSO":
            return np.array([p.pbest_position for p in self.members])
        return np.array([a.position for a in self.members])

    def explore(self, levy: LevyParams) -> None:
        """Levy sweep: one proposal per member, adopted on strict improvement."""
        obj = self.objective
        proposals = global_explore(self.seeds(), obj.lower, obj.upper, levy, self.rng)
        for k, x in enumerate(proposals):
            val = obj(x)
            self.tracker.offer(x, val)
            m = self.members[k]
            if self.algo == "PSO":
                if val < m.pbest_value:
                    d = x.size
                    self.members[k] = Particle(x.copy(), np.zeros(d), x.copy(), val)
            else:
                self.members[k] = firefly_accept(m, FireflyAgent(x.copy(), val))

    def restart_velocities(self) -> None:
        if self.algo == "PSO":
            for p in self.members:
                p.velocity = np.zeros_like(p.velocity)

    def generation(self) -> None:
        obj = self.objective
        if self.algo == "PSO":
            gbest = self.tracker.best_position
            moved = pso_step(self.members, gbest, self.params, obj.lower, obj.upper, self.rng)
            self.members = []
            for p in moved:
                val = obj(p.position)
                self.tracker.offer(p.position, val)
                self.members.append(pso_accept(p, val))
        else:
            moved = firefly_step(self.members, self.params, obj.lower, obj.upper, self.rng, obj)
            for a in moved:
                self.tracker.offer(a.position, a.value)
            self.members = [firefly_accept(p, a) for p, a in zip(self.members, moved)]


def _check_budget(budget: int, population: int) -> None:
    if budget < population:
        raise BudgetTooSmall(f"budget {budget} is smaller than one population evaluation ({population})")


def eagle_strategy_run(objective: ObjectiveFunction, config: EagleConfig) -> RunResult:
    """Alternate Levy-flight exploration with PSO or Firefly intensification.

    A cycle is one Levy sweep over the population followed by
    ``config.local_generations_per_cycle`` local generations, so exploration
    takes ``global_fraction`` of each full cycle's evaluations. The run stops
    when the next sweep would exceed the budget, or once two consecutive
    cycles improve the best value by less than ``tolerance``.
    """
    n = config.local.population
    budget = config.budget
    _check_budget(budget, n)
    rng = np.random.default_rng(config.seed)
    tracker = _Tracker(objective, budget)
    pop = _Population(config.local_algo, config.local, objective, tracker, rng)
    tracker.record()

    terminated_by = "budget"
    stalled = 0
    while tracker.can_afford(n):
        before = tracker.best_value
        pop.explore(config.levy)
        tracker.record()
        pop.restart_velocities()
        for _ in range(config.local_generations_per_cycle):
            if not tracker.can_afford(n):
                break
            pop.generation()
            tracker.record()
        improvement = before - tracker.best_value
        stalled = stalled + 1 if improvement < config.tolerance else 0
        if stalled >= 2:
            terminated_by = "tolerance"
            break

    return RunResult(
        tracker.best_position,
        tracker.best_value,
        tracker.history,
        terminated_by,
        tracker.used,
        f"ES-{config.local_algo}",
        config.seed,
    )


def plain_run(
    algo: str,
    objective: ObjectiveFunction,
    params: LocalParams | None = None,
    seed: int = 0,
    eval_budget: int | None = None,
) -> RunResult:
    """PSO or Firefly alone from a uniform random start, until the budget runs out.

    The default budget is ``population * max_iterations`` evaluations, the
    initial population counting as the first iteration.
    """
    algo = algo.upper()
    if algo not in ("PSO", "FFA"):
        raise UnknownName(f"unknown algorithm {algo!r}")
    if params is None:
        params = PsoParams() if algo == "PSO" else FireflyParams()
    n = params.population
    budget = eval_budget if eval_budget is not None else n * params.max_iterations
    _check_budget(budget, n)
    rng = np.random.default_rng(seed)
    tracker = _Tracker(objective, budget)
    pop = _Population(algo, params, objective, tracker, rng)
    tracker.record()
    while tracker.can_afford(n):
        pop.generation()
        tracker.record()
    return RunResult(
        tracker.best_position,
        tracker.best_value,
        tracker.history,
        "budget",
        tracker.used,
        algo,
        seed,
    )

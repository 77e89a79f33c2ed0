"""Experiment configuration: a sectioned INI file with documented keys.

Every key is optional; absent keys take the defaults listed in
:data:`DEFAULTS`. ``dump_defaults()`` writes a complete file that loads back
to identical settings.
"""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, ValidationError
from .levy import LevyParams
from .objective import (
    BENCHMARKS,
    DEFAULT_BOUNDS,
    PID_BOUNDS,
    LyapunovObjectiveSpec,
    ObjectiveFunction,
    make_benchmark,
    make_bldc_objective,
)
from .optimizers import EagleConfig, FireflyParams, PsoParams
from .plant import MotorParams, ReferenceModelParams, StepProfile

ALGORITHMS = ("es-pso", "es-ffa", "pso", "ffa")
OBJECTIVES = tuple(BENCHMARKS) + ("bldc-pid",)

# section -> ordered (key, default text)
DEFAULTS: dict[str, dict[str, str]] = {
    "experiment": {
        "objective": "bldc-pid",
        "dimension": "2",
        "bounds": "",
        "algorithm": "es-pso",
        "seed": "0",
        "output_dir": "results",
        "eval_budget": "",
        "global_fraction": "0.2",
        "tolerance": "1e-9",
    },
    "motor": {"Ke": "0.05", "Kt": "0.05", "Ra": "1.0", "La": "0.005", "J": "0.00025", "B": "0.0001"},
    "model": {"omega_n": "10.0", "zeta": "0.7"},
    "objective": {
        "q11": "1.0",
        "q12": "0.0",
        "q22": "1.0",
        "alpha_w": "0.0",
        "beta_w": "0.0",
        "kp_nominal": "1.0",
        "kd_nominal": "0.0",
        "horizon": "5.0",
        "dt": "0.0001",
        "setpoint": "1.0",
        "divergence_penalty": "1000.0",
        "kp_bounds": "-10, 10",
        "ki_bounds": "-10, 10",
        "kd_bounds": "-1, 1",
    },
    "levy": {"lambda": "1.5", "step": "5.0"},
    "pso": {"c1": "2.0", "c2": "2.0", "w": "1.0", "population": "30", "iterations": "20"},
    "ffa": {"beta0": "0.2", "gamma": "1.0", "alpha": "0.3", "population": "30", "iterations": "20"},
    "mesh": {"axes": "0, 1", "resolution": "21", "fixed": ""},
}


@dataclass(frozen=True)
class MeshRequest:
    axes: tuple[int, int] = (0, 1)
    resolution: int = 21
    fixed: tuple[float, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    objective: str = "bldc-pid"
    dimension: int = 2
    bounds: tuple = ()
    algorithm: str = "es-pso"
    seed: int = 0
    output_dir: str = "results"
    eval_budget: int | None = None
    global_fraction: float = 0.2
    tolerance: float = 1e-9
    motor: MotorParams = field(default_factory=MotorParams)
    model: ReferenceModelParams = field(default_factory=ReferenceModelParams)
    objective_spec: LyapunovObjectiveSpec = field(default_factory=LyapunovObjectiveSpec)
    pid_bounds: tuple = PID_BOUNDS
    levy: LevyParams = field(default_factory=LevyParams)
    pso: PsoParams = field(default_factory=PsoParams)
    ffa: FireflyParams = field(default_factory=FireflyParams)
    mesh: MeshRequest = field(default_factory=MeshRequest)

    @property
    def local_params(self):
        return self.ffa if self.algorithm.endswith("ffa") else self.pso

    def eagle_config(self) -> EagleConfig:
        return EagleConfig(
            levy=self.levy,
            local=self.local_params,
            local_algo="FFA" if self.algorithm.endswith("ffa") else "PSO",
            global_fraction=self.global_fraction,
            tolerance=self.tolerance,
            eval_budget=self.eval_budget,
            seed=self.seed,
        )

    def build_objective(self, backend: str | None = None) -> ObjectiveFunction:
        if self.objective == "bldc-pid":
            return make_bldc_objective(self.objective_spec, self.motor, self.model, self.pid_bounds, backend)
        return make_benchmark(self.objective, self.dimension, self.bounds or None)

    def echo(self) -> dict:
        """Plain-data view of the effective settings for the JSON summary."""
        spec = self.objective_spec
        sp = spec.setpoint
        return {
            "objective": self.objective,
            "dimension": 3 if self.objective == "bldc-pid" else self.dimension,
            "bounds": [list(b) for b in self.build_bounds()],
            "algorithm": self.algorithm,
            "seed": self.seed,
            "eval_budget": self.eval_budget,
            "global_fraction": self.global_fraction,
            "tolerance": self.tolerance,
            "motor": vars(self.motor).copy(),
            "model": vars(self.model).copy(),
            "objective_spec": {
                "Q": [list(r) for r in spec.Q],
                "alpha_w": spec.alpha_w,
                "beta_w": spec.beta_w,
                "kp_nominal": spec.kp_nominal,
                "kd_nominal": spec.kd_nominal,
                "horizon": spec.T,
                "dt": spec.dt,
                "setpoint": [list(sp.times), list(sp.levels)] if isinstance(sp, StepProfile) else sp,
                "divergence_penalty": spec.divergence_penalty,
            },
            "levy": {"lambda": self.levy.lam, "step": self.levy.step_scale},
            "pso": vars(self.pso).copy(),
            "ffa": vars(self.ffa).copy(),
        }

    def build_bounds(self):
        if self.objective == "bldc-pid":
            return self.pid_bounds
        if self.bounds:
            return self.bounds
        return (DEFAULT_BOUNDS[self.objective],) * self.dimension


def dump_defaults() -> str:
    parser = _parser()
    parser.read_dict(DEFAULTS)
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def _parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep Ke/Kt/Ra case
    return parser


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    return parse_config(text, source=str(path))


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    parser = _parser()
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError(f"missing [section] header in {source}", exc.lineno) from exc
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ParseError(f"cannot parse {line!r} in {source}", lineno) from exc
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno) from exc
    except configparser.DuplicateSectionError as exc:
        raise ParseError(f"duplicate section [{exc.section}]", exc.lineno) from exc
    except configparser.Error as exc:
        raise ParseError(str(exc)) from exc

    values = {sec: dict(keys) for sec, keys in DEFAULTS.items()}
    for sec in parser.sections():
        if sec not in DEFAULTS:
            raise ValidationError(sec, "unknown section")
        for key, val in parser.items(sec):
            if key not in DEFAULTS[sec]:
                raise ValidationError(f"{sec}.{key}", "unknown key")
            values[sec][key] = val.strip()
    return _build(values)


def _num(values, sec, key, kind=float, optional=False):
    raw = values[sec][key]
    if optional and raw == "":
        return None
    try:
        return kind(raw)
    except ValueError:
        raise ValidationError(key, f"expected {kind.__name__}, got {raw!r} in [{sec}]") from None


def _pair(raw: str, name: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in raw.split(","))
    except ValueError:
        raise ValidationError(name, f"expected 'lower, upper', got {raw!r}") from None
    if not lo < hi:
        raise ValidationError(name, "lower bound must be below upper bound")
    return (lo, hi)


def _setpoint(raw: str):
    if ":" not in raw:
        try:
            return float(raw)
        except ValueError:
            raise ValidationError("setpoint", f"expected a number or 't:level, ...', got {raw!r}") from None
    try:
        pairs = [tuple(float(v) for v in item.split(":")) for item in raw.split(",")]
        return StepProfile(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))
    except ValueError as exc:
        raise ValidationError("setpoint", str(exc)) from None


def _checked(name, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except ValueError as exc:
        raise ValidationError(name, str(exc)) from None


def _build(values: dict) -> RunConfig:
    ex = values["experiment"]
    objective = ex["objective"]
    if objective not in OBJECTIVES:
        raise ValidationError("objective", f"unknown objective {objective!r}; choose from {OBJECTIVES}")
    algorithm = ex["algorithm"]
    if algorithm not in ALGORITHMS:
        raise ValidationError("algorithm", f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    dimension = _num(values, "experiment", "dimension", int)
    if dimension < 1:
        raise ValidationError("dimension", "must be at least 1")
    bounds = ()
    if ex["bounds"]:
        pairs = [p for p in ex["bounds"].split(";") if p.strip()]
        bounds = tuple(_pair(p, "bounds") for p in pairs)
        if len(bounds) == 1:
            bounds = bounds * dimension
        if len(bounds) != dimension:
            raise ValidationError("bounds", f"need 1 or {dimension} 'lower, upper' pairs")
    seed = _num(values, "experiment", "seed", int)
    if not 0 <= seed < 2**64:
        raise ValidationError("seed", "must be an unsigned 64-bit integer")
    eval_budget = _num(values, "experiment", "eval_budget", int, optional=True)
    global_fraction = _num(values, "experiment", "global_fraction")
    if not 0 < global_fraction < 1:
        raise ValidationError("global_fraction", "must lie in (0, 1)")
    tolerance = _num(values, "experiment", "tolerance")
    if not tolerance > 0:
        raise ValidationError("tolerance", "must be positive")

    motor = _checked("motor", MotorParams, **{k: _num(values, "motor", k) for k in DEFAULTS["motor"]})
    model = _checked("model", ReferenceModelParams, _num(values, "model", "omega_n"), _num(values, "model", "zeta"))

    o = {k: values["objective"][k] for k in DEFAULTS["objective"]}
    q11, q12, q22 = (_num(values, "objective", k) for k in ("q11", "q12", "q22"))
    penalty = _num(values, "objective", "divergence_penalty")
    if not penalty > 0:
        raise ValidationError("divergence_penalty", "must be positive")
    for key in ("alpha_w", "beta_w"):
        if _num(values, "objective", key) < 0:
            raise ValidationError(key, "must be non-negative")
    if not q11 > 0 or q11 * q22 - q12 * q12 <= 0:
        raise ValidationError("q11", "Q must be positive definite")
    horizon = _num(values, "objective", "horizon")
    dt = _num(values, "objective", "dt")
    if not (0 < dt <= horizon):
        raise ValidationError("dt", "need 0 < dt <= horizon")
    spec = _checked(
        "objective",
        LyapunovObjectiveSpec,
        Q=((q11, q12), (q12, q22)),
        alpha_w=_num(values, "objective", "alpha_w"),
        beta_w=_num(values, "objective", "beta_w"),
        kp_nominal=_num(values, "objective", "kp_nominal"),
        kd_nominal=_num(values, "objective", "kd_nominal"),
        T=horizon,
        dt=dt,
        setpoint=_setpoint(o["setpoint"]),
        divergence_penalty=penalty,
    )
    pid_bounds = tuple(_pair(o[k], k) for k in ("kp_bounds", "ki_bounds", "kd_bounds"))

    lam = _num(values, "levy", "lambda")
    if not 1 < lam < 3 or lam == 2:
        raise ValidationError("lambda", "must lie in (1, 2) or (2, 3)")
    step = _num(values, "levy", "step")
    if not step > 0:
        raise ValidationError("step", "must be positive")
    levy = LevyParams(lam, step)

    def population(sec):
        n = _num(values, sec, "population", int)
        if n < 2:
            raise ValidationError("population", f"[{sec}] population must be at least 2, got {n}")
        it = _num(values, sec, "iterations", int)
        if it < 1:
            raise ValidationError("iterations", f"[{sec}] iterations must be at least 1")
        return n, it

    n, it = population("pso")
    pso = _checked("pso", PsoParams, *(_num(values, "pso", k) for k in ("c1", "c2", "w")), n, it)
    n, it = population("ffa")
    ffa = _checked("ffa", FireflyParams, *(_num(values, "ffa", k) for k in ("beta0", "gamma", "alpha")), n, it)

    local_n = ffa.population if algorithm.endswith("ffa") else pso.population
    if eval_budget is not None and eval_budget < local_n:
        raise ValidationError("eval_budget", f"must cover one population evaluation ({local_n})")

    dim = 3 if objective == "bldc-pid" else dimension
    try:
        axes = tuple(int(v) for v in values["mesh"]["axes"].split(","))
    except ValueError:
        raise ValidationError("axes", "expected two comma-separated indices") from None
    if len(axes) != 2 or axes[0] == axes[1] or not all(0 <= a < dim for a in axes):
        raise ValidationError("axes", f"need two distinct indices below {dim}")
    resolution = _num(values, "mesh", "resolution", int)
    if resolution < 2:
        raise ValidationError("resolution", "grid resolution must be at least 2")
    fixed_raw = values["mesh"]["fixed"]
    try:
        fixed = tuple(float(v) for v in fixed_raw.split(",")) if fixed_raw else (0.0,) * dim
    except ValueError:
        raise ValidationError("fixed", f"expected {dim} comma-separated numbers") from None
    if len(fixed) != dim:
        raise ValidationError("fixed", f"expected {dim} values, got {len(fixed)}")
    mesh = MeshRequest(axes, resolution, fixed)

    return RunConfig(
        objective=objective,
        dimension=dimension,
        bounds=bounds,
        algorithm=algorithm,
        seed=seed,
        output_dir=ex["output_dir"],
        eval_budget=eval_budget,
        global_fraction=global_fraction,
        tolerance=tolerance,
        motor=motor,
        model=model,
        objective_spec=spec,
        pid_bounds=pid_bounds,
        levy=levy,
        pso=pso,
        ffa=ffa,
        mesh=mesh,
    )

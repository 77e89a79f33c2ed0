"""Command-line harness.

    eagletune run CONFIG [--seed N] [--out DIR]
    eagletune mesh CONFIG [--out DIR]
    eagletune --dump-defaults

Exit codes: 0 success, 2 usage error, 3 configuration error, 4 runtime
error, 5 I/O error.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig, dump_defaults, load_config
from .errors import ConfigError, EagleTuneError
from .optimizers import RunResult, eagle_strategy_run, plain_run
from .plant import PIDGains, simulate_closed_loop

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_RUNTIME = 4
EXIT_IO = 5


@dataclass
class MeshGrid:
    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray  # shape (len(axis1), len(axis2))

    def to_csv(self) -> str:
        lines = ["axis1,axis2,value"]
        for i, a in enumerate(self.axis1):
            for j, b in enumerate(self.axis2):
                lines.append(f"{float(a)!r},{float(b)!r},{float(self.values[i, j])!r}")
        return "\n".join(lines) + "\n"


def execute(config: RunConfig) -> RunResult:
    objective = config.build_objective()
    if config.algorithm.startswith("es-"):
        return eagle_strategy_run(objective, config.eagle_config())
    algo = config.algorithm.upper()
    return plain_run(algo, objective, config.local_params, config.seed, config.eval_budget)


def run_experiment(config: RunConfig, out_dir: str | Path | None = None) -> int:
    """Run one experiment and write its outputs; returns a process exit code."""
    out = Path(out_dir if out_dir is not None else config.output_dir)
    try:
        result = execute(config)
    except EagleTuneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "history.csv").write_text(result.history_csv())
        (out / "summary.json").write_text(result.summary_json(config.echo()))
        if config.objective == "bldc-pid":
            spec = config.objective_spec
            log = simulate_closed_loop(
                config.motor,
                config.model,
                PIDGains(*map(float, result.best_position)),
                spec.setpoint,
                spec.T,
                spec.dt,
            )
            with open(out / "trajectory.csv", "w", newline="") as fh:
                log.to_csv(fh)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    except EagleTuneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    print(f"{result.algorithm} best_value={result.best_value!r} evals={result.evaluations_used} -> {out}")
    return EXIT_OK


def compute_mesh(config: RunConfig) -> MeshGrid:
    req = config.mesh
    objective = config.build_objective()
    i, j = req.axes
    n = req.resolution
    ax1 = np.linspace(objective.lower[i], objective.upper[i], n)
    ax2 = np.linspace(objective.lower[j], objective.upper[j], n)
    values = np.empty((n, n))
    point = np.array(req.fixed, dtype=float)
    for a, x in enumerate(ax1):
        for b, y in enumerate(ax2):
            point[i] = x
            point[j] = y
            values[a, b] = objective(point)
    return MeshGrid(ax1, ax2, values)


def export_mesh(config: RunConfig, out_dir: str | Path | None = None) -> Path:
    grid = compute_mesh(config)
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "mesh.csv"
    path.write_text(grid.to_csv())
    return path


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eagletune", description=__doc__.split("\n")[0])
    p.add_argument("--dump-defaults", action="store_true", help="print a complete default config and exit")
    sub = p.add_subparsers(dest="command")
    run = sub.add_parser("run", help="run an optimisation experiment")
    run.add_argument("config")
    run.add_argument("--seed", type=int, help="override the configured seed")
    run.add_argument("--out", help="override the configured output directory")
    mesh = sub.add_parser("mesh", help="export the objective over a 2-D grid")
    mesh.add_argument("config")
    mesh.add_argument("--out", help="override the configured output directory")
    return p


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.dump_defaults:
        sys.stdout.write(dump_defaults())
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    try:
        config = load_config(args.config)
        if getattr(args, "seed", None) is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed: must be an unsigned 64-bit integer")
            config = dataclasses.replace(config, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    if args.command == "run":
        return run_experiment(config, args.out)

    try:
        path = export_mesh(config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot write mesh: {exc}", file=sys.stderr)
        return EXIT_IO
    except (EagleTuneError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"mesh written to {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Time the compiled and pure-Python simulation kernels on the same workload.

    python benchmarks/bench_kernels.py [--repeat N] [--horizon SECONDS]

Also checks that both backends return bit-identical costs.
"""
import argparse
import time

from eagletune import _backend
from eagletune.plant import MotorParams, PIDGains, ReferenceModelParams, simulate_cost

CANDIDATES = [PIDGains(1, 0, 0), PIDGains(0.3, 3, 0), PIDGains(2, 2, 0.01), PIDGains(0.05, 0.5, 0.0)]


def bench(backend, repeat, horizon):
    motor, model = MotorParams(), ReferenceModelParams()
    costs = []
    t0 = time.perf_counter()
    for _ in range(repeat):
        for c in CANDIDATES:
            costs.append(simulate_cost(motor, model, c, 1.0, T=horizon, dt=1e-4, backend=backend).cost)
    per_run = (time.perf_counter() - t0) / (repeat * len(CANDIDATES))
    return per_run, costs


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--horizon", type=float, default=5.0)
    args = ap.parse_args()

    results = {}
    for name in _backend.available():
        results[name] = bench(name, args.repeat, args.horizon)
        steps = int(round(args.horizon / 1e-4))
        print(f"{name:>7}: {results[name][0] * 1e3:9.2f} ms per simulation ({steps} RK4 steps)")
    if len(results) == 2:
        speedup = results["python"][0] / results["cython"][0]
        identical = results["python"][1] == results["cython"][1]
        print(f"speedup: {speedup:.0f}x, costs bit-identical: {identical}")
    else:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation`")


if __name__ == "__main__":
    main()

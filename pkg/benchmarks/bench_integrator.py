"""Time the compiled and pure-Python geodesic integrators on the same workload.

    python3 benchmarks/bench_integrator.py --geodesics 200
"""

import argparse
import time

import numpy as np

from eqgeom import TangentVector, embed, make_economy
from eqgeom import geodesic


def workload(model, n, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        x = embed(model, rng.uniform(-1.5, 1.5), rng.uniform(-1, 1, model.L - 1))
        c = rng.normal(size=model.L)
        out.append((x.coords, c * rng.uniform(0.1, 1.0) / TangentVector(x, c).norm(model)))
    return out


def run(model, cases, backend):
    ends = []
    start = time.perf_counter()
    for x0, v0 in cases:
        ends.append(geodesic._integrate(model, x0, v0, backend=backend)[1][-1])
    return time.perf_counter() - start, np.array(ends)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--geodesics", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = ["python"] + (["cython"] if geodesic._kernels is not None else [])
    print(f"{'economy':<12} {'backend':<8} {'ms/geodesic':>12} {'speedup':>8} {'max |diff|':>11}")
    for family, L in [("constant", 3), ("tanh-sin", 3), ("tanh-sin", 5), ("fold", 3), ("fold", 5)]:
        model = make_economy(family, L)
        cases = workload(model, args.geodesics, args.seed)
        timings = {b: run(model, cases, b) for b in backends}
        base_time, base_end = timings["python"]
        for b, (elapsed, ends) in timings.items():
            print(f"{family + '-L' + str(L):<12} {b:<8} {1e3 * elapsed / len(cases):12.3f} "
                  f"{base_time / elapsed:8.1f} {np.max(np.abs(ends - base_end)):11.1e}")
    if len(backends) == 1:
        print("compiled kernel not available; only the pure-Python backend was timed")


if __name__ == "__main__":
    main()

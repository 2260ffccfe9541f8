"""Compare the compiled and pure-Python kernel backends.

Times the multi-step continuous and discrete kernels on the benchmark problem
and on a larger random instance, then full ``run`` calls of the three built-in
cases. Usage: ``python benchmarks/bench_kernels.py [--repeat 3]``.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from cfp import kernels
from cfp.algorithms import ProblemSpec
from cfp.convex import Ball, Box, Halfspace, Linear
from cfp.graph import Digraph
from cfp.harness import run
from cfp.scenarios import BENCH_INITIAL, benchmark_graph, benchmark_problem, paper_scenario


def random_instance(n, m, seed=0):
    rng = np.random.default_rng(seed)
    sets = [[Box(-np.ones(m), np.ones(m)), Ball(rng.normal(size=m), 2.0), Halfspace(rng.normal(size=m), 1.0)][i % 3]
            for i in range(n)]
    ineqs = [Linear(rng.normal(size=m), 0.5) for _ in range(n)]
    w = (rng.random((n, n)) < 0.2) * rng.uniform(0.5, 1.5, (n, n))
    np.fill_diagonal(w, 0)
    for i in range(n):
        w[i, (i + 1) % n] = 1.0
    return ProblemSpec(tuple(sets), tuple(ineqs)), Digraph(w), rng.normal(size=(n, m))


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases():
    spec, g = benchmark_problem(), benchmark_graph()
    yield "benchmark n=5 m=2", spec, g, np.array(BENCH_INITIAL)
    yield "random n=50 m=10", *random_instance(50, 10)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--steps", type=int, default=2000)
    args = ap.parse_args(argv)
    backends = sorted(kernels.BACKENDS)
    print(f"backends available: {', '.join(backends)}")
    rows = []
    for label, spec, g, x0 in kernel_cases():
        adj = np.ascontiguousarray(g.weights)
        alphas = 1.0 / (0.02 * np.arange(args.steps) + 1.0)
        for name in backends:
            k = kernels.get(name)

            def cont():
                x = x0.copy()
                k.continuous_steps(x, adj, spec.packed, 5.0, 5.0, 1e-3, args.steps, 1e9)

            def disc():
                x = x0.copy()
                k.discrete_steps(x, adj, 0.1, alphas, alphas, spec.packed, 1e9)

            rows.append((f"continuous_steps {label}", name, best_of(cont, args.repeat) / args.steps))
            rows.append((f"discrete_steps {label}", name, best_of(disc, args.repeat) / args.steps))
    for case in (1, 2, 3):
        sc = paper_scenario(case)
        for name in backends:
            kernels.use(name)
            rows.append((f"run case {case}", name, best_of(lambda: run(sc), max(1, args.repeat // 2))))
    kernels.use("cython" if "cython" in kernels.BACKENDS else "python")

    print(f"{'benchmark':40s} {'backend':8s} {'time':>12s} {'speedup':>8s}")
    base = {(b, n): t for b, n, t in rows}
    for bench, name, t in rows:
        unit = "s" if bench.startswith("run") else "s/step"
        ref = base.get((bench, "python"))
        speed = f"{ref / t:7.1f}x" if ref else ""
        print(f"{bench:40s} {name:8s} {t:10.3g} {unit:6s} {speed}")


if __name__ == "__main__":
    main()

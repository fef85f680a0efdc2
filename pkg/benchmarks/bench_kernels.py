#!/usr/bin/env python3
"""Benchmark the compiled survival-curve kernels against the numpy fallback.

Sizes mirror real workloads: (n=350, m=350) is one training step on a
default minibatch, (n=1000, m=900) a large-batch step, (n=4000, m=2500) an
evaluation-scale pass. Run after building the extension:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from survmatch._kernels import _fallback, available_backends

BACKENDS = {"numpy": _fallback}
if "cython" in available_backends():
    from survmatch._kernels import _speedups

    BACKENDS["cython"] = _speedups

SIZES = [(350, 350), (1000, 900), (4000, 2500)]
REPEAT = 20


def _case(rng, n, m):
    t_hat = rng.exponential(2.0, n)
    y = (rng.random(n) < 0.7).astype(float)
    grid = np.unique(np.round(rng.exponential(2.0, m), 6))
    cdf = np.sort(rng.random((n, grid.size)), axis=1)
    g = rng.standard_normal(grid.size)
    return t_hat, y, grid, cdf, g


def _time(fn):
    best = np.inf
    for _ in range(REPEAT):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    rng = np.random.default_rng(0)
    print(f"available backends: {', '.join(BACKENDS)}")
    header = f"{'kernel':<22}{'n x m':<14}" + "".join(f"{name:>12}" for name in BACKENDS)
    if len(BACKENDS) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for n, m in SIZES:
        t_hat, y, grid, cdf, g = _case(rng, n, m)
        tau = 0.01 * float(t_hat.max())
        kernels = {
            "pkm_sums": lambda impl: impl.pkm_sums(t_hat, y, grid),
            "dkm_sums": lambda impl: impl.dkm_sums(cdf, y, grid),
            "smooth fwd+vjp": lambda impl: impl.smooth_pkm_vjp(
                impl.smooth_pkm_forward(t_hat, y, grid, tau)[1], g
            ),
        }
        for name, run in kernels.items():
            times = {bname: _time(lambda: run(impl)) for bname, impl in BACKENDS.items()}
            row = f"{name:<22}{f'{n} x {grid.size}':<14}"
            row += "".join(f"{1e3 * t:>10.2f}ms" for t in times.values())
            if len(times) == 2:
                row += f"{times['numpy'] / times['cython']:>9.1f}x"
            print(row)


if __name__ == "__main__":
    main()

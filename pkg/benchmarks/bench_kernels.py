#!/usr/bin/env python3
"""Benchmark the compiled kernel extension against the pure NumPy backend.

Times the hot per-iteration work of the stopping criterion: the chi-squared
CDF, the OAS shrinkage intensity, the shrunk-covariance solve (both inversion
paths) and the pairwise similarity statistics, plus the composed
credibility-statistic pipeline. Run from the repository root::

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from gradstop._kernels import get_backend


def best_of(func, repeats=5, min_time=0.05):
    """Best observed per-call time, auto-scaling the inner loop count."""
    calls = 1
    while True:
        start = time.perf_counter()
        for _ in range(calls):
            func()
        elapsed = time.perf_counter() - start
        if elapsed >= min_time:
            break
        calls *= 4
    best = elapsed
    for _ in range(repeats - 1):
        start = time.perf_counter()
        for _ in range(calls):
            func()
        best = min(best, time.perf_counter() - start)
    return best / calls


def centered(G):
    n = G.shape[0]
    return np.ascontiguousarray((G - G.mean(axis=0)) / np.sqrt(n))


def pipeline(backend, G, gc, g_bar, woodbury):
    tr, tr2 = backend.gram_traces(gc)
    eps = backend.oas_epsilon_from_traces(tr, tr2, gc.shape[0], gc.shape[1])
    x, _ = backend.shrunk_solve(gc, g_bar, eps, tr, woodbury)
    z = G.shape[0] * float(g_bar @ x)
    return backend.chi2_cdf(z, G.shape[1])


def main():
    backends = {"python": get_backend("python")}
    try:
        backends["compiled"] = get_backend("compiled")
    except ImportError:
        print("compiled backend not built; benchmarking the pure backend only")

    rng = np.random.default_rng(0)
    rows = []

    for d in (2, 50, 5000):
        x = 0.9 * d
        times = {
            name: best_of(lambda be=be: be.chi2_cdf(x, d))
            for name, be in backends.items()
        }
        rows.append((f"chi2_cdf(d={d})", times))

    for n, d in ((80, 40), (200, 50), (50, 400)):
        G = np.ascontiguousarray(rng.standard_normal((n, d)) + 0.2)
        gc = centered(G)
        g_bar = G.mean(axis=0)
        tr, _ = backends["python"].gram_traces(gc)
        eps = backends["python"].oas_epsilon(gc)
        woodbury = d > n
        times = {
            name: best_of(lambda be=be: be.oas_epsilon(gc))
            for name, be in backends.items()
        }
        rows.append((f"oas_epsilon({n}x{d})", times))
        times = {
            name: best_of(
                lambda be=be: be.shrunk_solve(gc, g_bar, eps, tr, woodbury)
            )
            for name, be in backends.items()
        }
        path = "woodbury" if woodbury else "direct"
        rows.append((f"shrunk_solve({n}x{d}, {path})", times))
        times = {
            name: best_of(lambda be=be: be.pairwise_sign_cos(G))
            for name, be in backends.items()
        }
        rows.append((f"pairwise_sign_cos({n}x{d})", times))
        times = {
            name: best_of(lambda be=be: pipeline(be, G, gc, g_bar, woodbury))
            for name, be in backends.items()
        }
        rows.append((f"criterion pipeline({n}x{d})", times))

    names = list(backends)
    header = f"{'kernel':<34}" + "".join(f"{name:>14}" for name in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, times in rows:
        line = f"{label:<34}" + "".join(f"{times[name] * 1e6:>12.1f}us" for name in names)
        if len(names) == 2:
            line += f"{times['python'] / times['compiled']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()

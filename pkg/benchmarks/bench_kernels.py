"""Timing comparison of the jitted kernels against the numpy fallbacks.

Run:  python benchmarks/bench_kernels.py
The jitted path must be importable for the comparison; a warmup call
excludes compilation time from the measurement.
"""

import time

import numpy as np

from qhydro import kernels
from qhydro._jit import JIT_ENABLED


def timeit(fn, *args, repeat=5):
    fn(*args)  # warmup (and JIT compilation)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rows = []

    t_grid = np.linspace(0.0, 50.0, 2001)
    args = (t_grid, 1.0, 0.3, 1.0, 32)
    rows.append(("action_rk4 (2k pts x 32 substeps)",
                 timeit(kernels._action_rk4_py, *args),
                 timeit(kernels.action_rk4, *args)))

    rhs = np.geomspace(1e-8, 1e6, 20000)
    rows.append(("t37_roots (20k targets)",
                 timeit(kernels._t37_roots_py, rhs, 1.0),
                 timeit(kernels.t37_roots, rhs, 1.0)))
    rhs39 = np.geomspace(1e-8, 1e2, 20000)
    rows.append(("t39_roots (20k targets)",
                 timeit(kernels._t39_roots_py, rhs39, 1.0, 0.1),
                 timeit(kernels.t39_roots, rhs39, 1.0, 0.1)))

    rng = np.random.default_rng(0)
    n = 1024
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    psi_half = rng.normal(size=n) + 1j * rng.normal(size=n)
    rows.append(("wigner_correlation (1024^2)",
                 timeit(kernels._wigner_corr_py, psi, psi_half),
                 timeit(kernels.wigner_correlation, psi, psi_half)))

    active = "numba" if JIT_ENABLED else "numpy (QHYDRO_DISABLE_JIT set or numba missing)"
    print(f"active kernel path: {active}\n")
    print(f"{'kernel':40s} {'numpy path':>12s} {'active path':>12s} {'speedup':>8s}")
    for name, t_py, t_active in rows:
        speedup = t_py / t_active if t_active > 0 else float("nan")
        print(f"{name:40s} {t_py * 1e3:10.2f}ms {t_active * 1e3:10.2f}ms {speedup:7.1f}x")


if __name__ == "__main__":
    main()

"""Benchmark the compiled kernels against their pure-NumPy twins.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Times the three hot kernels (Jacobi eigendecomposition, algebraic-loop fixed
point, RK4 closed-loop integration) on representative problem sizes and prints
a speedup table.
"""

import argparse
import time

import numpy as np

from lurecert import backend


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def make_cases(rng):
    cases = []

    for dim in (4, 6, 9, 12):
        mats = []
        for _ in range(200):
            S = rng.standard_normal((dim, dim))
            mats.append(S + S.T)

        def run_eig(impl, mats=mats):
            for S in mats:
                impl.jacobi_eig(S)

        cases.append((f"jacobi_eig dim={dim} x200", run_eig))

    m = 4
    D = rng.standard_normal((m, m))
    D *= 0.6 / np.linalg.norm(D, 2)
    z_bp = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    w_bp = np.array([-0.8, -0.5, 0.0, 0.5, 0.8])
    cxs = rng.standard_normal((2000, m))

    def run_fp(impl):
        for cx in cxs:
            impl.fixed_point_output(cx, D, z_bp, w_bp, cx, 1e-12, 10_000)

    cases.append(("fixed_point_output m=4 x2000", run_fp))

    A = -np.eye(2) + 0.3 * rng.standard_normal((2, 2))
    A -= (max(np.linalg.eigvals(A).real.max(), 0.0) + 0.5) * np.eye(2)
    B = rng.standard_normal((2, m))
    C = rng.standard_normal((m, 2))
    x0 = np.array([0.5, -0.5])

    def run_rk4(impl):
        impl.rk4_closed_loop(A, B, C, D, z_bp, w_bp, x0, 1e-3, 10_000, 1e-12, 10_000)

    cases.append(("rk4_closed_loop 10k steps", run_rk4))
    return cases


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    py = backend.get_backend("py")
    try:
        cy = backend.get_backend("cy")
    except ImportError:
        print("compiled backend not available; only timing the pure-Python kernels")
        cy = None

    rng = np.random.default_rng(42)
    print(f"{'kernel':<34} {'python':>10} {'cython':>10} {'speedup':>8}")
    for name, run in make_cases(rng):
        t_py = _time(lambda: run(py), args.repeats)
        if cy is None:
            print(f"{name:<34} {t_py * 1e3:9.2f}ms {'-':>10} {'-':>8}")
            continue
        t_cy = _time(lambda: run(cy), args.repeats)
        print(f"{name:<34} {t_py * 1e3:9.2f}ms {t_cy * 1e3:9.2f}ms {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()

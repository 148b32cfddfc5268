"""Time the numpy kernels against the compiled ones.

Run from the repository root after installing the package:

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is timed best-of-N on a fixed workload, so numbers are
comparable across runs on the same machine.
"""

import argparse
import time

import numpy as np

from wigflux import _kernels


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def _bench_fp_rhs(impl):
    n = 256
    h = 0.05
    xs = np.arange(-2, n + 2) * h + 0.5 * h - 0.5 * n * h
    rng = np.random.default_rng(1)
    w = np.zeros((n + 4, n + 4))
    w[2:-2, 2:-2] = rng.random((n, n)) + 0.1
    dw = np.zeros_like(w)
    fx = np.zeros((n + 2, n + 2))
    fy = np.zeros((n + 2, n + 2))
    coeffs = (-0.5, 1.0, -1.0, -0.5, 0.0, 0.0, 0.2, 0.0, 0.2, 0.0)

    def run():
        for _ in range(50):
            impl.fp_rhs(w, dw, fx, fy, xs, xs, h, *coeffs)
    return run


def _bench_ou_paths(impl):
    rng = np.random.default_rng(2)
    n_paths, n_steps = 4096, 200
    z = rng.normal(size=(n_paths, n_steps)) \
        + 1j * rng.normal(size=(n_paths, n_steps))
    eta_dt = np.zeros(n_steps, dtype=complex)
    a = np.empty((n_paths, n_steps + 1), dtype=complex)
    a[:, 0] = 1.0

    def run():
        impl.ou_paths(a, z, eta_dt, 0.999 - 0.001j, 0.02)
    return run


def _bench_dephasing_paths(impl):
    rng = np.random.default_rng(3)
    n_paths, n_steps = 4096, 200
    z = rng.normal(size=(n_paths, n_steps))
    a = np.empty((n_paths, n_steps + 1), dtype=complex)
    a[:, 0] = 1.0

    def run():
        impl.dephasing_paths(a, z, 0.999 - 0.001j, 0.02)
    return run


def _bench_sigma(impl):
    rng = np.random.default_rng(4)
    n_paths, n_pts = 4096, 201
    a = 0.5 * (rng.normal(size=(n_paths, n_pts))
               + 1j * rng.normal(size=(n_paths, n_pts)))
    mu = np.zeros(n_pts, dtype=complex)
    s = np.full(n_pts, 0.7)
    m = np.zeros(n_pts, dtype=complex)
    out = np.empty(n_paths)

    def run():
        impl.sigma_accumulate(a, mu, s, m, 1.25, out)
    return run


_CASES = [
    ("fp_rhs 256^2 x50", _bench_fp_rhs),
    ("ou_paths 4096x200", _bench_ou_paths),
    ("dephasing 4096x200", _bench_dephasing_paths),
    ("sigma 4096x200", _bench_sigma),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5,
                        help="keep the best of this many timings")
    args = parser.parse_args()

    backends = {"python": _kernels.get_backend("python")}
    try:
        backends["cython"] = _kernels.get_backend("cython")
    except ImportError:
        print("compiled backend unavailable; timing numpy only")

    print(f"active backend: {_kernels.BACKEND}")
    header = f"{'kernel':<22}" + "".join(f"{name:>12}" for name in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for label, factory in _CASES:
        times = {name: _best_of(factory(impl), args.repeat)
                 for name, impl in backends.items()}
        row = f"{label:<22}" + "".join(f"{times[n] * 1e3:>10.2f}ms"
                                       for n in backends)
        if len(times) == 2:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()

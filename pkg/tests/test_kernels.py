"""Compiled and numpy kernel backends must agree element by element."""

import os
import subprocess
import sys

import numpy as np
import pytest

from wigflux import _kernels


def _both_backends():
    py = _kernels.get_backend("python")
    try:
        cy = _kernels.get_backend("cython")
    except ImportError:
        pytest.skip("compiled backend unavailable")
    return py, cy


def test_backend_report():
    assert _kernels.BACKEND in ("python", "cython")
    assert _kernels.get_backend() is _kernels.get_backend(_kernels.BACKEND)
    with pytest.raises(ValueError):
        _kernels.get_backend("fortran")


def test_env_override_forces_python():
    code = ("import wigflux._kernels as k; import sys; "
            "sys.exit(0 if k.BACKEND == 'python' else 1)")
    env = dict(os.environ, WIGFLUX_PURE_PYTHON="1")
    proc = subprocess.run([sys.executable, "-c", code], env=env)
    assert proc.returncode == 0


def test_fp_rhs_backends_agree():
    py, cy = _both_backends()
    rng = np.random.default_rng(31)
    n = 48
    h = 0.11
    xs = np.arange(-2, n + 2) * h + 0.5 * h - 0.5 * n * h
    w = np.zeros((n + 4, n + 4))
    w[2:-2, 2:-2] = rng.random((n, n)) + 0.1
    coeff_sets = [
        (-0.5, 1.0, -1.0, -0.5, 0.02, -0.01, 0.2, 0.05, 0.15, 0.0),
        (0.0, 0.7, -0.7, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.3),
    ]
    for coeffs in coeff_sets:
        outs = []
        for impl in (py, cy):
            dw = np.zeros((n + 4, n + 4))
            fx = np.zeros((n + 2, n + 2))
            fy = np.zeros((n + 2, n + 2))
            impl.fp_rhs(w.copy(), dw, fx, fy, xs, xs, h, *coeffs)
            outs.append(dw)
        np.testing.assert_allclose(outs[0], outs[1], rtol=1e-12, atol=1e-13)


def test_ou_paths_backends_agree():
    py, cy = _both_backends()
    rng = np.random.default_rng(32)
    n_paths, n_steps = 40, 25
    z = rng.normal(size=(n_paths, n_steps)) \
        + 1j * rng.normal(size=(n_paths, n_steps))
    eta_dt = 0.01 * (rng.normal(size=n_steps) + 1j * rng.normal(size=n_steps))
    start = rng.normal(size=n_paths) + 1j * rng.normal(size=n_paths)
    outs = []
    for impl in (py, cy):
        a = np.empty((n_paths, n_steps + 1), dtype=complex)
        a[:, 0] = start
        impl.ou_paths(a, z, eta_dt, 0.998 - 0.02j, 0.03)
        outs.append(a)
    np.testing.assert_allclose(outs[0], outs[1], rtol=1e-13, atol=0)


def test_dephasing_paths_backends_agree():
    py, cy = _both_backends()
    rng = np.random.default_rng(33)
    n_paths, n_steps = 40, 25
    z = rng.normal(size=(n_paths, n_steps))
    start = rng.normal(size=n_paths) + 1j * rng.normal(size=n_paths)
    outs = []
    for impl in (py, cy):
        a = np.empty((n_paths, n_steps + 1), dtype=complex)
        a[:, 0] = start
        impl.dephasing_paths(a, z, 0.999 - 0.03j, 0.02)
        outs.append(a)
    np.testing.assert_allclose(outs[0], outs[1], rtol=1e-13, atol=0)


def test_sigma_accumulate_backends_agree():
    py, cy = _both_backends()
    rng = np.random.default_rng(34)
    n_paths, n_pts = 30, 20
    a = 0.4 * (rng.normal(size=(n_paths, n_pts))
               + 1j * rng.normal(size=(n_paths, n_pts)))
    mu = 0.1 * (rng.normal(size=n_pts) + 1j * rng.normal(size=n_pts))
    s = 0.6 + 0.1 * rng.random(n_pts)
    m = 0.1 * (rng.normal(size=n_pts) + 1j * rng.normal(size=n_pts))
    outs = []
    for impl in (py, cy):
        out = np.empty(n_paths)
        impl.sigma_accumulate(a, mu, s, m, 1.25, out)
        outs.append(out)
    np.testing.assert_allclose(outs[0], outs[1], rtol=1e-11, atol=1e-12)

"""Stochastic phase-space paths and the integral fluctuation theorem.

Paths realize the phase-space flow of a thermal contact (Euler-Maruyama
with additive complex noise) or of pure dephasing (exact exponential drift
with multiplicative conjugate noise). Along each damped path an entropy
functional Sigma accumulates, per step,

    ln W(A_k, t_k) - ln W(A_{k+1}, t_{k+1})
        + kfac (|A_k|^2 - |A_{k+1}|^2),

where W is the evolving Gaussian ensemble on the same time grid and the
kfac term is the log-ratio of the forward transition density to the
conjugate-reversed one (the state conjugations drop out: the reversed
process starts from the conjugated final ensemble evaluated at the
conjugated point). At thermal equilibrium Sigma vanishes identically;
in general <exp(-Sigma)> = 1 within sampling error and <Sigma>/tau
estimates the time-averaged production rate.

Randomness comes from per-path Philox streams keyed (seed, path index), so
ensembles are reproducible and independent of the chunk size.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import StabilityError, UnsupportedOperation
from .model import (
    Dephasing,
    HamiltonianSpec,
    Thermal,
    Trajectory,
    evolve_fixed_grid,
)
from .phasespace import GaussianState, wigner_eval

# explicit schemes below are first order; keep the per-step rate tiny
_RATE_DT_LIMIT = 0.01


@dataclass(frozen=True)
class LangevinSpec:
    """Euler-Maruyama grid for damped-mode paths.

    full_ratio keeps the exact discrete transition-density ratio in the
    entropy functional instead of its leading 1/sigma truncation.
    """

    dt: float
    n_steps: int
    full_ratio: bool = False

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive and finite")
        if self.n_steps < 1:
            raise ValueError("need at least one step")


@dataclass(frozen=True)
class DephasingSpec:
    dt: float
    n_steps: int

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive and finite")
        if self.n_steps < 1:
            raise ValueError("need at least one step")


@dataclass(frozen=True)
class PathRecord:
    """One stored path on its time grid."""

    times: np.ndarray
    points: np.ndarray


@dataclass
class TrajectoryEnsemble:
    """Sampled ensemble: final points, optional Sigma, optional moments."""

    times: np.ndarray
    final: np.ndarray
    sigma: Optional[np.ndarray]
    moments: Optional[Trajectory]
    kept: list
    seed: int

    @property
    def n_paths(self) -> int:
        return int(self.final.shape[0])

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])


def kfac_value(bath: Thermal, ham: HamiltonianSpec, dt: float,
               full_ratio: bool = False) -> float:
    """Coefficient of |A_k|^2 - |A_{k+1}|^2 in the per-step functional.

    The exact discrete ratio gives (|u~|^2 - 1)/(gamma sigma dt) with
    u~ = 1 + (i omega_c + gamma/2) dt; the default truncates this to the
    leading term 1/sigma.
    """
    if full_ratio:
        ut2 = (1.0 + 0.5 * bath.gamma * dt) ** 2 + (ham.omega_c * dt) ** 2
        return (ut2 - 1.0) / (bath.gamma * bath.sigma * dt)
    return 1.0 / bath.sigma


def propagator_density(a_next, a_prev, dt: float, bath: Thermal,
                       ham: HamiltonianSpec) -> np.ndarray:
    """One-step transition density of the damped-mode walk.

    K(a'|a) = e^{gamma dt} / (pi gamma sigma dt)
              exp(-|a' u~ - a|^2 / (gamma sigma dt)),
    with u~ = 1 + (i omega_c + gamma/2) dt. Its normalization over a' is
    1 + dt^2 (gamma^2/4 - omega_c^2) + O(dt^3).
    """
    var = bath.gamma * bath.sigma * dt
    ut = 1.0 + (1j * ham.omega_c + 0.5 * bath.gamma) * dt
    nxt = np.asarray(a_next, dtype=complex)
    prv = np.asarray(a_prev, dtype=complex)
    return math.exp(bath.gamma * dt) / (math.pi * var) \
        * np.exp(-np.abs(nxt * ut - prv) ** 2 / var)


def kernel_term_sum(points, dt: float, bath: Thermal,
                    ham: HamiltonianSpec) -> float:
    """Sum of ln K(A_{k+1}|A_k) - ln K(conj(A_k)|conj(A_{k+1})) on a path.

    Telescopes to kfac_full (|A_0|^2 - |A_K|^2) and is exactly odd under
    conjugate reversal of the path.
    """
    a = np.asarray(points, dtype=complex)
    fw = propagator_density(a[1:], a[:-1], dt, bath, ham)
    bw = propagator_density(np.conj(a[:-1]), np.conj(a[1:]), dt, bath, ham)
    return float(np.sum(np.log(fw) - np.log(bw)))


def accumulate_sigma(points, moments: Trajectory, bath: Thermal,
                     ham: HamiltonianSpec, full_ratio: bool = False) -> float:
    """Entropy functional of a single path; plain reference implementation.

    `points` holds one complex value per grid time of `moments`.
    """
    a = np.asarray(points, dtype=complex)
    if a.shape[0] != moments.times.shape[0]:
        raise ValueError("path and moment grid lengths differ")
    dt = float(moments.times[1] - moments.times[0])
    kfac = kfac_value(bath, ham, dt, full_ratio)
    total = 0.0
    for k in range(a.shape[0] - 1):
        w0 = wigner_eval(moments.states[k], a[k])
        w1 = wigner_eval(moments.states[k + 1], a[k + 1])
        total += math.log(w0) - math.log(w1)
        total += kfac * (abs(a[k]) ** 2 - abs(a[k + 1]) ** 2)
    return total


def ensemble_sigma(paths, moments: Trajectory, bath: Thermal,
                   ham: HamiltonianSpec, full_ratio: bool = False) -> np.ndarray:
    """Entropy functional of each row of `paths`, kernel-backed."""
    a = np.ascontiguousarray(paths, dtype=complex)
    dt = float(moments.times[1] - moments.times[0])
    kfac = kfac_value(bath, ham, dt, full_ratio)
    out = np.empty(a.shape[0])
    _kernels.sigma_accumulate(a, moments.mu_array(), moments.s_array(),
                              moments.m_array(), kfac, out)
    return out


def _check_rate_dt(rate: float, dt: float) -> None:
    if rate * dt > _RATE_DT_LIMIT * (1.0 + 1e-12):
        raise StabilityError(
            f"per-step rate {rate * dt:.3e} exceeds the explicit-scheme "
            f"limit {_RATE_DT_LIMIT}; reduce dt")


def _initial_points(state: GaussianState, draws: np.ndarray,
                    chol: np.ndarray) -> np.ndarray:
    xy = draws @ chol.T
    return state.mu + xy[:, 0] + 1j * xy[:, 1]


def sample_paths(state: GaussianState, bath: Thermal, ham: HamiltonianSpec,
                 spec: LangevinSpec, n_paths: int, seed: int, t0: float = 0.0,
                 keep_paths: int = 0, chunk_size: int = 8192,
                 compute_sigma: bool = True) -> TrajectoryEnsemble:
    """Sample Euler-Maruyama paths of a thermally damped mode.

    Initial points are drawn from the Gaussian state. Each path owns the
    Philox stream keyed (seed, path index) and consumes two normals for
    the initial point followed by two per step.
    """
    if not isinstance(bath, Thermal):
        raise UnsupportedOperation("path sampling supports thermal contacts")
    _check_rate_dt(bath.gamma, spec.dt)
    if compute_sigma and ham.pump is not None:
        raise UnsupportedOperation(
            "the entropy functional covers undriven relaxation; pass "
            "compute_sigma=False to sample driven paths")
    if n_paths < 1:
        raise ValueError("need at least one path")

    dt, n_steps = spec.dt, spec.n_steps
    moments = evolve_fixed_grid(state, bath, ham, t0, dt, n_steps)
    mu_arr = moments.mu_array()
    s_arr = moments.s_array()
    m_arr = moments.m_array()
    chol = np.linalg.cholesky(state.real_covariance())
    u = complex(1.0 - (1j * ham.omega_c + 0.5 * bath.gamma) * dt)
    amp = math.sqrt(0.5 * bath.gamma * bath.sigma * dt)
    eta_dt = np.array([ham.eta(t0 + k * dt) * dt for k in range(n_steps)],
                      dtype=complex)
    kfac = kfac_value(bath, ham, dt, spec.full_ratio)

    sigma = np.empty(n_paths) if compute_sigma else None
    final = np.empty(n_paths, dtype=complex)
    kept: list = []
    for start in range(0, n_paths, chunk_size):
        stop = min(start + chunk_size, n_paths)
        draws = np.empty((stop - start, 2 + 2 * n_steps))
        for i in range(stop - start):
            rng = np.random.Generator(np.random.Philox(key=[seed, start + i]))
            draws[i] = rng.standard_normal(2 + 2 * n_steps)
        a = np.empty((stop - start, n_steps + 1), dtype=complex)
        a[:, 0] = _initial_points(state, draws[:, :2], chol)
        z = draws[:, 2::2] + 1j * draws[:, 3::2]
        _kernels.ou_paths(a, z, eta_dt, u, amp)
        final[start:stop] = a[:, -1]
        if compute_sigma:
            out = np.empty(stop - start)
            _kernels.sigma_accumulate(a, mu_arr, s_arr, m_arr, kfac, out)
            sigma[start:stop] = out
        while len(kept) < keep_paths and len(kept) < stop:
            kept.append(PathRecord(moments.times.copy(),
                                   a[len(kept) - start].copy()))
    return TrajectoryEnsemble(moments.times, final, sigma, moments, kept, seed)


def dephasing_ensemble(state: GaussianState, bath: Dephasing,
                       ham: HamiltonianSpec, spec: DephasingSpec,
                       n_paths: int, seed: int, t0: float = 0.0,
                       keep_paths: int = 0,
                       chunk_size: int = 8192) -> TrajectoryEnsemble:
    """Sample pure-dephasing paths with multiplicative conjugate noise.

    The drift factor is the exact exponential exp((-i omega_c - lam) dt),
    so lam = 0 rotates without touching |A|. The sampled equation's own
    ensemble first moment decays at rate lam. Each path consumes two
    normals for the initial point and one real normal per step.
    """
    if not isinstance(bath, Dephasing):
        raise UnsupportedOperation("dephasing ensemble needs a dephasing bath")
    if ham.pump is not None:
        raise UnsupportedOperation("dephasing paths are undriven")
    _check_rate_dt(bath.lam, spec.dt)
    if n_paths < 1:
        raise ValueError("need at least one path")

    dt, n_steps = spec.dt, spec.n_steps
    drift = cmath.exp((-1j * ham.omega_c - bath.lam) * dt)
    amp = math.sqrt(2.0 * bath.lam * dt)
    chol = np.linalg.cholesky(state.real_covariance())
    times = t0 + dt * np.arange(n_steps + 1)

    final = np.empty(n_paths, dtype=complex)
    kept: list = []
    for start in range(0, n_paths, chunk_size):
        stop = min(start + chunk_size, n_paths)
        draws = np.empty((stop - start, 2 + n_steps))
        for i in range(stop - start):
            rng = np.random.Generator(np.random.Philox(key=[seed, start + i]))
            draws[i] = rng.standard_normal(2 + n_steps)
        a = np.empty((stop - start, n_steps + 1), dtype=complex)
        a[:, 0] = _initial_points(state, draws[:, :2], chol)
        z = np.ascontiguousarray(draws[:, 2:])
        _kernels.dephasing_paths(a, z, drift, amp)
        final[start:stop] = a[:, -1]
        while len(kept) < keep_paths and len(kept) < stop:
            kept.append(PathRecord(times.copy(), a[len(kept) - start].copy()))
    return TrajectoryEnsemble(times, final, None, None, kept, seed)


@dataclass(frozen=True)
class FtEstimate:
    """Jackknife estimate of <exp(-Sigma)>."""

    mean: float
    stderr: float
    n_paths: int

    @property
    def deviation(self) -> float:
        """|mean - 1| in units of the standard error."""
        if self.stderr == 0.0:
            return 0.0 if self.mean == 1.0 else math.inf
        return abs(self.mean - 1.0) / self.stderr


def fluctuation_theorem_estimator(sigma) -> FtEstimate:
    """Delete-one jackknife for <exp(-Sigma)>, which should equal 1."""
    w = np.exp(-np.asarray(sigma, dtype=float))
    n = w.shape[0]
    if n < 2:
        raise ValueError("need at least two paths")
    total = float(np.sum(w))
    loo = (total - w) / (n - 1)
    center = float(np.mean(loo))
    var = (n - 1) / n * float(np.sum((loo - center) ** 2))
    return FtEstimate(float(np.mean(w)), math.sqrt(var), n)


__all__ = [
    "DephasingSpec",
    "FtEstimate",
    "LangevinSpec",
    "PathRecord",
    "TrajectoryEnsemble",
    "accumulate_sigma",
    "dephasing_ensemble",
    "ensemble_sigma",
    "fluctuation_theorem_estimator",
    "kernel_term_sum",
    "kfac_value",
    "propagator_density",
    "sample_paths",
]

"""Direct grid integration of the phase-space continuity equation.

The Wigner function is sampled at cell centers of a square box [-L, L]^2
and marched with RK4 on the flux form dW/dt = -div F, where F carries the
rotation and pump drift, the damping drift, constant diffusion from a
thermal or squeezed contact, and the angular diffusion flux of dephasing.
Spatial derivatives are central, with two layers of zero ghost cells; the
scheme is second order in h, conserves mass up to boundary leakage, and
tracks the discrete occupation exactly for pure dephasing (again up to
boundary leakage).

This module is the independent oracle for the closed-form and quadrature
rates: grid_rates rebuilds Pi, Phi and dS/dt from nothing but the sampled
field and discrete difference quotients.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import AccuracyError, StabilityError
from .model import (
    Bath,
    Dephasing,
    HamiltonianSpec,
    Squeezed,
    effective_bath_moments,
)
from .phasespace import GaussianState, wigner_eval

_MASK_REL = 1e-12
# central differences ring at sharpening fronts; only clear negatives
# signal a blown-up step
_UNDERSHOOT_REL = 1e-6
_CFL_SAFETY = 0.2


@dataclass
class GridField:
    """Wigner samples w[i, j] = W(x_i, y_j) at cell centers of [-L, L]^2."""

    w: np.ndarray
    extent: float
    time: float = 0.0

    def __post_init__(self):
        self.w = np.ascontiguousarray(self.w, dtype=float)
        if self.w.ndim != 2 or self.w.shape[0] != self.w.shape[1]:
            raise ValueError("field must be square")
        if self.w.shape[0] < 8:
            raise ValueError("grid too small")
        if not (self.extent > 0.0 and math.isfinite(self.extent)):
            raise ValueError("extent must be positive")

    @property
    def n(self) -> int:
        return self.w.shape[0]

    @property
    def h(self) -> float:
        return 2.0 * self.extent / self.n

    def axis(self) -> np.ndarray:
        """Cell-center coordinates, x_i = -L + (i + 1/2) h."""
        return -self.extent + (np.arange(self.n) + 0.5) * self.h

    @classmethod
    def from_state(cls, state: GaussianState, extent: float, n: int,
                   time: float = 0.0) -> "GridField":
        x = -extent + (np.arange(n) + 0.5) * (2.0 * extent / n)
        pts = x[:, None] + 1j * x[None, :]
        return cls(wigner_eval(state, pts), extent, time)

    def mass(self) -> float:
        return float(np.sum(self.w)) * self.h ** 2

    def moments(self):
        """(mu, s, m) of the sampled field, normalized by its mass."""
        x = self.axis()
        alpha = x[:, None] + 1j * x[None, :]
        mass = float(np.sum(self.w))
        if mass <= 0.0:
            raise AccuracyError("field has no positive mass")
        mu = complex(np.sum(alpha * self.w) / mass)
        d = alpha - mu
        s = float(np.sum(np.abs(d) ** 2 * self.w) / mass)
        m = complex(np.sum(d * d * self.w) / mass)
        return mu, s, m

    def occupation(self) -> float:
        """<a'a> of the sampled field, normalized by its mass."""
        mu, s, _ = self.moments()
        return s + abs(mu) ** 2 - 0.5

    def entropy(self) -> float:
        """-sum W ln W h^2 over the cells with positive W."""
        pos = self.w[self.w > 0.0]
        return -float(np.sum(pos * np.log(pos))) * self.h ** 2


class GridStepper:
    """RK4 time stepper with preallocated padded workspaces.

    The workspaces carry two zero ghost layers; the kernels write only the
    interior, so the Dirichlet boundary is maintained for free.
    """

    def __init__(self, n: int, extent: float, bath: Bath,
                 ham: Optional[HamiltonianSpec] = None):
        self.n = n
        self.extent = float(extent)
        self.h = 2.0 * self.extent / n
        self.bath = bath
        self.ham = ham or HamiltonianSpec()
        npad = n + 4
        self._w = np.zeros((npad, npad))
        self._stage = np.zeros((npad, npad))
        self._k = np.zeros((npad, npad))
        self._acc = np.zeros((npad, npad))
        self._fx = np.zeros((n + 2, n + 2))
        self._fy = np.zeros((n + 2, n + 2))
        self._xs = -self.extent + (np.arange(npad) - 2 + 0.5) * self.h

    def max_diffusion(self) -> float:
        if isinstance(self.bath, Dephasing):
            # angular diffusion grows with radius; bound it at the corner
            return self.bath.lam * self.extent ** 2
        scale = math.exp(2.0 * self.bath.r) if isinstance(self.bath, Squeezed) \
            else 1.0
        return 0.25 * self.bath.gamma * self.bath.sigma * scale

    def cfl_limit(self) -> float:
        dmax = self.max_diffusion()
        if dmax <= 0.0:
            return math.inf
        return _CFL_SAFETY * self.h ** 2 / dmax

    def _coeffs(self, t: float):
        ham = self.ham
        eta = ham.eta(t)
        if isinstance(self.bath, Dephasing):
            return (0.0, ham.omega_c, -ham.omega_c, 0.0, eta.real, eta.imag,
                    0.0, 0.0, 0.0, 0.5 * self.bath.lam)
        g = self.bath.gamma
        big_n, m_t = effective_bath_moments(self.bath, t)
        return (-0.5 * g, ham.omega_c, -ham.omega_c, -0.5 * g,
                eta.real, eta.imag,
                0.25 * g * (big_n + 0.5 + m_t.real),
                0.25 * g * m_t.imag,
                0.25 * g * (big_n + 0.5 - m_t.real),
                0.0)

    def _rhs(self, w_pad: np.ndarray, t: float, out: np.ndarray) -> None:
        _kernels.fp_rhs(w_pad, out, self._fx, self._fy, self._xs, self._xs,
                        self.h, *self._coeffs(t))

    def _rk4(self, t: float, dt: float) -> None:
        w, stage, k, acc = self._w, self._stage, self._k, self._acc
        self._rhs(w, t, k)
        acc[:] = k
        np.multiply(k, 0.5 * dt, out=stage)
        stage += w
        self._rhs(stage, t + 0.5 * dt, k)
        acc += k
        acc += k
        np.multiply(k, 0.5 * dt, out=stage)
        stage += w
        self._rhs(stage, t + 0.5 * dt, k)
        acc += k
        acc += k
        np.multiply(k, dt, out=stage)
        stage += w
        self._rhs(stage, t + dt, k)
        acc += k
        acc *= dt / 6.0
        w += acc

    def run(self, field: GridField, dt: float, n_steps: int) -> GridField:
        """March the field n_steps RK4 steps of dt; returns a new field."""
        if field.n != self.n or abs(field.extent - self.extent) > 1e-15:
            raise ValueError("field does not match this stepper's grid")
        limit = self.cfl_limit()
        if dt > limit * (1.0 + 1e-12):
            raise StabilityError(
                f"dt = {dt:.3e} violates the diffusion limit {limit:.3e}")
        self._w[:] = 0.0
        self._w[2:-2, 2:-2] = field.w
        for k in range(n_steps):
            self._rk4(field.time + k * dt, dt)
            interior = self._w[2:-2, 2:-2]
            floor = -_UNDERSHOOT_REL * float(interior.max())
            if float(interior.min()) < floor:
                raise StabilityError(
                    f"negative undershoot beyond {floor:.3e} after step "
                    f"{k + 1}; refine the grid or shrink dt")
        return GridField(self._w[2:-2, 2:-2].copy(), self.extent,
                         field.time + n_steps * dt)


def evolve_grid(field: GridField, bath: Bath, ham: Optional[HamiltonianSpec],
                dt: float, n_steps: int) -> GridField:
    return GridStepper(field.n, field.extent, bath, ham).run(field, dt, n_steps)


@dataclass(frozen=True)
class GridRates:
    pi: float
    phi: float
    entropy_rate: float
    mass: float
    masked_fraction: float


def _central_gradients(w: np.ndarray, h: float):
    wp = np.zeros((w.shape[0] + 2, w.shape[1] + 2))
    wp[1:-1, 1:-1] = w
    gx = (wp[2:, 1:-1] - wp[:-2, 1:-1]) / (2.0 * h)
    gy = (wp[1:-1, 2:] - wp[1:-1, :-2]) / (2.0 * h)
    return gx, gy


def grid_rates(field: GridField, bath: Bath,
               ham: Optional[HamiltonianSpec] = None,
               entropy_step: Optional[float] = None) -> GridRates:
    """Pi, Phi and dS/dt rebuilt from the sampled field alone.

    Currents use central difference quotients; cells below 1e-12 of the
    field maximum are excluded from the |J|^2/W sums. dS/dt is a forward
    difference across a short internal evolution of span entropy_step
    (default 1e-3 over the bath rate), taken in as many RK4 substeps as
    the diffusion limit demands; a span much larger than one substep
    keeps roundoff in the entropy sums from polluting the quotient.
    """
    ham = ham or HamiltonianSpec()
    w = field.w
    h = field.h
    wmax = float(w.max())
    if wmax <= 0.0:
        raise AccuracyError("field has no positive values")
    mask = w >= _MASK_REL * wmax
    mass = field.mass()
    kept_mass = float(np.sum(w[mask])) * h ** 2
    masked_fraction = 1.0 - kept_mass / mass
    if masked_fraction > 0.5:
        raise AccuracyError(
            f"{masked_fraction:.2f} of the mass sits below the mask cut; "
            "the field is too poorly resolved for rate sums")

    x = field.axis()
    alpha = x[:, None] + 1j * x[None, :]
    gx, gy = _central_gradients(w, h)

    if isinstance(bath, Dephasing):
        ang = x[:, None] * gy - x[None, :] * gx
        pi = 0.5 * bath.lam * float(np.sum(ang[mask] ** 2 / w[mask])) * h ** 2
        phi = 0.0
    else:
        d_star = 0.5 * (gx + 1j * gy)
        j = 0.5 * bath.gamma * (alpha * w + bath.sigma * d_star)
        if isinstance(bath, Squeezed):
            ph = cmath.exp(1j * (bath.theta - 2.0 * bath.omega_s * field.time))
            c = math.cosh(bath.r)
            sh = math.sinh(bath.r)
            j = c * j + ph * sh * (bath.gamma * np.conj(alpha) * w - np.conj(j))
        pi = 4.0 / (bath.gamma * bath.sigma) \
            * float(np.sum(np.abs(j[mask]) ** 2 / w[mask])) * h ** 2
        mean_abs2 = float(np.sum(np.abs(alpha) ** 2 * w)) * h ** 2
        if isinstance(bath, Squeezed):
            big_n, m_t = effective_bath_moments(bath, field.time)
            occ = mean_abs2 - 0.5
            aa = complex(np.sum(alpha * alpha * w)) * h ** 2
            occ_b = math.cosh(2.0 * bath.r) * occ + math.sinh(bath.r) ** 2 \
                - (m_t.conjugate() * aa).real / bath.sigma
            phi = bath.gamma / bath.sigma * (occ_b - bath.nbar)
        else:
            phi = bath.gamma * (mean_abs2 / bath.sigma - 1.0)

    stepper = GridStepper(field.n, field.extent, bath, ham)
    rate = bath.lam if isinstance(bath, Dephasing) else bath.gamma
    if rate <= 0.0:
        raise AccuracyError("entropy rate needs a positive bath rate")
    span = entropy_step if entropy_step is not None else 1e-3 / rate
    limit = stepper.cfl_limit()
    n_sub = max(1, math.ceil(span / (0.8 * limit))) if math.isfinite(limit) \
        else 1
    stepped = stepper.run(field, span / n_sub, n_sub)
    dsdt = (stepped.entropy() - field.entropy()) / span

    return GridRates(float(pi), float(phi), float(dsdt), mass,
                     float(masked_fraction))


__all__ = [
    "GridField",
    "GridRates",
    "GridStepper",
    "evolve_grid",
    "grid_rates",
]

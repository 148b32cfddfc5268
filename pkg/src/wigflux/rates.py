"""Entropy production and flux rates in the Renyi-2 / Wigner convention.

The entropy is S = -int W ln W, so a Gaussian state has
S = (1/2) ln det Theta + 1 + ln pi. The production rate Pi is the
phase-space integral of |J|^2 / W over the irreversible current of the
working frame (the squeezed-frame current for a squeezed contact, the
angular current for dephasing), scaled by 4/(gamma sigma) for damping
contacts. The flux rate Phi is the part absorbed by the reservoir, and
dS/dt = Pi - Phi holds identically.

Three deliberately independent evaluation routes are provided so they can
cross-check each other: closed forms on the Gaussian moments, tensor
Gauss-Legendre quadrature of the defining integrals, and a reduction of the
same integrals to second and fourth moments by Wick pairing.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import AccuracyError, BalanceError, UnsupportedOperation
from .model import (
    Bath,
    Dephasing,
    HamiltonianSpec,
    Squeezed,
    Thermal,
    effective_bath_moments,
    energy_flux,
    evolve,
    moment_rhs,
    temperature_from_nbar,
)
from .phasespace import (
    GaussianState,
    fourth_moment,
    von_neumann_entropy,
    wigner_eval,
    wigner_log_gradient,
)


class Method(enum.Enum):
    CLOSED_FORM = "closed-form"
    QUADRATURE = "quadrature"
    QUADRATIC_FORM = "quadratic-form"


class CurrentKind(enum.Enum):
    """Which irreversible phase-space current to evaluate."""

    THERMAL = "thermal"
    SQUEEZED_LAB = "squeezed-lab"
    SQUEEZED_FRAME = "squeezed-frame"
    DEPHASING = "dephasing"


# ---------------------------------------------------------------------------
# Frame change and currents


def to_squeezed_frame(state: GaussianState, bath: Squeezed,
                      t: float = 0.0) -> GaussianState:
    """Moments in the frame where a squeezed contact looks thermal.

    Bogoliubov map b = a cosh r + a' e^{i phi} sinh r with
    phi = theta - 2 omega_s t; det Theta is invariant.
    """
    if not isinstance(bath, Squeezed):
        raise UnsupportedOperation("frame change is defined for squeezed baths")
    c = math.cosh(bath.r)
    sh = math.sinh(bath.r)
    ph = cmath.exp(1j * (bath.theta - 2.0 * bath.omega_s * t))
    mu, s, m = state.mu, state.s, state.m
    mu_b = c * mu + sh * ph * mu.conjugate()
    s_b = math.cosh(2.0 * bath.r) * s \
        + math.sinh(2.0 * bath.r) * (m * ph.conjugate()).real
    m_b = c * c * m + 2.0 * c * sh * ph * s + sh * sh * ph * ph * m.conjugate()
    return GaussianState(mu_b, s_b, m_b)


def _infer_kind(bath: Bath) -> CurrentKind:
    if isinstance(bath, Thermal):
        return CurrentKind.THERMAL
    if isinstance(bath, Squeezed):
        return CurrentKind.SQUEEZED_LAB
    return CurrentKind.DEPHASING


def current_eval(points, state: GaussianState, bath: Bath, t: float = 0.0,
                 kind: Optional[CurrentKind] = None) -> np.ndarray:
    """Irreversible phase-space current at an array of complex points.

    THERMAL uses the bare thermal form (gamma/2)(alpha W + sigma d_a* W)
    with the bath's sigma = nbar + 1/2 even for a squeezed bath, which is
    what the squeezed-frame identity needs. For SQUEEZED_FRAME the state is
    given in the lab frame while the points are squeezed-frame coordinates;
    the state is transformed internally.
    """
    if kind is None:
        kind = _infer_kind(bath)
    pts = np.asarray(points, dtype=complex)

    if kind is CurrentKind.SQUEEZED_FRAME:
        work = to_squeezed_frame(state, bath, t)
        w = wigner_eval(work, pts)
        _, g_star = wigner_log_gradient(work, pts)
        return 0.5 * bath.gamma * w * (pts + bath.sigma * g_star)

    w = wigner_eval(state, pts)
    g, g_star = wigner_log_gradient(state, pts)
    if kind is CurrentKind.THERMAL:
        return 0.5 * bath.gamma * w * (pts + bath.sigma * g_star)
    if kind is CurrentKind.SQUEEZED_LAB:
        big_n, m_t = effective_bath_moments(bath, t)
        return 0.5 * bath.gamma * w * (pts + (big_n + 0.5) * g_star + m_t * g)
    if kind is CurrentKind.DEPHASING:
        return 0.5 * bath.lam * pts * w * (np.conj(pts) * g_star - pts * g)
    raise UnsupportedOperation(f"unknown current kind {kind!r}")


def jb_via_thermal_identity(points, state: GaussianState, bath: Squeezed,
                            t: float = 0.0) -> np.ndarray:
    """Squeezed-frame current from the bare thermal-form current.

    Identity: J_b = J cosh r + (gamma alpha* W - J*) e^{i phi} sinh r,
    where J is the thermal-form current at the bath's bare sigma. The
    returned values live at beta = alpha cosh r + alpha* e^{i phi} sinh r.
    """
    if not isinstance(bath, Squeezed):
        raise UnsupportedOperation("identity applies to squeezed baths")
    pts = np.asarray(points, dtype=complex)
    ph = cmath.exp(1j * (bath.theta - 2.0 * bath.omega_s * t))
    j = current_eval(pts, state, bath, t, kind=CurrentKind.THERMAL)
    w = wigner_eval(state, pts)
    c = math.cosh(bath.r)
    sh = math.sinh(bath.r)
    return c * j + ph * sh * (bath.gamma * np.conj(pts) * w - np.conj(j))


def squeezed_frame_points(points, bath: Squeezed, t: float = 0.0) -> np.ndarray:
    """beta(alpha) = alpha cosh r + alpha* e^{i phi} sinh r."""
    pts = np.asarray(points, dtype=complex)
    ph = cmath.exp(1j * (bath.theta - 2.0 * bath.omega_s * t))
    return math.cosh(bath.r) * pts + ph * math.sinh(bath.r) * np.conj(pts)


# ---------------------------------------------------------------------------
# Quadrature machinery


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor Gauss-Legendre rule on the box mu +/- k_sigma sqrt(s + |m|)."""

    n_nodes: int = 201
    k_sigma: float = 8.0
    mass_tol: float = 1e-10


@lru_cache(maxsize=16)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def _quad_mesh(state: GaussianState, spec: QuadratureSpec):
    x, w = _leggauss(spec.n_nodes)
    half = spec.k_sigma * math.sqrt(state.s + abs(state.m))
    pts = (state.mu.real + half * x)[:, None] \
        + 1j * (state.mu.imag + half * x)[None, :]
    w2 = (half * w)[:, None] * (half * w)[None, :]
    return pts, w2


def _checked_wigner(state: GaussianState, pts, w2, spec: QuadratureSpec):
    # abort rather than silently integrate a distribution leaking off the box
    w = wigner_eval(state, pts)
    mass = float(np.sum(w2 * w))
    if abs(mass - 1.0) > spec.mass_tol:
        raise AccuracyError(
            f"quadrature box loses probability mass: |mass - 1| = "
            f"{abs(mass - 1.0):.3e}")
    return w


# ---------------------------------------------------------------------------
# Production rate Pi


def pi_closed_form(state: GaussianState, bath: Bath, t: float = 0.0) -> float:
    """Production rate from the Gaussian moments alone."""
    if isinstance(bath, Dephasing):
        mu, s, m = state.mu, state.s, state.m
        num = s * abs(mu) ** 2 + (m.conjugate() * mu * mu).real \
            + 2.0 * abs(m) ** 2
        return bath.lam / state.det * num
    work = to_squeezed_frame(state, bath, t) if isinstance(bath, Squeezed) \
        else state
    mu, s, m = work.mu, work.s, work.m
    det = work.det
    sigma = bath.sigma
    c1 = 1.0 - sigma * s / det
    c2 = sigma * m / det
    quad = (abs(c1) ** 2 + abs(c2) ** 2) * s \
        + 2.0 * (c1 * c2.conjugate() * m).real
    return bath.gamma / sigma * (abs(mu) ** 2 + quad)


def pi_quadrature(state: GaussianState, bath: Bath, t: float = 0.0,
                  spec: Optional[QuadratureSpec] = None) -> float:
    """Production rate by integrating the defining phase-space functional."""
    spec = spec or QuadratureSpec()
    if isinstance(bath, Dephasing):
        pts, w2 = _quad_mesh(state, spec)
        w = _checked_wigner(state, pts, w2, spec)
        g, g_star = wigner_log_gradient(state, pts)
        # factored so the integrand stays finite where W has its maximum
        angular = np.conj(pts) * g_star - pts * g
        return float(0.5 * bath.lam * np.sum(w2 * w * np.abs(angular) ** 2))
    work = to_squeezed_frame(state, bath, t) if isinstance(bath, Squeezed) \
        else state
    pts, w2 = _quad_mesh(work, spec)
    w = _checked_wigner(work, pts, w2, spec)
    _, g_star = wigner_log_gradient(work, pts)
    x = pts + bath.sigma * g_star
    return float(bath.gamma / bath.sigma * np.sum(w2 * w * np.abs(x) ** 2))


def pi_quadratic_form(state: GaussianState, bath: Bath,
                      t: float = 0.0) -> float:
    """Production rate reduced to second and fourth moments by Wick pairing.

    For a damping contact the current argument X = mu + g1 d + g2 d* gives
    Pi = gamma/sigma^2 [(N + 1/2) E|X|^2 - Re(M_t E[X*^2])]; for dephasing
    the angular log-derivative is expanded to quartic order in d = alpha - mu
    and contracted term by term.
    """
    mu, s, m = state.mu, state.s, state.m
    det = state.det
    if isinstance(bath, Dephasing):
        coeffs = {
            (1, 0): -(s * mu.conjugate() + m.conjugate() * mu) / det,
            (0, 1): (s * mu + m * mu.conjugate()) / det,
            (0, 2): m / det,
            (2, 0): -m.conjugate() / det,
        }
        total = 0.0
        for (j1, k1), c1 in coeffs.items():
            for (j2, k2), c2 in coeffs.items():
                mom = fourth_moment(state, j1 + k2, k1 + j2)
                total += (c1 * c2.conjugate() * mom).real
        return 0.5 * bath.lam * total
    big_n, m_t = effective_bath_moments(bath, t)
    sigma = bath.sigma
    g1 = 1.0 - (big_n + 0.5) * s / det + m_t * m.conjugate() / det
    g2 = (big_n + 0.5) * m / det - m_t * s / det
    e_abs2 = abs(mu) ** 2 + (abs(g1) ** 2 + abs(g2) ** 2) * s \
        + 2.0 * (g1 * g2.conjugate() * m).real
    e_conj2 = mu.conjugate() ** 2 + g1.conjugate() ** 2 * m.conjugate() \
        + g2.conjugate() ** 2 * m + 2.0 * g1.conjugate() * g2.conjugate() * s
    return bath.gamma / sigma ** 2 \
        * ((big_n + 0.5) * e_abs2 - (m_t * e_conj2).real)


def pi_rate(state: GaussianState, bath: Bath, t: float = 0.0,
            method: Method = Method.CLOSED_FORM,
            spec: Optional[QuadratureSpec] = None) -> float:
    if method is Method.CLOSED_FORM:
        return pi_closed_form(state, bath, t)
    if method is Method.QUADRATIC_FORM:
        return pi_quadratic_form(state, bath, t)
    if method is Method.QUADRATURE:
        return pi_quadrature(state, bath, t, spec)
    raise UnsupportedOperation(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Flux rate Phi and entropy rate


def phi_rate(state: GaussianState, bath: Bath, t: float = 0.0,
             method: Method = Method.CLOSED_FORM,
             spec: Optional[QuadratureSpec] = None) -> float:
    """Entropy flux rate into the reservoir.

    A dephasing reservoir absorbs no entropy: its current is purely
    angular, so the flux vanishes for every state and method.
    """
    if isinstance(bath, Dephasing):
        return 0.0
    work = to_squeezed_frame(state, bath, t) if isinstance(bath, Squeezed) \
        else state
    if method is Method.QUADRATURE:
        spec = spec or QuadratureSpec()
        pts, w2 = _quad_mesh(work, spec)
        w = _checked_wigner(work, pts, w2, spec)
        mean_abs2 = float(np.sum(w2 * w * np.abs(pts) ** 2))
        return bath.gamma / bath.sigma * (mean_abs2 - bath.sigma)
    return bath.gamma / bath.sigma * (work.occupation - bath.nbar)


def entropy_rate(state: GaussianState, bath: Bath,
                 ham: Optional[HamiltonianSpec] = None,
                 t: float = 0.0) -> float:
    """dS/dt of the Wigner entropy from the moment equations.

    S = (1/2) ln det Theta + const, so dS/dt = (d det/dt) / (2 det).
    """
    ham = ham or HamiltonianSpec()
    d = moment_rhs(state, bath, ham, t)
    ddet = 2.0 * state.s * d.d_s - 2.0 * (state.m.conjugate() * d.d_m).real
    return 0.5 * ddet / state.det


@dataclass(frozen=True)
class RateReport:
    pi: float
    phi: float
    entropy_rate: float
    balance_residual: float
    method: Method


_BALANCE_TOL = {
    Method.CLOSED_FORM: 1e-9,
    Method.QUADRATIC_FORM: 1e-9,
    Method.QUADRATURE: 1e-6,
}


def rate_report(state: GaussianState, bath: Bath,
                ham: Optional[HamiltonianSpec] = None, t: float = 0.0,
                method: Method = Method.CLOSED_FORM,
                spec: Optional[QuadratureSpec] = None) -> RateReport:
    """Pi, Phi and dS/dt together, with the balance identity enforced.

    Raises BalanceError when |dS/dt - (Pi - Phi)| exceeds the method's
    tolerance relative to max(1, |Pi|, |Phi|).
    """
    ham = ham or HamiltonianSpec()
    pi = pi_rate(state, bath, t, method, spec)
    phi = phi_rate(state, bath, t, method, spec)
    dsdt = entropy_rate(state, bath, ham, t)
    residual = abs(dsdt - (pi - phi))
    scale = max(1.0, abs(pi), abs(phi))
    if residual > _BALANCE_TOL[method] * scale:
        raise BalanceError(
            f"entropy balance violated: |dS/dt - (Pi - Phi)| = {residual:.3e}"
            f" with method {method.value}")
    return RateReport(pi, phi, dsdt, residual, method)


# ---------------------------------------------------------------------------
# Steady-state closed forms


def pi_steady_state(bath: Bath, ham: Optional[HamiltonianSpec] = None,
                    t: float = 0.0, time_averaged: bool = False) -> float:
    """Production rate on the long-time attractor of a damping contact.

    Three additive pieces: squeezing held off-axis by the detuning
    omega_s - omega_c, the displacement maintained by the pump, and a
    pump-squeezing cross term rotating at 2(omega_p - omega_s). With
    time_averaged=True the cross term is dropped unless it is static.
    """
    if isinstance(bath, Dephasing):
        raise UnsupportedOperation(
            "dephasing has no damped attractor; any rotation-invariant "
            "state is stationary with zero production")
    ham = ham or HamiltonianSpec()
    kap = 0.5 * bath.gamma
    sigma = bath.sigma
    if isinstance(bath, Squeezed):
        r, theta, omega_s = bath.r, bath.theta, bath.omega_s
    else:
        r, theta, omega_s = 0.0, 0.0, 0.0
    d_sc = omega_s - ham.omega_c
    s2r = math.sinh(2.0 * r)

    total = 2.0 * kap * d_sc ** 2 * s2r ** 2 / (kap ** 2 + d_sc ** 2)
    if ham.pump is not None:
        e = ham.pump.strength
        d_cp = ham.omega_c - ham.pump.omega_p
        denom = kap ** 2 + d_cp ** 2
        total += 2.0 * kap / sigma * abs(e) ** 2 * math.cosh(2.0 * r) / denom
        d_ps = ham.pump.omega_p - omega_s
        if not (time_averaged and d_ps != 0.0):
            phase = cmath.exp(-1j * (2.0 * d_ps * t + theta))
            cross = (e * e * phase / (kap + 1j * d_cp) ** 2).real
            total += 2.0 * kap / sigma * s2r * cross
    return total


def jb_field_squared(points, bath: Squeezed,
                     ham: Optional[HamiltonianSpec] = None) -> np.ndarray:
    """|J_b / W|^2 at the unpumped squeezed attractor, in closed form.

    Equals kappa^2 d^2 sinh^2(2r) |beta|^2 / (kappa^2 + d^2 cosh^2(2r))
    with d = omega_s - omega_c and beta the squeezed-frame coordinate.
    Independent of nbar; vanishes identically when r = 0 or d = 0.
    """
    if not isinstance(bath, Squeezed):
        raise UnsupportedOperation("field form applies to squeezed baths")
    ham = ham or HamiltonianSpec()
    kap = 0.5 * bath.gamma
    d = bath.omega_s - ham.omega_c
    s2r = math.sinh(2.0 * bath.r)
    c2r = math.cosh(2.0 * bath.r)
    pts = np.asarray(points, dtype=complex)
    coeff = kap ** 2 * d ** 2 * s2r ** 2 / (kap ** 2 + d ** 2 * c2r ** 2)
    return coeff * np.abs(pts) ** 2


# ---------------------------------------------------------------------------
# Von Neumann comparison rates (thermal contact)


@dataclass(frozen=True)
class VnRates:
    pi: float
    phi: float
    entropy_rate: float
    temperature: float


def vn_rates(state: GaussianState, bath: Thermal, ham: HamiltonianSpec,
             t: float = 0.0, fd_step: Optional[float] = None) -> VnRates:
    """Von Neumann entropy production and flux against a thermal contact.

    Phi_vN is the energy flux divided by the bath temperature mapped from
    nbar at omega_c. The entropy derivative is a second-order forward
    difference of the von Neumann entropy along the true evolution (forward
    only, so a pure input is never pushed outside the physical set). At
    nbar = 0 the temperature vanishes and Phi_vN is +-inf, or 0 exactly at
    equilibrium.
    """
    if not isinstance(bath, Thermal):
        raise UnsupportedOperation("von Neumann rates need a thermal contact")
    h = fd_step if fd_step is not None else 1e-6 / bath.gamma
    s0 = von_neumann_entropy(state)
    s1 = von_neumann_entropy(evolve(state, bath, ham, t, t + h).final)
    s2 = von_neumann_entropy(evolve(state, bath, ham, t, t + 2.0 * h).final)
    dsdt = (-3.0 * s0 + 4.0 * s1 - s2) / (2.0 * h)
    flux_e = energy_flux(state, bath, ham, t)
    temperature = temperature_from_nbar(bath.nbar, ham.omega_c)
    if temperature == 0.0:
        phi = math.copysign(math.inf, flux_e) if flux_e != 0.0 else 0.0
    else:
        phi = flux_e / temperature
    return VnRates(dsdt + phi, phi, dsdt, temperature)


__all__ = [
    "CurrentKind",
    "Method",
    "QuadratureSpec",
    "RateReport",
    "VnRates",
    "current_eval",
    "entropy_rate",
    "jb_field_squared",
    "jb_via_thermal_identity",
    "phi_rate",
    "pi_closed_form",
    "pi_quadratic_form",
    "pi_quadrature",
    "pi_rate",
    "pi_steady_state",
    "rate_report",
    "squeezed_frame_points",
    "to_squeezed_frame",
    "vn_rates",
]

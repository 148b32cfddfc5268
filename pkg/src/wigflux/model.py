"""Open-system dynamics of one bosonic mode at the level of Gaussian moments.

Reservoir couplings are the standard single-mode Lindblad generators: a
thermal contact at rate gamma and occupation nbar, a squeezed thermal contact
(squeeze amplitude r, phase theta, reference frequency omega_s carried by the
anomalous bath moment M_t = M0 exp(-2i omega_s t)), and pure dephasing at
rate lam. The Hamiltonian is omega_c a'a plus an optional classical drive
i(E e^{-i omega_p t} a' - h.c.).

First and second moments of a Gaussian state close under all of these
generators except dephasing, which feeds |mu|^2 into the covariance while
taking the state out of the Gaussian family; `evolve` therefore refuses
dephasing baths and `moment_rhs` remains valid for single-instant rates.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import GaussianityNotPreserved, PhysicalityError, UnsupportedOperation
from .phasespace import GaussianState, clamp_events

# ---------------------------------------------------------------------------
# Specs


@dataclass(frozen=True)
class Thermal:
    """Thermal contact: relaxation rate gamma > 0, occupation nbar >= 0."""

    gamma: float
    nbar: float = 0.0

    def __post_init__(self):
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise PhysicalityError("gamma must be positive and finite")
        if not (self.nbar >= 0.0 and math.isfinite(self.nbar)):
            raise PhysicalityError("nbar must be >= 0")

    @property
    def sigma(self) -> float:
        """nbar + 1/2, the equilibrium symmetric occupation."""
        return self.nbar + 0.5


@dataclass(frozen=True)
class Squeezed:
    """Squeezed thermal contact.

    Effective bath moments in the unsqueezed (a) representation:
        N + 1/2 = (nbar + 1/2) cosh 2r
        M_t     = -(nbar + 1/2) e^{i(theta - 2 omega_s t)} sinh 2r
    so r = 0 is exactly a Thermal bath.
    """

    gamma: float
    nbar: float = 0.0
    r: float = 0.0
    theta: float = 0.0
    omega_s: float = 0.0

    def __post_init__(self):
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise PhysicalityError("gamma must be positive and finite")
        if not (self.nbar >= 0.0 and math.isfinite(self.nbar)):
            raise PhysicalityError("nbar must be >= 0")
        if not (self.r >= 0.0 and math.isfinite(self.r)):
            raise PhysicalityError("squeeze amplitude r must be >= 0")

    @property
    def sigma(self) -> float:
        return self.nbar + 0.5

    @property
    def big_n(self) -> float:
        """Effective thermal occupation N of the squeezed contact."""
        return self.sigma * math.cosh(2.0 * self.r) - 0.5

    @property
    def m0(self) -> complex:
        return -self.sigma * cmath.exp(1j * self.theta) * math.sinh(2.0 * self.r)

    def m_t(self, t: float) -> complex:
        return self.m0 * cmath.exp(-2j * self.omega_s * t)


@dataclass(frozen=True)
class Dephasing:
    """Pure dephasing at rate lam >= 0. Exchanges no energy with the mode."""

    lam: float

    def __post_init__(self):
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise PhysicalityError("lam must be >= 0 and finite")


Bath = Union[Thermal, Squeezed, Dephasing]


@dataclass(frozen=True)
class Pump:
    """Classical drive i(E e^{-i omega_p t} a' - h.c.)."""

    strength: complex
    omega_p: float

    def __post_init__(self):
        object.__setattr__(self, "strength", complex(self.strength))


@dataclass(frozen=True)
class HamiltonianSpec:
    omega_c: float = 0.0
    pump: Optional[Pump] = None

    def eta(self, t: float) -> complex:
        """Drive amplitude in the lab frame, eta(t) = E e^{-i omega_p t}."""
        if self.pump is None:
            return 0.0 + 0.0j
        return self.pump.strength * cmath.exp(-1j * self.pump.omega_p * t)


def kappa(bath: Bath) -> float:
    """Field decay rate kappa = gamma/2 of a damping bath."""
    if isinstance(bath, Dephasing):
        raise UnsupportedOperation("dephasing bath has no damping rate")
    return 0.5 * bath.gamma


def effective_bath_moments(bath: Bath, t: float) -> tuple[float, complex]:
    """(N, M_t) of a damping bath; a Thermal bath is Squeezed with r = 0."""
    if isinstance(bath, Thermal):
        return bath.nbar, 0.0 + 0.0j
    if isinstance(bath, Squeezed):
        return bath.big_n, bath.m_t(t)
    raise UnsupportedOperation("dephasing bath carries no (N, M) moments")


def nbar_from_temperature(temperature: float, omega: float) -> float:
    """Bose occupation 1/(e^{omega/T} - 1); T in units with kB = hbar = 1."""
    if omega <= 0.0:
        raise PhysicalityError("omega must be positive")
    if temperature < 0.0:
        raise PhysicalityError("temperature must be >= 0")
    if temperature == 0.0:
        return 0.0
    return 1.0 / math.expm1(omega / temperature)


def temperature_from_nbar(nbar: float, omega: float) -> float:
    """Inverse of nbar_from_temperature; nbar = 0 maps to T = 0."""
    if omega <= 0.0:
        raise PhysicalityError("omega must be positive")
    if nbar < 0.0:
        raise PhysicalityError("nbar must be >= 0")
    if nbar == 0.0:
        return 0.0
    return omega / math.log1p(1.0 / nbar)


# ---------------------------------------------------------------------------
# Moment equations


@dataclass(frozen=True)
class MomentDerivatives:
    """Time derivatives of (mu, s, m) plus the raw occupation derivative.

    d_n is d<a'a>/dt = d_s + 2 Re(conj(mu) d_mu); for a dephasing bath the
    bath contribution to d_n is exactly zero.
    """

    d_mu: complex
    d_s: float
    d_m: complex
    d_n: float


def moment_rhs(state: GaussianState, bath: Bath, ham: HamiltonianSpec,
               t: float = 0.0) -> MomentDerivatives:
    """Right-hand side of the closed moment system at time t."""
    mu, s, m = state.mu, state.s, state.m
    omega = ham.omega_c
    eta = ham.eta(t)

    # Hamiltonian part: rotation plus drive. Central moments see only the
    # rotation; the drive enters mu and the raw occupation.
    d_mu = -1j * omega * mu + eta
    d_s = 0.0
    d_m = -2j * omega * m
    d_n = 2.0 * (eta * np.conj(mu)).real

    if isinstance(bath, Dephasing):
        lam = bath.lam
        d_mu += -0.5 * lam * mu
        d_s += lam * abs(mu) ** 2
        d_m += -2.0 * lam * m - lam * mu * mu
        # bath exchanges no energy: d_n gains exactly nothing
    else:
        g = bath.gamma
        big_n, m_t = effective_bath_moments(bath, t)
        d_mu += -0.5 * g * mu
        d_s += g * (big_n + 0.5 - s)
        d_m += -g * m + g * m_t
        d_n += g * (big_n - state.occupation)

    return MomentDerivatives(complex(d_mu), float(d_s), complex(d_m),
                             float(d_n))


def _rate_scale(bath: Bath, ham: HamiltonianSpec) -> float:
    rates = [abs(ham.omega_c)]
    if ham.pump is not None:
        rates.append(abs(ham.pump.omega_p))
    if isinstance(bath, Dephasing):
        rates.append(bath.lam)
    else:
        rates.append(bath.gamma)
        if isinstance(bath, Squeezed):
            rates.append(2.0 * abs(bath.omega_s))
    return max(rates)


@dataclass
class Trajectory:
    """Gaussian moments on a fixed time grid, as produced by `evolve`."""

    times: np.ndarray
    states: list
    clamp_count: int = 0

    def mu_array(self) -> np.ndarray:
        return np.array([st.mu for st in self.states], dtype=complex)

    def s_array(self) -> np.ndarray:
        return np.array([st.s for st in self.states], dtype=float)

    def m_array(self) -> np.ndarray:
        return np.array([st.m for st in self.states], dtype=complex)

    @property
    def final(self) -> GaussianState:
        return self.states[-1]


def _rk4_step(y, bath, ham, t, dt):
    """One RK4 step on the packed moment vector y = (mu, s, m)."""

    def f(yy, tt):
        st = object.__new__(GaussianState)  # skip validation inside stages
        object.__setattr__(st, "mu", yy[0])
        object.__setattr__(st, "s", yy[1].real)
        object.__setattr__(st, "m", yy[2])
        d = moment_rhs(st, bath, ham, tt)
        return np.array([d.d_mu, d.d_s, d.d_m], dtype=complex)

    k1 = f(y, t)
    k2 = f(y + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(y + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(y + dt * k3, t + dt)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def evolve_fixed_grid(state: GaussianState, bath: Bath, ham: HamiltonianSpec,
                      t0: float, dt: float, n_steps: int) -> Trajectory:
    """Propagate Gaussian moments over n_steps RK4 steps of exactly dt."""
    if isinstance(bath, Dephasing):
        raise GaussianityNotPreserved(
            "dephasing evolution leaves the Gaussian family; "
            "only instantaneous rates are available")
    if dt <= 0.0 or n_steps < 0:
        raise ValueError("need dt > 0 and n_steps >= 0")
    clamps_before = clamp_events()
    times = t0 + dt * np.arange(n_steps + 1)
    y = np.array([state.mu, state.s, state.m], dtype=complex)
    states = [state]
    for k in range(n_steps):
        y = _rk4_step(y, bath, ham, times[k], dt)
        states.append(GaussianState(y[0], y[1].real, y[2]))
        y = np.array([states[-1].mu, states[-1].s, states[-1].m],
                     dtype=complex)
    return Trajectory(times, states, clamp_events() - clamps_before)


def evolve(state: GaussianState, bath: Bath, ham: HamiltonianSpec,
           t0: float, t1: float, dt_max: Optional[float] = None) -> Trajectory:
    """Propagate Gaussian moments from t0 to t1 with fixed-step RK4.

    Default step is min(dt_max, 1e-3 / max rate). Dephasing baths are
    refused: their generator couples the Gaussian moments to higher
    cumulants, so only instantaneous rates are defined for them.
    """
    if isinstance(bath, Dephasing):
        raise GaussianityNotPreserved(
            "dephasing evolution leaves the Gaussian family; "
            "only instantaneous rates are available")
    if t1 < t0:
        raise ValueError("t1 must be >= t0")

    span = t1 - t0
    scale = _rate_scale(bath, ham)
    dt_target = 1e-3 / scale if scale > 0.0 else span
    if dt_max is not None:
        dt_target = min(dt_target, dt_max)
    if span == 0.0:
        return Trajectory(np.array([t0]), [state], 0)
    n_steps = max(1, math.ceil(span / dt_target - 1e-12))
    return evolve_fixed_grid(state, bath, ham, t0, span / n_steps, n_steps)


def steady_state(bath: Bath, ham: HamiltonianSpec, t: float = 0.0) -> GaussianState:
    """Lab-frame steady state of a damping bath (instantaneous moments).

    mu   = eta(t) / (kappa + i Delta_cp)
    s    = N + 1/2
    m    = kappa M_t / (kappa + i Delta_cs)

    For a Squeezed bath with omega_s != omega_p the state is periodic rather
    than static; this returns the attractor cycle evaluated at time t.
    """
    if isinstance(bath, Dephasing):
        raise UnsupportedOperation("dephasing bath has no damped steady state")
    kap = kappa(bath)
    big_n, m_t = effective_bath_moments(bath, t)

    mu = 0.0 + 0.0j
    if ham.pump is not None:
        delta_cp = ham.omega_c - ham.pump.omega_p
        mu = ham.eta(t) / (kap + 1j * delta_cp)

    omega_s = bath.omega_s if isinstance(bath, Squeezed) else 0.0
    delta_cs = ham.omega_c - omega_s
    m = kap * m_t / (kap + 1j * delta_cs)
    return GaussianState(mu, big_n + 0.5, m)


def energy_flux(state: GaussianState, bath: Bath, ham: HamiltonianSpec,
                t: float = 0.0) -> float:
    """Energy flow rate from the mode into the reservoir, -tr(H D[rho]).

    Thermal/squeezed contact:
        Phi_E = gamma omega_c (<a'a> - N) - gamma Im(eta conj(mu)),
    which reduces to gamma omega_c (<a'a> - nbar) without a pump and to the
    drive input 2 kappa omega_p |E|^2/(kappa^2 + Delta_cp^2) at the pumped
    steady state. A dephasing reservoir exchanges no energy.
    """
    if isinstance(bath, Dephasing):
        return 0.0
    big_n, _ = effective_bath_moments(bath, t)
    flux = bath.gamma * ham.omega_c * (state.occupation - big_n)
    if ham.pump is not None:
        flux -= bath.gamma * (ham.eta(t) * np.conj(state.mu)).imag
    return float(flux)


def mean_energy(state: GaussianState, ham: HamiltonianSpec,
                t: float = 0.0) -> float:
    """<H> = omega_c <a'a> - 2 Im(eta conj(mu)) at time t."""
    value = ham.omega_c * state.occupation
    if ham.pump is not None:
        value -= 2.0 * (ham.eta(t) * np.conj(state.mu)).imag
    return float(value)


def drive_power(state: GaussianState, ham: HamiltonianSpec,
                t: float = 0.0) -> float:
    """<dH/dt> = 2 omega_p Re(eta(t) conj(mu)), the work rate of the pump."""
    if ham.pump is None:
        return 0.0
    return float(2.0 * ham.pump.omega_p
                 * (ham.eta(t) * np.conj(state.mu)).real)

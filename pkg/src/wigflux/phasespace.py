"""Gaussian states of a single bosonic mode in the complex phase plane.

Conventions used throughout the package: a Gaussian Wigner density is
parameterized by the mean mu = <a> and the 2x2 complex covariance matrix

    Theta = [[s, m], [m*, s]],   s = <a'a> - |mu|^2 + 1/2,   m = <aa> - mu^2,

(a' denoting the adjoint of a) with det Theta = s^2 - |m|^2 >= 1/4, equality
for pure states. The density itself is

    W(alpha) = exp(-[s |d|^2 - Re(m conj(d)^2)] / det) / (pi sqrt(det)),
    d = alpha - mu,

normalized so that the integral of W over the plane is 1. Phase-space points
are plain complex scalars or numpy arrays; every evaluator broadcasts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PhysicalityError, UnsupportedOperation

# Uncertainty bound det Theta >= 1/4; violations within this tolerance are
# treated as integrator round-off and clamped, anything worse is rejected.
PHYSICALITY_TOL = 1.0e-12

_clamp_events = 0


def clamp_events() -> int:
    """Number of sub-physical covariance clamps since the last reset."""
    return _clamp_events


def reset_clamp_events() -> None:
    global _clamp_events
    _clamp_events = 0


@dataclass(frozen=True)
class GaussianState:
    """Mean and second central moments of a Gaussian Wigner density."""

    mu: complex = 0.0 + 0.0j
    s: float = 0.5
    m: complex = 0.0 + 0.0j

    def __post_init__(self):
        mu = complex(self.mu)
        s = float(self.s)
        m = complex(self.m)
        if not (math.isfinite(mu.real) and math.isfinite(mu.imag)
                and math.isfinite(s) and math.isfinite(m.real)
                and math.isfinite(m.imag)):
            raise PhysicalityError("non-finite state moments")
        if s <= 0.0:
            raise PhysicalityError(f"s must be positive, got {s}")
        det = s * s - (m.real * m.real + m.imag * m.imag)
        if det < 0.25 - PHYSICALITY_TOL:
            raise PhysicalityError(
                f"det Theta = {det} below the uncertainty bound 1/4")
        if det < 0.25:
            # Round-off from an integrator step; push s back onto the bound.
            global _clamp_events
            _clamp_events += 1
            s = math.sqrt(0.25 + abs(m) ** 2) * (1.0 + 1e-16)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "m", m)

    # -- derived quantities -------------------------------------------------

    @property
    def det(self) -> float:
        """det Theta = s^2 - |m|^2."""
        return self.s * self.s - abs(self.m) ** 2

    @property
    def theta(self) -> np.ndarray:
        return np.array([[self.s, self.m], [np.conj(self.m), self.s]],
                        dtype=complex)

    @property
    def purity(self) -> float:
        return 1.0 / (2.0 * math.sqrt(self.det))

    @property
    def occupation(self) -> float:
        """<a'a> recovered from the central moments."""
        return self.s + abs(self.mu) ** 2 - 0.5

    @property
    def second_moment_aa(self) -> complex:
        """<aa> recovered from the central moments."""
        return self.m + self.mu * self.mu

    # -- constructors -------------------------------------------------------

    @classmethod
    def vacuum(cls) -> "GaussianState":
        return cls(0.0, 0.5, 0.0)

    @classmethod
    def coherent(cls, mu: complex) -> "GaussianState":
        return cls(mu, 0.5, 0.0)

    @classmethod
    def thermal(cls, nbar: float, mu: complex = 0.0) -> "GaussianState":
        if nbar < 0.0:
            raise PhysicalityError("thermal occupation must be >= 0")
        return cls(mu, nbar + 0.5, 0.0)

    def real_covariance(self) -> np.ndarray:
        """Covariance of (Re alpha, Im alpha) under W.

        C = [[(s + Re m)/2, Im m / 2], [Im m / 2, (s - Re m)/2]].
        """
        return 0.5 * np.array(
            [[self.s + self.m.real, self.m.imag],
             [self.m.imag, self.s - self.m.real]])


def _check_points(alpha) -> np.ndarray:
    a = np.asarray(alpha, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite phase-space point")
    return a


def wigner_eval(state: GaussianState, alpha):
    """Wigner density at complex point(s) alpha.

    Returns a float for scalar input, an ndarray otherwise.
    """
    a = _check_points(alpha)
    det = state.det
    d = a - state.mu
    q = (state.s * (d.real ** 2 + d.imag ** 2)
         - (state.m * np.conj(d) ** 2).real) / det
    w = np.exp(-q) / (math.pi * math.sqrt(det))
    return float(w) if w.ndim == 0 else w


def wigner_log_gradient(state: GaussianState, alpha):
    """Pair (d ln W / d alpha, d ln W / d alpha*), Wirtinger derivatives.

    For the Gaussian density: d ln W / d alpha* = -(s d - m conj(d)) / det
    with d = alpha - mu, and the alpha derivative is its conjugate.
    """
    a = _check_points(alpha)
    d = a - state.mu
    g_star = -(state.s * d - state.m * np.conj(d)) / state.det
    g = np.conj(g_star)
    if g.ndim == 0:
        return complex(g), complex(g_star)
    return g, g_star


def wigner_entropy(state: GaussianState) -> float:
    """Differential entropy -integral W ln W = ln(det Theta)/2 + 1 + ln pi."""
    return 0.5 * math.log(state.det) + 1.0 + math.log(math.pi)


def von_neumann_entropy(state: GaussianState) -> float:
    """(nu+1) ln(nu+1) - nu ln nu with nu = sqrt(det Theta) - 1/2.

    Vanishes for pure states (nu = 0).
    """
    nu = math.sqrt(state.det) - 0.5
    if nu <= 0.0:
        return 0.0
    return (nu + 1.0) * math.log(nu + 1.0) - nu * math.log(nu)


def fourth_moment(state: GaussianState, j: int, k: int) -> complex:
    """Central moment E[d^j conj(d)^k], d = alpha - mu, for j + k <= 4.

    Wick pairing over the zero-mean Gaussian pair (d, conj(d)) with
    E[d conj(d)] = s, E[d d] = m, E[conj(d) conj(d)] = conj(m). Odd total
    degree gives 0.
    """
    if j < 0 or k < 0:
        raise UnsupportedOperation("moment powers must be non-negative")
    degree = j + k
    if degree > 4:
        raise UnsupportedOperation(
            f"moment degree {degree} > 4 not supported")
    if degree == 0:
        return 1.0 + 0.0j
    if degree % 2 == 1:
        return 0.0 + 0.0j

    pair_value = {
        (0, 0): state.m,
        (1, 1): np.conj(state.m),
        (0, 1): complex(state.s),
        (1, 0): complex(state.s),
    }
    labels = [0] * j + [1] * k  # 0 -> d, 1 -> conj(d)
    if degree == 2:
        return complex(pair_value[(labels[0], labels[1])])

    # degree 4: sum over the three perfect matchings of {0,1,2,3}
    total = 0.0 + 0.0j
    first = 0
    rest = [1, 2, 3]
    for partner in rest:
        others = [i for i in rest if i != partner]
        total += (pair_value[(labels[first], labels[partner])]
                  * pair_value[(labels[others[0]], labels[others[1]])])
    return complex(total)


def gaussian_moment(state: GaussianState, j: int, k: int) -> complex:
    """Raw moment E[alpha^j conj(alpha)^k] for j + k <= 4 (binomial expansion
    of the central Wick moments). Convenience built on fourth_moment."""
    mu = state.mu
    total = 0.0 + 0.0j
    for p in range(j + 1):
        for q in range(k + 1):
            total += (math.comb(j, p) * math.comb(k, q)
                      * mu ** (j - p) * np.conj(mu) ** (k - q)
                      * fourth_moment(state, p, q))
    return complex(total)


__all__ = [
    "GaussianState", "PHYSICALITY_TOL", "clamp_events", "reset_clamp_events",
    "wigner_eval", "wigner_log_gradient", "wigner_entropy",
    "von_neumann_entropy", "fourth_moment", "gaussian_moment",
]

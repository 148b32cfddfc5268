"""Moment dynamics, steady states and energy bookkeeping."""

import cmath
import math

import numpy as np
import pytest

from wigflux.errors import GaussianityNotPreserved, PhysicalityError
from wigflux.model import (
    Dephasing,
    HamiltonianSpec,
    Pump,
    Squeezed,
    Thermal,
    drive_power,
    effective_bath_moments,
    energy_flux,
    evolve,
    evolve_fixed_grid,
    kappa,
    mean_energy,
    moment_rhs,
    nbar_from_temperature,
    steady_state,
    temperature_from_nbar,
)
from wigflux.phasespace import GaussianState


def test_bath_moments():
    th = Thermal(1.5, 0.4)
    assert th.sigma == pytest.approx(0.9)
    assert kappa(th) == pytest.approx(0.75)
    n, m = effective_bath_moments(th, 2.0)
    assert n == pytest.approx(0.4)
    assert m == 0.0

    sq = Squeezed(2.0, 0.3, 0.5, 0.7, 1.1)
    assert sq.big_n + 0.5 == pytest.approx(0.8 * math.cosh(1.0))
    assert sq.m0 == pytest.approx(-0.8 * math.sinh(1.0) * cmath.exp(0.7j))
    assert sq.m_t(0.4) == pytest.approx(sq.m0 * cmath.exp(-2j * 1.1 * 0.4))
    n, m = effective_bath_moments(sq, 0.4)
    assert n == pytest.approx(sq.big_n)
    assert m == pytest.approx(sq.m_t(0.4))

    with pytest.raises(PhysicalityError):
        Thermal(-1.0)
    with pytest.raises(PhysicalityError):
        Thermal(1.0, -0.1)
    with pytest.raises(PhysicalityError):
        Dephasing(-0.5)


def test_temperature_conversions_round_trip():
    for nbar in (0.0, 1e-8, 0.3, 2.5, 100.0):
        t = temperature_from_nbar(nbar, 1.7)
        back = nbar_from_temperature(t, 1.7)
        assert back == pytest.approx(nbar, rel=1e-12, abs=1e-300)
    assert temperature_from_nbar(0.0, 1.0) == 0.0
    assert nbar_from_temperature(0.0, 1.0) == 0.0


def test_moment_identity_occupation():
    # d<n>/dt = d s/dt + 2 Re(mu* d mu/dt) for every bath
    st = GaussianState(0.8 - 0.3j, 1.2, 0.3 + 0.2j)
    ham = HamiltonianSpec(1.3, Pump(0.4 + 0.1j, 0.9))
    for bath in (Thermal(1.0, 0.5), Squeezed(0.7, 0.2, 0.6, 1.0, 1.4),
                 Dephasing(0.8)):
        d = moment_rhs(st, bath, ham, 0.3)
        lhs = d.d_n
        rhs = d.d_s + 2.0 * (st.mu.conjugate() * d.d_mu).real
        assert lhs == pytest.approx(rhs, abs=1e-13)


def test_dephasing_conserves_occupation():
    st = GaussianState(1.1 + 0.4j, 0.9, 0.2 - 0.1j)
    d = moment_rhs(st, Dephasing(0.6), HamiltonianSpec(2.0), 0.0)
    assert d.d_n == 0.0
    assert d.d_s == pytest.approx(0.6 * abs(st.mu) ** 2, rel=1e-14)


def test_thermal_evolution_matches_analytic_solution():
    gamma, nbar, om = 1.3, 0.4, 2.0
    bath = Thermal(gamma, nbar)
    ham = HamiltonianSpec(om)
    st = GaussianState(1.0 - 0.5j, 1.1, 0.3 + 0.1j)
    t1 = 0.7
    traj = evolve(st, bath, ham, 0.0, t1)
    got = traj.final
    decay = cmath.exp(-(1j * om + gamma / 2) * t1)
    assert got.mu == pytest.approx(st.mu * decay, abs=1e-10)
    assert got.s == pytest.approx(
        nbar + 0.5 + (st.s - nbar - 0.5) * math.exp(-gamma * t1), abs=1e-10)
    assert got.m == pytest.approx(st.m * decay * decay, abs=1e-10)


def test_squeezed_evolution_matches_analytic_solution():
    # static squeezing carrier: dm/dt = -(2i om + gamma) m + gamma M
    gamma, om = 0.9, 1.4
    bath = Squeezed(gamma, 0.2, 0.5, 0.8, 0.0)
    ham = HamiltonianSpec(om)
    st = GaussianState(0.0, 1.0, 0.1)
    t1 = 0.6
    got = evolve(st, bath, ham, 0.0, t1).final
    m_inf = gamma * bath.m0 / (gamma + 2j * om)
    expected_m = m_inf + (st.m - m_inf) * cmath.exp(-(2j * om + gamma) * t1)
    assert got.m == pytest.approx(expected_m, abs=1e-10)
    assert got.s == pytest.approx(
        bath.big_n + 0.5 + (st.s - bath.big_n - 0.5) * math.exp(-gamma * t1),
        abs=1e-10)


def test_pumped_evolution_reaches_steady_state():
    bath = Thermal(2.0, 0.1)
    ham = HamiltonianSpec(1.0, Pump(0.5 - 0.2j, 0.8))
    t1 = 16.0
    got = evolve(GaussianState.vacuum(), bath, ham, 0.0, t1).final
    want = steady_state(bath, ham, t1)
    # remaining transient is exp(-kappa t1) times the initial offset
    assert got.mu == pytest.approx(want.mu, abs=1e-6)
    assert got.s == pytest.approx(want.s, abs=1e-10)
    assert got.m == pytest.approx(want.m, abs=1e-10)


def test_steady_state_satisfies_the_flow():
    # moment derivatives on the attractor equal the attractor's own drift
    bath = Squeezed(1.4, 0.15, 0.6, 0.4, 1.2)
    ham = HamiltonianSpec(1.0, Pump(0.7, 0.9))
    t = 1.3
    h = 1e-6
    st = steady_state(bath, ham, t)
    ahead = steady_state(bath, ham, t + h)
    behind = steady_state(bath, ham, t - h)
    d = moment_rhs(st, bath, ham, t)
    assert d.d_mu == pytest.approx((ahead.mu - behind.mu) / (2 * h), abs=1e-7)
    assert d.d_m == pytest.approx((ahead.m - behind.m) / (2 * h), abs=1e-7)
    assert d.d_s == pytest.approx((ahead.s - behind.s) / (2 * h), abs=1e-7)


def test_steady_state_pinned_moments():
    bath = Squeezed(2.0, 0.0, 0.5, 0.0, 1.9)
    ham = HamiltonianSpec(1.0)
    ss = steady_state(bath, ham, 0.0)
    assert ss.mu == 0.0
    assert ss.s == pytest.approx(0.5 * math.cosh(1.0), rel=1e-14)
    # kappa M0 / (kappa + i(om_c - om_s)) at kappa = 1
    want = -0.5 * math.sinh(1.0) / (1.0 - 0.9j)
    assert ss.m == pytest.approx(want, rel=1e-14)
    assert ss.m == pytest.approx(-0.3246412137 - 0.2921770923j, abs=1e-9)


def test_squeezed_reduces_to_thermal_at_zero_r():
    bath_s = Squeezed(1.1, 0.4, 0.0, 0.0, 2.0)
    bath_t = Thermal(1.1, 0.4)
    ham = HamiltonianSpec(1.0, Pump(0.3, 1.2))
    st = GaussianState(0.5, 1.0, 0.1j)
    a = evolve(st, bath_s, ham, 0.0, 1.0).final
    b = evolve(st, bath_t, ham, 0.0, 1.0).final
    assert a.mu == pytest.approx(b.mu, abs=1e-12)
    assert a.s == pytest.approx(b.s, abs=1e-12)
    assert a.m == pytest.approx(b.m, abs=1e-12)


def test_rotating_frame_consistency():
    # evolving with omega_c then unwinding equals evolving with omega_c = 0
    gamma, om = 1.0, 1.7
    st = GaussianState(0.9 + 0.2j, 0.8, 0.15 - 0.1j)
    t1 = 0.8
    lab = evolve(st, Thermal(gamma, 0.3), HamiltonianSpec(om), 0.0, t1).final
    rot = evolve(st, Thermal(gamma, 0.3), HamiltonianSpec(0.0), 0.0, t1).final
    ph = cmath.exp(-1j * om * t1)
    assert lab.mu == pytest.approx(rot.mu * ph, abs=1e-9)
    assert lab.m == pytest.approx(rot.m * ph * ph, abs=1e-9)
    assert lab.s == pytest.approx(rot.s, abs=1e-11)


def test_rk4_step_is_fourth_order():
    bath = Squeezed(1.0, 0.2, 0.4, 0.3, 1.1)
    ham = HamiltonianSpec(1.5, Pump(0.4, 1.0))
    st = GaussianState(0.7, 0.9, 0.1)
    ref = evolve_fixed_grid(st, bath, ham, 0.0, 1e-4, 4096).final
    errs = []
    for n_steps in (16, 32):
        got = evolve_fixed_grid(st, bath, ham, 0.0, 0.4096 / n_steps,
                                n_steps).final
        errs.append(abs(got.mu - ref.mu) + abs(got.m - ref.m)
                    + abs(got.s - ref.s))
    order = math.log2(errs[0] / errs[1])
    assert 3.7 < order < 4.3


def test_energy_balance_along_evolution():
    # d<H>/dt = <dH/dt> - energy flux, checked by finite differences
    bath = Thermal(1.2, 0.3)
    ham = HamiltonianSpec(1.0, Pump(0.6 + 0.2j, 0.7))
    st = GaussianState(0.4 - 0.6j, 0.9, 0.2)
    t, h = 0.5, 1e-5
    ahead = evolve(st, bath, ham, 0.0, t + h).final
    behind = evolve(st, bath, ham, 0.0, t - h).final
    now = evolve(st, bath, ham, 0.0, t).final
    dh_dt = (mean_energy(ahead, ham, t + h)
             - mean_energy(behind, ham, t - h)) / (2 * h)
    assert dh_dt == pytest.approx(
        drive_power(now, ham, t) - energy_flux(now, bath, ham, t), abs=1e-6)


def test_energy_flux_values():
    bath = Thermal(1.5, 0.4)
    ham = HamiltonianSpec(2.0)
    st = GaussianState(1.0, 1.1, 0.0)
    # gamma omega (<n> - nbar) without a pump
    want = 1.5 * 2.0 * (st.occupation - 0.4)
    assert energy_flux(st, bath, ham) == pytest.approx(want, rel=1e-14)
    assert energy_flux(st, Dephasing(0.7), ham) == 0.0


def test_evolve_refuses_dephasing():
    with pytest.raises(GaussianityNotPreserved):
        evolve(GaussianState.coherent(1.0), Dephasing(0.5),
               HamiltonianSpec(1.0), 0.0, 1.0)


def test_evolve_grid_layout():
    st = GaussianState.coherent(0.5)
    traj = evolve_fixed_grid(st, Thermal(1.0, 0.0), HamiltonianSpec(1.0),
                             0.25, 0.01, 40)
    assert traj.times.shape == (41,)
    assert traj.times[0] == pytest.approx(0.25)
    assert traj.times[-1] == pytest.approx(0.65)
    steps = np.diff(traj.times)
    assert np.allclose(steps, 0.01, rtol=0, atol=1e-15)
    assert traj.final is traj.states[-1]
    assert traj.mu_array().shape == (41,)

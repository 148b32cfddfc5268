"""Production and flux rates: route equivalence, balance, pinned values."""

import cmath
import math

import numpy as np
import pytest

from wigflux.errors import BalanceError, UnsupportedOperation
from wigflux.model import (
    Dephasing,
    HamiltonianSpec,
    Pump,
    Squeezed,
    Thermal,
    energy_flux,
    evolve,
    steady_state,
)
from wigflux.phasespace import GaussianState, wigner_eval
from wigflux.rates import (
    CurrentKind,
    Method,
    QuadratureSpec,
    current_eval,
    entropy_rate,
    jb_field_squared,
    jb_via_thermal_identity,
    phi_rate,
    pi_closed_form,
    pi_quadratic_form,
    pi_quadrature,
    pi_rate,
    pi_steady_state,
    rate_report,
    squeezed_frame_points,
    to_squeezed_frame,
    vn_rates,
)


def _random_states(rng, count, mu_scale=1.2):
    out = []
    for _ in range(count):
        s = rng.uniform(0.5, 2.5)
        mmax = 0.85 * math.sqrt(max(s * s - 0.26, 0.0))
        m = rng.uniform(0, mmax) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        mu = rng.normal(scale=mu_scale) + 1j * rng.normal(scale=mu_scale)
        out.append(GaussianState(mu, s, complex(m)))
    return out


def _random_baths(rng, count):
    out = []
    for i in range(count):
        gamma = rng.uniform(0.3, 2.5)
        nbar = rng.uniform(0.0, 1.5)
        if i % 2:
            out.append(Thermal(gamma, nbar))
        else:
            out.append(Squeezed(gamma, nbar, rng.uniform(0, 1.0),
                                rng.uniform(0, 2 * np.pi),
                                rng.uniform(-2.0, 2.0)))
    return out


def test_pinned_coherent_state_rates():
    # displaced vacuum against an empty bath: all production, flux equal
    st = GaussianState.coherent(1.0)
    bath = Thermal(1.0, 0.0)
    assert pi_closed_form(st, bath) == pytest.approx(2.0, rel=1e-14)
    assert phi_rate(st, bath) == pytest.approx(2.0, rel=1e-14)
    assert entropy_rate(st, bath) == pytest.approx(0.0, abs=1e-15)


def test_pinned_hot_mode_cooling():
    st = GaussianState(0.0, 1.5, 0.0)
    bath = Thermal(1.0, 0.0)
    assert pi_closed_form(st, bath) == pytest.approx(4.0 / 3.0, rel=1e-14)
    assert phi_rate(st, bath) == pytest.approx(2.0, rel=1e-14)
    assert entropy_rate(st, bath) == pytest.approx(-2.0 / 3.0, rel=1e-14)


def test_equilibrium_is_the_only_zero():
    bath = Thermal(1.0, 0.4)
    eq = GaussianState(0.0, 0.9, 0.0)
    assert pi_closed_form(eq, bath) == 0.0
    assert phi_rate(eq, bath) == 0.0
    rng = np.random.default_rng(5)
    for st in _random_states(rng, 20):
        if abs(st.mu) + abs(st.m) + abs(st.s - 0.9) < 1e-3:
            continue
        assert pi_closed_form(st, bath) > 0.0


def test_dephasing_zero_only_for_isotropic_states():
    bath = Dephasing(0.8)
    assert pi_closed_form(GaussianState(0.0, 1.3, 0.0), bath) == 0.0
    assert pi_closed_form(GaussianState(1.0, 1.3, 0.0), bath) > 0.0
    assert pi_closed_form(GaussianState(0.0, 1.3, 0.4), bath) > 0.0


def test_production_nonnegative_everywhere():
    rng = np.random.default_rng(77)
    baths = _random_baths(rng, 40) + [Dephasing(0.6)]
    count = 0
    for bath in baths:
        for st in _random_states(rng, 25):
            t = rng.uniform(0, 3)
            assert pi_closed_form(st, bath, t) >= 0.0
            count += 1
    assert count == 1025


def test_balance_identity_closed_form():
    rng = np.random.default_rng(101)
    for bath in _random_baths(rng, 10) + [Dephasing(0.9)]:
        for st in _random_states(rng, 10):
            t = rng.uniform(0, 2)
            gap = entropy_rate(st, bath, None, t) \
                - (pi_closed_form(st, bath, t) - phi_rate(st, bath, t))
            assert abs(gap) <= 1e-9


def test_three_routes_agree_thermal():
    rng = np.random.default_rng(33)
    bath = Thermal(1.3, 0.6)
    for st in _random_states(rng, 6):
        a = pi_closed_form(st, bath)
        b = pi_quadratic_form(st, bath)
        c = pi_quadrature(st, bath)
        assert b == pytest.approx(a, rel=1e-12)
        assert c == pytest.approx(a, rel=1e-8)


def test_three_routes_agree_squeezed():
    rng = np.random.default_rng(34)
    bath = Squeezed(0.9, 0.3, 0.5, 1.1, 1.6)
    for st in _random_states(rng, 6, mu_scale=0.8):
        t = rng.uniform(0, 2)
        a = pi_closed_form(st, bath, t)
        b = pi_quadratic_form(st, bath, t)
        c = pi_quadrature(st, bath, t)
        assert b == pytest.approx(a, rel=1e-10)
        assert c == pytest.approx(a, rel=1e-7)


def test_quadratic_form_equivalence_many_draws():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        bath = Squeezed(rng.uniform(0.3, 2.0), rng.uniform(0, 1.2),
                        rng.uniform(0, 1.1), rng.uniform(0, 2 * np.pi),
                        rng.uniform(-2, 2))
        st = _random_states(rng, 1)[0]
        t = rng.uniform(0, 3)
        a = pi_closed_form(st, bath, t)
        b = pi_quadratic_form(st, bath, t)
        assert abs(b - a) <= 1e-10 * max(1.0, abs(a))


def test_dephasing_quadrature_route():
    bath = Dephasing(0.7)
    st = GaussianState(1.0 - 0.3j, 0.8, 0.1 + 0.05j)
    a = pi_closed_form(st, bath)
    c = pi_quadrature(st, bath)
    assert c == pytest.approx(a, rel=1e-8)
    assert a == pytest.approx(entropy_rate(st, bath), rel=1e-13)


def test_phi_quadrature_route():
    bath = Thermal(1.1, 0.4)
    st = GaussianState(0.7 + 0.2j, 1.1, 0.3)
    a = phi_rate(st, bath)
    b = phi_rate(st, bath, method=Method.QUADRATURE)
    assert b == pytest.approx(a, rel=1e-10)


def test_rate_report_balance_residual():
    bath = Squeezed(1.0, 0.2, 0.4, 0.5, 1.2)
    st = GaussianState(0.6, 1.0, 0.2j)
    for method in Method:
        rep = rate_report(st, bath, None, 0.7, method)
        assert rep.pi >= 0.0
        assert rep.balance_residual <= 1e-6
        assert rep.entropy_rate == pytest.approx(rep.pi - rep.phi,
                                                 abs=1e-6)


def test_rate_report_detects_broken_balance(monkeypatch):
    import wigflux.rates as rates_mod
    monkeypatch.setattr(rates_mod, "entropy_rate",
                        lambda *a, **k: 123.0)
    with pytest.raises(BalanceError):
        rate_report(GaussianState.coherent(1.0), Thermal(1.0, 0.0))


def test_pi_rate_dispatch():
    st = GaussianState.coherent(0.5)
    bath = Thermal(1.0, 0.1)
    assert pi_rate(st, bath) == pi_closed_form(st, bath)
    assert pi_rate(st, bath, method=Method.QUADRATIC_FORM) == \
        pi_quadratic_form(st, bath)
    with pytest.raises(UnsupportedOperation):
        pi_rate(st, bath, method="nope")


def test_steady_state_production_equals_flux():
    rng = np.random.default_rng(404)
    for _ in range(50):
        gamma = rng.uniform(0.2, 3.0)
        om_c = rng.uniform(0.5, 2.0)
        bath = Squeezed(gamma, 0.0, rng.uniform(0, 1.2),
                        rng.uniform(0, 2 * np.pi),
                        om_c + rng.uniform(-1.5, 1.5))
        eps = rng.uniform(0.1, 1.5) * cmath.exp(1j * rng.uniform(0, 2 * np.pi))
        ham = HamiltonianSpec(om_c, Pump(eps, om_c + rng.uniform(-1, 1)))
        t = rng.uniform(0, 3)
        ss = steady_state(bath, ham, t)
        a = pi_steady_state(bath, ham, t)
        b = phi_rate(ss, bath, t)
        assert abs(a - b) <= 1e-10 * max(1.0, abs(b))
        # dS/dt vanishes identically on the attractor
        assert entropy_rate(ss, bath, ham, t) == pytest.approx(0.0, abs=1e-10)


def test_steady_state_production_pinned_value():
    bath = Squeezed(2.0, 0.0, 0.5, 0.0, 1.9)
    ham = HamiltonianSpec(1.0)
    assert pi_steady_state(bath, ham) == pytest.approx(1.2361207236, rel=1e-9)
    # scales linearly with kappa at fixed detuning ratio
    bath2 = Squeezed(4.0, 0.0, 0.5, 0.0, 1.0 + 1.8)
    ham2 = HamiltonianSpec(1.0)
    assert pi_steady_state(bath2, ham2) == pytest.approx(2 * 1.2361207236,
                                                         rel=1e-9)


def test_steady_state_production_time_average():
    bath = Squeezed(1.0, 0.0, 0.4, 0.2, 1.5)
    ham = HamiltonianSpec(1.0, Pump(0.6, 0.8))
    inst = [pi_steady_state(bath, ham, t) for t in np.linspace(0, 40, 4001)]
    avg = pi_steady_state(bath, ham, 0.0, time_averaged=True)
    # the cross term rotates at 2(omega_p - omega_s) and averages away
    assert avg == pytest.approx(np.mean(inst), rel=2e-3)
    still = Squeezed(1.0, 0.0, 0.4, 0.2, 0.8)  # omega_s = omega_p
    assert pi_steady_state(still, ham, 0.3, time_averaged=True) == \
        pytest.approx(pi_steady_state(still, ham, 0.3), rel=1e-14)


def test_steady_state_production_r_zero_reduces_to_pump_term():
    gamma = 1.4
    bath = Squeezed(gamma, 0.3, 0.0, 0.0, 1.0)
    ham = HamiltonianSpec(1.0, Pump(0.7, 0.6))
    ss = steady_state(bath, ham, 0.0)
    want = gamma / bath.sigma * abs(ss.mu) ** 2
    assert pi_steady_state(bath, ham, 0.0) == pytest.approx(want, rel=1e-12)


def test_frame_transform_preserves_det_and_maps_current():
    bath = Squeezed(1.0, 0.2, 0.6, 0.9, 1.3)
    st = GaussianState(0.8 - 0.2j, 1.1, 0.2 + 0.1j)
    t = 0.7
    stb = to_squeezed_frame(st, bath, t)
    assert stb.det == pytest.approx(st.det, rel=1e-12)
    # transported current equals the b-frame current at the image points
    pts = np.array([0.4 + 0.2j, -0.6 + 0.9j, 1.2 - 0.5j])
    jb = jb_via_thermal_identity(pts, st, bath, t)
    beta = squeezed_frame_points(pts, bath, t)
    direct = current_eval(beta, st, bath, t, CurrentKind.SQUEEZED_FRAME)
    np.testing.assert_allclose(jb, direct, rtol=1e-11, atol=1e-14)


def test_lab_current_matches_frame_current():
    bath = Squeezed(1.0, 0.1, 0.5, 0.3, 1.1)
    st = GaussianState(0.5, 0.9, 0.1j)
    t = 0.4
    pts = np.array([0.3 - 0.8j, 1.0 + 0.4j])
    jz = current_eval(pts, st, bath, t, CurrentKind.SQUEEZED_LAB)
    j_th = current_eval(pts, st, bath, t, CurrentKind.THERMAL)
    ph = cmath.exp(1j * (bath.theta - 2 * bath.omega_s * t))
    c, sh = math.cosh(bath.r), math.sinh(bath.r)
    w = wigner_eval(st, pts)
    lhs = c * j_th + ph * sh * (bath.gamma * np.conj(pts) * w - np.conj(j_th))
    rhs = c * jz + ph * sh * np.conj(jz)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-11)


def test_field_closed_form_matches_current_route():
    bath = Squeezed(2.0, 0.0, 0.5, 0.0, 1.9)
    ham = HamiltonianSpec(1.0)
    ss = steady_state(bath, ham, 0.0)
    x = np.linspace(-3, 3, 101)
    pts = x[:, None] + 1j * x[None, :]
    jb = current_eval(pts, ss, bath, 0.0, CurrentKind.SQUEEZED_FRAME)
    wb = wigner_eval(to_squeezed_frame(ss, bath, 0.0), pts)
    direct = np.abs(jb / wb) ** 2
    closed = jb_field_squared(pts, bath, ham)
    assert np.max(np.abs(direct - closed)) <= 1e-8
    num = 0.81 * math.sinh(1.0) ** 2
    den = 1.0 + 0.81 * math.cosh(1.0) ** 2
    assert jb_field_squared(np.array([1.0 + 0j]), bath, ham)[0] == \
        pytest.approx(num / den, rel=1e-13)
    assert num / den == pytest.approx(0.3819760847, abs=1e-9)


def test_field_squared_independent_of_nbar():
    ham = HamiltonianSpec(1.0)
    pts = np.array([0.5 + 0.5j, -1.0 + 0.2j])
    a = jb_field_squared(pts, Squeezed(2.0, 0.0, 0.5, 0.3, 1.9), ham)
    b = jb_field_squared(pts, Squeezed(2.0, 1.4, 0.5, 0.3, 1.9), ham)
    np.testing.assert_allclose(a, b, rtol=1e-13)


def test_field_squared_vanishes_without_squeezing_or_detuning():
    ham = HamiltonianSpec(1.0)
    pts = np.array([0.7 - 0.4j, 1.5 + 1.0j])
    assert np.all(jb_field_squared(pts, Squeezed(2.0, 0.0, 0.0, 0.0, 1.9),
                                   ham) == 0.0)
    assert np.all(jb_field_squared(pts, Squeezed(2.0, 0.0, 0.5, 0.0, 1.0),
                                   ham) == 0.0)


def test_quadrature_mass_guard():
    st = GaussianState.coherent(0.0)
    bath = Thermal(1.0, 0.2)
    tight = QuadratureSpec(n_nodes=21, k_sigma=1.0)
    from wigflux.errors import AccuracyError
    with pytest.raises(AccuracyError):
        pi_quadrature(st, bath, spec=tight)


def test_vn_rates_high_temperature_limit():
    om = 1.0
    ham = HamiltonianSpec(om)
    from wigflux.model import nbar_from_temperature
    nbar = nbar_from_temperature(100.0, om)
    bath = Thermal(1.0, nbar)
    st = GaussianState(0.0, nbar + 0.6 + 0.5, 0.0)
    phi = phi_rate(st, bath)
    vn = vn_rates(st, bath, ham)
    assert abs(phi - vn.phi) / abs(phi) <= 1e-4
    assert vn.temperature == pytest.approx(100.0, rel=1e-10)


def test_vn_rates_zero_temperature_limit():
    om = 1.0
    ham = HamiltonianSpec(om)
    bath = Thermal(1.0, 0.0)
    st = GaussianState(0.0, 0.8, 0.0)
    vn = vn_rates(st, bath, ham)
    fe = energy_flux(st, bath, ham)
    assert fe > 0.0
    assert vn.phi == math.inf
    assert phi_rate(st, bath) == pytest.approx(2.0 * fe / om, rel=1e-12)


def test_vn_entropy_rate_matches_balance():
    ham = HamiltonianSpec(1.0)
    bath = Thermal(1.0, 0.8)
    st = GaussianState(0.9, 1.6, 0.1)
    vn = vn_rates(st, bath, ham)
    assert vn.entropy_rate == pytest.approx(vn.pi - vn.phi, rel=1e-6)
    assert vn.pi >= 0.0


def test_entropy_rate_via_evolution():
    # dS/dt from the moment flow equals a finite difference of S(t)
    from wigflux.phasespace import wigner_entropy
    bath = Squeezed(1.0, 0.3, 0.4, 0.6, 1.2)
    ham = HamiltonianSpec(1.1)
    st = GaussianState(0.7, 1.0, 0.2)
    t1, h = 0.5, 1e-5
    now = evolve(st, bath, ham, 0.0, t1).final
    ahead = evolve(st, bath, ham, 0.0, t1 + h).final
    behind = evolve(st, bath, ham, 0.0, t1 - h).final
    fd = (wigner_entropy(ahead) - wigner_entropy(behind)) / (2 * h)
    assert entropy_rate(now, bath, ham, t1) == pytest.approx(fd, abs=1e-7)

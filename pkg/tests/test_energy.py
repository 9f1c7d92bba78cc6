import numpy as np
import pytest

from fowler6 import (
    State,
    auxiliary_summands,
    derive_constants,
    equilibrium_amplitude,
    hamiltonian,
    hamiltonian_time_derivative,
    homoclinic_jet,
    integrate,
    monitor_orbit,
    potential_well,
)
from fowler6.energy import hamiltonian_array, hamiltonian_value
from fowler6.integrator import Orbit, Event
from fowler6.profiles import homoclinic_derivatives


def test_requires_third_order():
    params, spec = derive_constants(5, 2)
    with pytest.raises(ValueError, match="m = 3"):
        hamiltonian(params, spec, State(0.0, np.zeros(4)))


def test_equilibrium_energy(p7):
    params, spec = p7
    a_star = equilibrium_amplitude(params, spec)
    br = hamiltonian(params, spec, State(0.0, [a_star, 0, 0, 0, 0, 0]))
    # oracle: direct evaluation of chat a*^(2n/(n-6)) - (K0/2) a*^2
    oracle = params.chat * a_star**14 - 0.5 * spec.K[0] * a_star**2
    assert br.H == pytest.approx(oracle, rel=1e-14)
    assert br.H == pytest.approx(-10.324484039823375, abs=1e-12)
    assert br.H < 0
    assert br.R == 0.0 and br.kinetic3 == 0.0
    assert br.H == pytest.approx(br.G, rel=1e-14)


def test_zero_state(p7):
    params, spec = p7
    br = hamiltonian(params, spec, State(0.0, np.zeros(6)))
    assert br.H == 0.0


def test_homoclinic_energy_is_zero(p7):
    params, spec = p7
    for t in (0.0, 1.0, 5.0):
        br = hamiltonian(params, spec, homoclinic_jet(params, t))
        assert abs(br.H) < 1e-10


def test_auxiliary_summands(p7):
    params, spec = p7
    a_star = equilibrium_amplitude(params, spec)
    assert auxiliary_summands(params, spec, State(0.0, [a_star, 0, 0, 0, 0, 0])) == (0.0, 0.0)
    e1, e2 = auxiliary_summands(params, spec, State(0.0, [0.3, 0, 0.2, 0, -0.4, 0]))
    assert e1 == 0.0
    assert e2 == pytest.approx(0.4 + 0.5 * spec.K[2] * 0.2, rel=1e-14)


def test_breakdown_identity(p7, rng):
    params, spec = p7
    for y in rng.normal(scale=1.5, size=(50, 6)):
        br = hamiltonian(params, spec, State(0.0, y))
        assert br.H == pytest.approx(br.kinetic3 + br.e1_term + br.e2_term + br.G, rel=1e-13)
        assert br.R == pytest.approx(br.H - br.G - br.kinetic3, abs=1e-12 * (1 + abs(br.H)))


def test_two_regroupings_agree_on_random_states(p7, rng):
    params, spec = p7
    ys = rng.normal(scale=2.0, size=(100_000, 6))
    K0, K2, K4 = spec.K[0], spec.K[1], spec.K[2]
    # factorized form, vectorized
    E1 = ys[:, 5] - K4 * ys[:, 3] + 0.5 * K2 * ys[:, 1]
    E2 = -ys[:, 4] + 0.5 * K4 * ys[:, 2]
    F = params.chat * np.abs(ys[:, 0]) ** params.f_power
    G = F - 0.5 * K0 * ys[:, 0] ** 2
    fac = 0.5 * ys[:, 3] ** 2 + E2 * ys[:, 2] + E1 * ys[:, 1] + G
    defining = hamiltonian_array(params, spec, ys)
    scale = np.maximum(1.0, np.abs(defining))
    assert np.max(np.abs(fac - defining) / scale) < 1e-12


def test_chain_rule_derivative_vanishes(p7, rng):
    # phase points stay in the strip |v| <= 1 where bounded orbits live
    params, spec = p7
    worst = 0.0
    for y in rng.normal(scale=1.0, size=(100, 6)):
        y[0] = np.clip(y[0], -1.0, 1.0)
        worst = max(worst, abs(hamiltonian_time_derivative(params, spec, State(0.0, y))))
    assert worst < 1e-10


def test_conservation_along_orbit(p7):
    params, spec = p7
    orb = integrate(params, spec, homoclinic_jet(params, -2.5), 5.0)
    H = hamiltonian_array(params, spec, orb.ys)
    assert np.max(np.abs(H - H[0])) <= 1e-9 * (1.0 + abs(H[0]))


def _analytic_orbit(params, spec, ts):
    """Closed-form homoclinic samples packed as an Orbit for the monitor."""
    d = homoclinic_derivatives(params, ts, 5)
    ys = d.T
    ev = [Event("v1-zero", 0.0, State(0.0, homoclinic_jet(params, 0.0).y))]
    return Orbit(ts=np.asarray(ts, float), ys=ys, events=ev,
                 status="completed", status_t=float(ts[-1]))


def test_monitor_on_analytic_homoclinic(p7):
    params, spec = p7
    ts = np.linspace(-15.0, 15.0, 3001)
    rep = monitor_orbit(params, spec, _analytic_orbit(params, spec, ts))
    assert rep.max_drift < 1e-9
    assert rep.r_min > -1e-9
    assert len(rep.maxima) == 1 and not rep.minima
    assert rep.maxima[0] == pytest.approx(1.0, abs=1e-12)
    assert rep.sign1_margin > -1e-9
    assert not rep.violations
    # the quoted pointwise second identity genuinely fails on the closed form
    assert rep.sign2_quoted_holds is False


def test_monitor_on_constant_orbit(p7):
    params, spec = p7
    a_star = equilibrium_amplitude(params, spec)
    ts = np.linspace(0.0, 10.0, 101)
    ys = np.tile([a_star, 0, 0, 0, 0, 0], (101, 1))
    orb = Orbit(ts=ts, ys=ys, events=[], status="completed", status_t=10.0)
    rep = monitor_orbit(params, spec, orb)
    assert rep.max_drift == 0.0
    assert rep.r_min == 0.0
    assert not rep.violations


def test_potential_well_shape(p7):
    params, spec = p7
    a_star = equilibrium_amplitude(params, spec)
    assert potential_well(params, spec, 0.0) == 0.0
    assert potential_well(params, spec, a_star) < 0
    assert potential_well(params, spec, 3.0) > 0
    # d/dv G = c|v|^(p-1) v - K0 v vanishes at a*
    h = 1e-7
    slope = (potential_well(params, spec, a_star + h) - potential_well(params, spec, a_star - h)) / (2 * h)
    assert abs(slope) < 1e-5


def test_hamiltonian_value_matches_breakdown(p7, rng):
    params, spec = p7
    y = rng.normal(size=6)
    assert hamiltonian_value(params, spec, y) == pytest.approx(
        hamiltonian(params, spec, State(0.0, y)).H, rel=1e-13
    )

import numpy as np
import pytest

from fowler6 import (
    Guards,
    IntegrationError,
    State,
    Tolerances,
    equilibrium_amplitude,
    homoclinic_jet,
    integrate,
    integrate_backward,
    reflect_state,
    rhs,
)
from fowler6.profiles import homoclinic_derivatives


def test_rhs_equilibrium_and_zero(p7):
    params, spec = p7
    a_star = equilibrium_amplitude(params, spec)
    f = rhs(params, spec, [a_star, 0, 0, 0, 0, 0])
    assert np.max(np.abs(f)) < 1e-12
    assert np.max(np.abs(rhs(params, spec, np.zeros(6)))) == 0.0


def test_rhs_unit_state(p7):
    params, spec = p7
    f = rhs(params, spec, [1.0, 0, 0, 0, 0, 0])
    assert f[-1] == pytest.approx(spec.K[0] - params.c, rel=1e-15)


def test_rhs_odd_symmetry(p7, rng):
    params, spec = p7
    y = rng.normal(size=6)
    assert np.allclose(rhs(params, spec, -y), -rhs(params, spec, y), rtol=1e-13)


def test_state_validation():
    with pytest.raises(ValueError):
        State(0.0, [np.nan, 0, 0, 0, 0, 0])


def test_equilibrium_orbit_constant(p7):
    params, spec = p7
    a_star = equilibrium_amplitude(params, spec)
    orb = integrate(params, spec, State(0.0, [a_star, 0, 0, 0, 0, 0]), 5.0)
    assert orb.status == "completed"
    assert np.max(np.abs(orb.ys[:, 0] - a_star)) < 1e-8


def test_homoclinic_jet_forward_short(p7):
    params, spec = p7
    orb = integrate(params, spec, homoclinic_jet(params, 0.0), 2.5)
    exact = homoclinic_derivatives(params, 2.5, 0)[0]
    assert abs(orb.ys[-1, 0] - exact) < 1e-8


def test_dense_output_matches_closed_form(p7):
    params, spec = p7
    orb = integrate(params, spec, homoclinic_jet(params, 0.0), 2.0)
    ts = np.linspace(0.0, 2.0, 23)
    vals = orb.y_at(ts)[:, 0]
    exact = homoclinic_derivatives(params, ts, 0)[0]
    assert np.max(np.abs(vals - exact)) < 1e-9


def test_self_convergence(p7):
    params, spec = p7
    y0 = homoclinic_jet(params, -1.0).y
    ends = []
    for scale in (1.0, 0.5):
        tol = Tolerances(rel=1e-10 * scale, abs=1e-12 * scale)
        orb = integrate(params, spec, State(0.0, y0), 2.0, tol=tol)
        ends.append(orb.ys[-1, 0])
    assert abs(ends[0] - ends[1]) < 10 * 0.5e-10 * max(1.0, abs(ends[1]))


def test_time_reversal(p7):
    params, spec = p7
    y0 = homoclinic_jet(params, -1.0).y
    fwd = integrate(params, spec, State(0.0, y0), 1.5)
    back = integrate(params, spec, State(0.0, reflect_state(fwd.ys[-1])), 1.5)
    assert np.max(np.abs(reflect_state(back.ys[-1]) - y0)) < 1e-10


def test_integrate_backward_matches_closed_form(p7):
    params, spec = p7
    orb = integrate_backward(params, spec, homoclinic_jet(params, 0.0), 2.0)
    assert orb.ts[0] == pytest.approx(-2.0)
    exact = homoclinic_derivatives(params, -2.0, 0)[0]
    assert abs(orb.ys[0, 0] - exact) < 1e-9


def test_event_detection_single_turning_point(p7):
    params, spec = p7
    orb = integrate(params, spec, homoclinic_jet(params, -2.2), 4.4)
    turns = [e for e in orb.events if e.kind == "v1-zero"]
    assert len(turns) == 1
    # localized on the interpolant and sitting at the symmetric maximum
    assert abs(turns[0].state.y[1]) < 1e-11
    assert abs(turns[0].t - (-2.2 + 2.2)) < 1e-8
    assert turns[0].state.y[0] == pytest.approx(1.0, abs=1e-9)


def test_guard_blow_up(p7):
    params, spec = p7
    orb = integrate(
        params, spec,
        State(0.0, [0.5, 0, 1000.0, 0, 1000.0, 0]),
        50.0,
        guards=Guards(v_max=3.0, v_min=-1e-3),
    )
    assert orb.status == "blew-up"
    assert orb.status_t < 1.0
    exits = [e for e in orb.events if e.kind == "threshold-exit"]
    assert len(exits) == 1
    assert abs(abs(exits[0].state.y[0]) - 3.0) < 1e-9


def test_guard_left_domain(p7):
    params, spec = p7
    orb = integrate(
        params, spec,
        State(0.0, [0.5, 0, 2.0, 0, 2.0, 0]),
        50.0,
        guards=Guards(v_max=3.0, v_min=-1e-3),
    )
    assert orb.status == "left-domain"
    assert orb.events[-1].state.y[0] == pytest.approx(-1e-3, abs=1e-9)


def test_unguarded_blowup_reports_underflow(p7):
    params, spec = p7
    with pytest.raises(IntegrationError, match="t="):
        integrate(params, spec, State(0.0, [0.5, 0, 1000.0, 0, 1000.0, 0]), 50.0)


def test_energy_drift_on_short_run(p7):
    from fowler6.energy import hamiltonian_array

    params, spec = p7
    orb = integrate(params, spec, homoclinic_jet(params, -2.0), 4.0)
    H = hamiltonian_array(params, spec, orb.ys)
    assert np.max(np.abs(H - H[0])) < 1e-9 * (1.0 + abs(H[0]))


def test_csv_round_trip(tmp_path, p7):
    import csv

    from fowler6.serialize import write_orbit_csv

    params, spec = p7
    orb = integrate(params, spec, homoclinic_jet(params, 0.0), 1.0)
    path = tmp_path / "orbit.csv"
    write_orbit_csv(path, params, spec, orb)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "v", "v1", "v2", "v3", "v4", "v5", "H"]
    # 17 significant digits round-trip 64-bit values exactly
    for i in (1, len(rows) // 2, len(rows) - 1):
        t = float(rows[i][0])
        k = np.searchsorted(orb.ts, t)
        assert orb.ts[k] == t
        assert all(float(s) == y for s, y in zip(rows[i][1:7], orb.ys[k]))

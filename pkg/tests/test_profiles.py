import math

import numpy as np
import pytest

from fowler6 import (
    ConstantProfile,
    PowerLawProfile,
    SphericalProfile,
    TabulatedProfile,
    ef_inverse,
    ef_transform,
    equilibrium_amplitude,
    homoclinic_jet,
    homoclinic_profile,
    kelvin_transform,
    kernel_positivity_sample,
    kernel_value,
    radial_polylaplacian,
    reconstruct,
    rhs,
    superharmonicity_check,
)
from fowler6.profiles import ef_derivatives, homoclinic_derivatives
from fowler6.shooting import quotient_check


# ---------------------------------------------------------------------------
# change of variables


def test_spherical_maps_to_sech_power(p7):
    params, _ = p7
    v = ef_transform(params, SphericalProfile(7, 3, mu=1.0))
    for t in (0.0, 1.0, -1.0, 2.0, -2.0):
        assert v(t) == pytest.approx(math.cosh(t) ** -0.5, rel=1e-14)


def test_round_trip_closed_kinds(p7):
    params, _ = p7
    for prof in (SphericalProfile(7, 3, 1.7), PowerLawProfile(0.8, -0.5)):
        u2 = ef_inverse(params, ef_transform(params, prof))
        for r in (0.3, 1.0, 2.6):
            assert u2(r) == pytest.approx(prof.value(r), rel=1e-12)


def test_equilibrium_profile_is_constant_on_log_side(p7):
    params, spec = p7
    a_star = equilibrium_amplitude(params, spec)
    v = ef_transform(params, PowerLawProfile(a_star, params.gamma))
    ts = np.linspace(-3, 3, 13)
    assert np.max(np.abs(v(ts) - a_star)) < 1e-13


def test_round_trip_tabulated(p7):
    params, _ = p7
    rr = np.linspace(0.2, 3.0, 200)
    prof = TabulatedProfile(rr, (2.0 / (1.0 + rr**2)) ** 0.5)
    u2 = ef_inverse(params, ef_transform(params, prof))
    rq = np.linspace(0.3, 2.5, 17)
    for r in rq:
        assert u2(r) == pytest.approx(prof.value(r), rel=1e-10)


# ---------------------------------------------------------------------------
# homoclinic connection


def test_homoclinic_jet_against_finite_differences(p7):
    params, _ = p7
    gamma = params.gamma
    h = 0.01
    f = lambda t: math.cosh(t) ** gamma
    for t0 in (0.0, 0.8, -1.7):
        jet = homoclinic_jet(params, t0).y
        vals = np.array([f(t0 + k * h) for k in range(-4, 5)])
        fd2 = (-vals[6] + 16 * vals[5] - 30 * vals[4] + 16 * vals[3] - vals[2]) / (12 * h**2)
        fd1 = (-vals[6] + 8 * vals[5] - 8 * vals[3] + vals[2]) / (12 * h)
        assert jet[1] == pytest.approx(fd1, abs=1e-9)
        assert jet[2] == pytest.approx(fd2, abs=1e-8)


def test_homoclinic_jet_at_origin(p7):
    params, _ = p7
    jet = homoclinic_jet(params, 0.0).y
    assert jet[0] == 1.0
    assert jet[1] == jet[3] == jet[5] == 0.0  # even function
    assert jet[2] == pytest.approx(params.gamma, abs=0)  # second derivative is gamma


def test_homoclinic_solves_equation(p7):
    params, spec = p7
    ts = np.linspace(-10, 10, 50)
    d = homoclinic_derivatives(params, ts, 6)
    for i in range(len(ts)):
        v6 = rhs(params, spec, d[:6, i])[-1]
        terms = max(abs(d[6, i]), abs(spec.K[2] * d[4, i]), 1e-300)
        assert abs(v6 - d[6, i]) / terms < 1e-11


def test_homoclinic_decay(p7):
    params, _ = p7
    far = homoclinic_jet(params, 30.0).y
    assert np.max(np.abs(far)) < 1e-6


def test_homoclinic_profile_is_shifted_bubble(p7):
    params, _ = p7
    prof = homoclinic_profile(params, T=0.3)
    mu = math.exp(0.3)
    ref = SphericalProfile(7, 3, mu=mu)
    for r in (0.5, 1.0, 2.0):
        assert prof.value(r) == pytest.approx(ref.value(r), rel=1e-14)


# ---------------------------------------------------------------------------
# radial differentiation oracle


def test_polylaplacian_on_power_law(p7):
    from fowler6 import polyharmonic_power_law

    prof = PowerLawProfile(1.0, 1.0)
    got = radial_polylaplacian(7, 3, prof, 1.0)
    assert got == pytest.approx(polyharmonic_power_law(7, 3, 1.0), rel=1e-12)


def test_polylaplacian_constant(p7):
    assert radial_polylaplacian(7, 3, ConstantProfile(2.2), 1.3) == pytest.approx(0.0, abs=1e-12)


def test_bubble_solves_equation(p7):
    params, spec = p7
    prof = SphericalProfile(7, 3, 1.0)
    vals = []
    for r in (0.5, 1.0, 2.0):
        u = prof.value(r)
        vals.append(radial_polylaplacian(7, 3, prof, r) / u**params.p)
    spread = (max(vals) - min(vals)) / abs(np.mean(vals))
    assert spread < 1e-8
    assert np.mean(vals) == pytest.approx(params.c, rel=1e-10)


# ---------------------------------------------------------------------------
# inversion transform


def test_kelvin_fixed_point(p7):
    params, _ = p7
    mu = 1.4
    prof = SphericalProfile(7, 3, mu=mu)
    kp = kelvin_transform(params, prof, mu)
    for r in (mu / 2, mu, 2 * mu):
        assert kp.value(r) == pytest.approx(prof.value(r), rel=1e-12)


def test_kelvin_involution(p7):
    params, _ = p7
    prof = SphericalProfile(7, 3, mu=0.9)
    double = kelvin_transform(params, kelvin_transform(params, prof, 1.3), 1.3)
    for r in (0.4, 1.0, 2.2):
        assert double.value(r) == pytest.approx(prof.value(r), rel=1e-12)


def test_kelvin_is_log_side_reflection(p7):
    params, _ = p7
    mu = 1.25
    prof = SphericalProfile(7, 3, mu=0.8)
    v = ef_transform(params, prof)
    vk = ef_transform(params, kelvin_transform(params, prof, mu))
    for t in (-1.0, 0.0, 0.7, 1.5):
        assert vk(t) == pytest.approx(v(2 * math.log(mu) - t), rel=1e-12)


# ---------------------------------------------------------------------------
# comparison kernel


def test_kernel_boundary_inversion_sphere(p7, rng):
    n = 7
    for _ in range(10):
        x = rng.normal(size=n)
        mu = 0.5 + rng.random()
        zdir = rng.normal(size=n)
        z = x + mu * zdir / np.linalg.norm(zdir)
        y = x + 2.0 * mu * rng.normal(size=n) / np.linalg.norm(rng.normal(size=n))
        assert abs(kernel_value(n, x, y, z, mu)) < 1e-12


def test_kernel_vanishes_whenever_y_sits_on_the_sphere(p7, rng):
    # E is identically zero for |y-x| = mu, for every admissible z
    n = 7
    for _ in range(10):
        x = rng.normal(size=n)
        mu = 0.4 + rng.random()
        ydir = rng.normal(size=n)
        y = x + mu * ydir / np.linalg.norm(ydir)
        zdir = rng.normal(size=n)
        z = x + (1.5 + 2 * rng.random()) * mu * zdir / np.linalg.norm(zdir)
        assert abs(kernel_value(n, x, y, z, mu)) < 1e-12


def test_kernel_positive_on_admissible_draws():
    rep = kernel_positivity_sample(7, 10_000, seed=1234)
    assert rep["negatives"] == 0
    assert rep["min_E"] > 0
    assert rep["boundary_max_abs"] < 1e-12


def test_kernel_negative_inside(p7, rng):
    n = 7
    x = np.zeros(n)
    y = np.zeros(n)
    y[0] = 0.5  # inside the unit sphere
    z = np.zeros(n)
    z[1] = 2.0
    assert kernel_value(n, x, y, z, 1.0) < 0


def test_kernel_preconditions(p7):
    n = 7
    x = np.zeros(n)
    z = np.zeros(n)
    z[0] = 0.5
    with pytest.raises(ValueError, match=r"\|z - x\|"):
        kernel_value(n, x, np.ones(n), z, 1.0)


# ---------------------------------------------------------------------------
# superharmonicity in logarithmic coordinates


def test_superharmonicity_derivation_matches_symbolic_oracle(p7):
    sympy = pytest.importorskip("sympy")
    from fowler6.profiles import superharmonicity_coefficients

    n, r, t = sympy.symbols("n r t", positive=True)
    v = sympy.Function("v")
    gamma = (6 - n) / 2

    def lap(f):
        return sympy.diff(f, r, 2) + (n - 1) / r * sympy.diff(f, r)

    u = r**gamma * v(sympy.log(r))
    core2 = sympy.expand(sympy.simplify(lap(u) / r ** (gamma - 2)).subs(sympy.log(r), t).doit())
    core4 = sympy.expand(sympy.simplify(lap(lap(u)) / r ** (gamma - 4)).subs(sympy.log(r), t).doit())
    for nn in (7, 9, 13):
        coefs = superharmonicity_coefficients(nn)
        got2 = [sympy.nsimplify(core2.coeff(v(t).diff(t, k) if k else v(t)).subs(n, nn)) for k in range(3)]
        assert [float(g) for g in got2] == pytest.approx(list(coefs["corrected2"]))
        got4 = [sympy.nsimplify(core4.coeff(v(t).diff(t, k) if k else v(t)).subs(n, nn)) for k in range(5)]
        assert [float(g) for g in got4] == pytest.approx(list(coefs["corrected4"]))


def test_superharmonicity_constant_solution(p7):
    params, spec = p7
    a_star = equilibrium_amplitude(params, spec)
    D = np.zeros((5, 1))
    D[0, 0] = a_star
    rep = superharmonicity_check(params, D)
    assert not rep["violations"]
    # the quoted second-order variant fails already on the constant solution
    assert rep["quoted2_holds"] is False
    assert rep["nu_minus_real"] is None  # the minus branch is complex at n = 7


def test_superharmonicity_homoclinic(p7):
    params, _ = p7
    D = homoclinic_derivatives(params, np.linspace(-15, 15, 1501), 4)
    rep = superharmonicity_check(params, D)
    assert not rep["violations"]
    # margins close toward zero along the tails, so allow rounding slack
    assert rep["corrected2_max"] <= 1e-12
    assert rep["corrected4_min"] >= -1e-12


def test_superharmonicity_periodic(p7, sol05):
    params, _ = p7
    ys = np.array([s.y for s in sol05.samples])
    rep = superharmonicity_check(params, ys[:, :5].T)
    assert not rep["violations"]
    assert rep["corrected2_max"] < 0.0
    assert rep["corrected4_min"] > 0.0


# ---------------------------------------------------------------------------
# reconstruction


def test_reconstruct_pde_residual(p7, sol05):
    params, _ = p7
    prof = reconstruct(params, sol05, T=0.0)
    radii = np.exp(np.linspace(-1.5 * sol05.period, 1.5 * sol05.period, 20))
    rows = prof.pde_residual(radii)
    assert max(r["residual"] for r in rows) < 1e-6
    assert all(prof.radial_derivative(float(r)) < 0 for r in radii)


def test_reconstruct_matches_log_side(p7, sol05):
    params, _ = p7
    prof = reconstruct(params, sol05, T=0.0)
    v = ef_transform(params, prof)
    # the log side of the reconstruction is the orbit, up to time reversal
    for t in (-0.9, 0.0, 1.3):
        assert v(t) == pytest.approx(sol05.state_at(-t)[0], rel=1e-9)


def test_reconstruct_equilibrium_limit_is_power_law(p7):
    params, spec = p7
    a_star = equilibrium_amplitude(params, spec)
    prof = PowerLawProfile(a_star, params.gamma)
    for r in (0.5, 1.0, 2.0):
        lhs = radial_polylaplacian(7, 3, prof, r)
        rhs_val = params.c * prof.value(r) ** params.p
        assert lhs == pytest.approx(rhs_val, rel=1e-12)


def test_reconstruct_requires_dense_samples(p7, sol05):
    params, _ = p7
    thin = type(sol05)(
        a0=sol05.a0, a2=sol05.a2, a4=sol05.a4, period=sol05.period,
        max_value=sol05.max_value, energy=sol05.energy,
        newton_residual=sol05.newton_residual, samples=sol05.samples[:64],
        orbit=sol05.orbit,
    )
    with pytest.raises(ValueError, match="at least"):
        reconstruct(params, thin)


def test_tabulated_requires_enough_samples():
    rr = np.linspace(0.5, 2.0, 10)
    with pytest.raises(ValueError, match="at least"):
        TabulatedProfile(rr, rr**-0.5)


def test_ef_derivatives_match_log_side_jet(p7):
    params, _ = p7
    prof = SphericalProfile(7, 3, 1.0)
    for t in (-0.7, 0.4):
        got = ef_derivatives(params, prof, t, 4)
        exact = homoclinic_derivatives(params, t, 4).ravel()
        assert np.allclose(got, exact, rtol=1e-10)


def test_quotient_on_homoclinic(p7):
    params, spec = p7
    ts = np.linspace(-12, 12, 2001)
    d = homoclinic_derivatives(params, ts, 5)
    rep = quotient_check(params, spec, d.T)
    assert rep["w_max"] < spec.mu[0]
    # the slope ratio approaches but never attains the slow rate
    gamma = params.gamma
    w = d[1] / d[0]
    assert w[0] == pytest.approx(gamma * math.tanh(-12.0), rel=1e-12)
    assert rep["phi1_max"] < 0
    assert rep["phi2_sign_derived_positive_holds"]

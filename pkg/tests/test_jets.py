import math

import numpy as np
import pytest

from fowler6.jets import (
    Jet,
    compose_outer,
    jet_variable,
    laplacian_jet,
    power_law_jet,
    radial_polylaplacian_jet,
)


def test_arithmetic_against_analytic_derivatives():
    # f(x) = x^2 / (1 + x^3) at x = 0.7, derivatives to order 4
    x0 = 0.7
    x = jet_variable(x0, 4)
    f = (x * x) / (1.0 + x * x * x)
    d = f.derivative_values()
    h = 1e-3
    vals = [(x0 + k * h) ** 2 / (1 + (x0 + k * h) ** 3) for k in range(-4, 5)]
    fd1 = (-vals[6] + 8 * vals[5] - 8 * vals[3] + vals[2]) / (12 * h)
    fd2 = (-vals[6] + 16 * vals[5] - 30 * vals[4] + 16 * vals[3] - vals[2]) / (
        12 * h**2
    )
    assert d[1] == pytest.approx(fd1, rel=1e-9)
    assert d[2] == pytest.approx(fd2, rel=1e-7)


def test_power_and_log():
    x = jet_variable(2.0, 5)
    p = x.power(-0.5)
    assert p.value == pytest.approx(2.0**-0.5, rel=1e-15)
    assert p.derivative_values()[1] == pytest.approx(-0.5 * 2.0**-1.5, rel=1e-13)
    lg = x.log()
    assert lg.value == pytest.approx(math.log(2.0), rel=1e-15)
    assert lg.derivative_values()[2] == pytest.approx(-0.25, rel=1e-13)


def test_reciprocal_roundtrip():
    x = jet_variable(1.7, 6)
    f = 1.0 + x * x
    g = f * f.reciprocal()
    assert g.c[0] == pytest.approx(1.0, abs=1e-15)
    assert np.max(np.abs(g.c[1:])) < 1e-14


def test_compose_outer_chain_rule():
    # g(y) = y^3 at y = f(x) = 1 + 2x, x0 = 0.3
    inner = Jet([1.6, 2.0, 0.0, 0.0])
    outer_derivs = [1.6**3, 3 * 1.6**2, 6 * 1.6, 6.0]
    comp = compose_outer(outer_derivs, inner)
    d = comp.derivative_values()
    assert d[0] == pytest.approx(1.6**3)
    assert d[1] == pytest.approx(3 * 1.6**2 * 2.0)
    assert d[2] == pytest.approx(6 * 1.6 * 4.0)


def test_laplacian_on_power_law():
    # Lap r^q = q(q + n - 2) r^(q-2) on radial functions
    n, q, r = 7, 1.3, 0.9
    f = power_law_jet(q, r, 4)
    lap = laplacian_jet(f, r, n)
    assert lap.value == pytest.approx(q * (q + n - 2) * r ** (q - 2), rel=1e-13)


def test_triple_laplacian_constant_is_zero():
    got = radial_polylaplacian_jet(7, 3, lambda r, k: Jet([3.14] + [0.0] * k), 1.0)
    assert got == pytest.approx(0.0, abs=1e-13)


def test_jet_errors():
    with pytest.raises(ZeroDivisionError):
        Jet([0.0, 1.0]).reciprocal()
    with pytest.raises(ValueError):
        Jet([-1.0, 1.0]).power(0.5)
    with pytest.raises(ValueError):
        Jet([0.0, 1.0]).log()

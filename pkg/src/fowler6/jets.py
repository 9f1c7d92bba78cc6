"""Truncated Taylor-series (jet) arithmetic for nested radial differentiation.

A Jet stores the coefficients a_0..a_L of f(x0 + h) = sum a_k h^k.  Forward
propagation through products, quotients, real powers and composition gives
derivatives of profile evaluators to machine accuracy; the radial
poly-Laplacian oracle is built on top by repeated application of
Lap f = f'' + (n-1)/r f'.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = [
    "Jet",
    "jet_variable",
    "jet_log1p_series",
    "compose_outer",
    "laplacian_jet",
    "radial_polylaplacian_jet",
    "bubble_jet",
    "power_law_jet",
]


class Jet:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    @property
    def value(self) -> float:
        return float(self.c[0])

    def derivative_values(self) -> np.ndarray:
        """(f, f', f'', ...) at the expansion point: k! * a_k."""
        k = np.arange(len(self.c))
        return self.c * np.array([math.factorial(int(i)) for i in k])

    def __add__(self, other):
        if isinstance(other, Jet):
            L = min(len(self.c), len(other.c))
            return Jet(self.c[:L] + other.c[:L])
        out = self.c.copy()
        out[0] += other
        return Jet(out)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            L = min(len(self.c), len(other.c))
            out = np.zeros(L)
            for k in range(L):
                out[k] = np.dot(self.c[: k + 1], other.c[k::-1][: k + 1])
            return Jet(out)
        return Jet(self.c * other)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        a = self.c
        if a[0] == 0.0:
            raise ZeroDivisionError("jet reciprocal with zero leading coefficient")
        L = len(a)
        b = np.zeros(L)
        b[0] = 1.0 / a[0]
        for k in range(1, L):
            b[k] = -np.dot(a[1 : k + 1], b[k - 1 :: -1][:k]) / a[0]
        return Jet(b)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.c / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def power(self, alpha: float) -> "Jet":
        """Real power via the standard recurrence; needs a positive lead term."""
        a = self.c
        if a[0] <= 0.0:
            raise ValueError("jet power needs a positive leading coefficient")
        L = len(a)
        b = np.zeros(L)
        b[0] = a[0] ** alpha
        for k in range(1, L):
            s = 0.0
            for j in range(1, k + 1):
                s += ((alpha + 1.0) * j - k) * a[j] * b[k - j]
            b[k] = s / (k * a[0])
        return Jet(b)

    def log(self) -> "Jet":
        a = self.c
        if a[0] <= 0.0:
            raise ValueError("jet log needs a positive leading coefficient")
        L = len(a)
        b = np.zeros(L)
        b[0] = math.log(a[0])
        # b' = a'/a, solved coefficientwise
        for k in range(1, L):
            s = k * a[k]
            for j in range(1, k):
                s -= j * b[j] * a[k - j]
            b[k] = s / (k * a[0])
        return Jet(b)


def jet_variable(x0: float, order: int) -> Jet:
    c = np.zeros(order + 1)
    c[0] = x0
    if order >= 1:
        c[1] = 1.0
    return Jet(c)


def jet_log1p_series(x: Jet) -> Jet:
    """log(1 + x) for a jet with zero leading coefficient."""
    return (x + 1.0).log()


def compose_outer(outer_derivs, inner: Jet) -> Jet:
    """Jet of g(f(...)) from derivatives of g at inner.value.

    ``outer_derivs`` are (g, g', ..., g^(L)) at the point inner.c[0]; the
    inner jet must carry at least the same order.  Horner evaluation of the
    outer Taylor polynomial in (inner - inner.value).
    """
    L = inner.order
    dx = Jet(np.concatenate(([0.0], inner.c[1 : L + 1])))
    acc = Jet(np.zeros(L + 1))
    for k in range(L, -1, -1):
        acc = acc * dx + outer_derivs[k] / math.factorial(k)
    return acc


def laplacian_jet(f: Jet, r: float, n: int) -> Jet:
    """Jet of f'' + (n-1)/r f' at r, two orders shorter than f."""
    L = f.order
    if L < 2:
        raise ValueError("jet order too low for a Laplacian application")
    k = np.arange(1, L + 1)
    fp = Jet(f.c[1:] * k)  # order L-1
    kk = np.arange(2, L + 1)
    fpp = Jet(f.c[2:] * kk * (kk - 1))  # order L-2
    # (n-1)/(r+h) expanded to order L-2
    M = L - 2
    inv = Jet((n - 1.0) / r * (-1.0 / r) ** np.arange(M + 1))
    return fpp + inv * Jet(fp.c[: M + 1])


def radial_polylaplacian_jet(n: int, m: int, jet_factory, r: float) -> float:
    """(-Lap)^m u at radius r; jet_factory(r, order) -> Jet of u of that order."""
    f = jet_factory(r, 2 * m)
    for _ in range(m):
        f = -laplacian_jet(f, r, n)
    return f.value


def bubble_jet(n: int, m: int, r: float, order: int) -> Jet:
    """Jet of the unit spherical profile (2/(1+r^2))^((n-2m)/2)."""
    x = jet_variable(r, order)
    return (2.0 / (1.0 + x * x)).power((n - 2 * m) / 2.0)


def power_law_jet(q: float, r: float, order: int, coef: float = 1.0) -> Jet:
    x = jet_variable(r, order)
    return coef * x.power(q)

"""Truncated power series in the scaled disc coordinate ``x = 2(z - 1/2)``.

A function on the disc of radius 1/2 centred at 1/2 is stored as the first
``N`` coefficients of its expansion in ``x``; the monomials ``x^k`` then have
unit Hardy norm, so the coefficient vector is the Hardy-space coordinate
vector truncated to order ``N``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np


class SeriesDomainError(ValueError):
    """Logarithm or power requested for a series whose constant term is not in the right half plane."""


@dataclass(frozen=True, eq=False)
class PowerSeries:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a nonempty 1-D array")
        if not np.issubdtype(c.dtype, np.complexfloating):
            c = c.astype(float)
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return self.coeffs.size

    @classmethod
    def constant(cls, value, order: int) -> "PowerSeries":
        c = np.zeros(order, dtype=np.result_type(value, float))
        c[0] = value
        return cls(c)

    @classmethod
    def affine(cls, c0, c1, order: int) -> "PowerSeries":
        """The series ``c0 + c1 x`` truncated to ``order`` terms."""
        c = np.zeros(order, dtype=np.result_type(c0, c1, float))
        c[0] = c0
        if order > 1:
            c[1] = c1
        return cls(c)

    def __add__(self, other):
        if isinstance(other, PowerSeries):
            _check_orders(self, other)
            return PowerSeries(self.coeffs + other.coeffs)
        c = self.coeffs.astype(np.result_type(self.coeffs, other), copy=True)
        c[0] += other
        return PowerSeries(c)

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            return series_mul(self, other)
        return PowerSeries(self.coeffs * other)

    __rmul__ = __mul__

    def __call__(self, x0):
        return series_eval(self, x0)

    def __repr__(self) -> str:
        return f"PowerSeries(order={self.order}, coeffs={self.coeffs!r})"


def _check_orders(f: PowerSeries, g: PowerSeries) -> None:
    if f.order != g.order:
        raise ValueError(f"order mismatch: {f.order} != {g.order}")


def series_mul(f: PowerSeries, g: PowerSeries) -> PowerSeries:
    """Cauchy product truncated to the common order."""
    _check_orders(f, g)
    return PowerSeries(np.convolve(f.coeffs, g.coeffs)[: f.order])


def series_log(f: PowerSeries) -> PowerSeries:
    """Principal logarithm of a series with constant term in the right half plane.

    Uses ``f g' = f'`` solved term by term.
    """
    c = f.coeffs
    c0 = c[0]
    if not (c0.real > 0):
        raise SeriesDomainError(f"log needs Re(f(0)) > 0, got {c0}")
    n = f.order
    g = np.zeros(n, dtype=np.result_type(c, float))
    g[0] = cmath.log(c0) if np.iscomplexobj(c) else math.log(c0)
    k_idx = np.arange(n)
    for k in range(1, n):
        # sum_{j=1}^{k-1} j g_j f_{k-j}
        acc = np.dot(k_idx[1:k] * g[1:k], c[k - 1:0:-1]) if k > 1 else 0.0
        g[k] = (k * c[k] - acc) / (k * c0)
    return PowerSeries(g)


def series_exp(f: PowerSeries) -> PowerSeries:
    """Exponential of a series via ``h' = f' h``."""
    c = f.coeffs
    c0 = c[0]
    try:
        e0 = cmath.exp(c0) if np.iscomplexobj(c) else math.exp(c0)
    except OverflowError:
        raise OverflowError(f"exp of constant term {c0} overflows") from None
    n = f.order
    h = np.zeros(n, dtype=np.result_type(c, float))
    h[0] = e0
    jf = np.arange(n) * c
    for k in range(1, n):
        # k h_k = sum_{j=1}^{k} j f_j h_{k-j}
        h[k] = np.dot(jf[1:k + 1], h[k - 1::-1]) / k
    return PowerSeries(h)


def series_pow(f: PowerSeries, e) -> PowerSeries:
    """``f ** e`` on the principal branch, as ``exp(e log f)``."""
    return series_exp(series_log(f) * e)


def series_eval(f: PowerSeries, x0):
    """Horner evaluation of the truncated polynomial at ``x0`` with ``|x0| < 1``."""
    if not abs(x0) < 1:
        raise ValueError(f"evaluation point {x0} lies outside the unit disc")
    acc = 0.0 * f.coeffs[0]
    for ck in f.coeffs[::-1]:
        acc = acc * x0 + ck
    return acc.item() if hasattr(acc, "item") else acc


def eval_poly(coeffs: np.ndarray, x) -> np.ndarray:
    """Vectorised Horner evaluation of a raw coefficient vector (no disc check)."""
    x = np.asarray(x)
    acc = np.zeros(x.shape, dtype=np.result_type(coeffs, x))
    for ck in coeffs[::-1]:
        acc = acc * x + ck
    return acc

"""Quadrature and interval-polynomial helpers shared by the solver modules.

Everything here is specialized to measures of the form
``rho(t) = R(t) / (pi * sqrt((b - t)(t - a)))`` with polynomial numerator R:
Gauss-Chebyshev nodes absorb the inverse-square-root weight, arcsine moments
give exact polynomial integrals, and the Chebyshev expansion of R diagonalizes
the logarithmic kernel.
"""

from __future__ import annotations

from math import comb

import numpy as np

FloatArray = np.ndarray


def chebyshev_nodes(n: int, a: float, b: float) -> FloatArray:
    """First-kind Chebyshev nodes of [a, b], ascending, strictly interior."""
    theta = (2.0 * np.arange(n, dtype=float) + 1.0) * np.pi / (2.0 * n)
    c = 0.5 * (a + b)
    r = 0.5 * (b - a)
    return c + r * np.cos(theta[::-1])


def gauss_chebyshev_integral(values: FloatArray) -> float:
    """Integral of g(t)/sqrt((b-t)(t-a)) over [a, b] from samples at the nodes.

    ``values`` are g evaluated at ``chebyshev_nodes(n, a, b)``; the rule is
    (pi/n) * sum and is exact for polynomial g of degree <= 2n - 1.
    """
    return float(np.pi * np.mean(values))


def arcsine_moments(c: float, r: float, kmax: int) -> FloatArray:
    """Moments p_k = E[(c + r X)^k], X arcsine-distributed on [-1, 1], k <= kmax.

    Closed form: only even powers of X survive, E[X^(2j)] = binom(2j, j) / 4^j.
    """
    p = np.empty(kmax + 1)
    for k in range(kmax + 1):
        acc = 0.0
        for j in range(0, k + 1, 2):
            acc += comb(k, j) * c ** (k - j) * r**j * comb(j, j // 2) / 2.0**j
        p[k] = acc
    return p


def poly_chebyshev_coeffs(coeffs: FloatArray, c: float, r: float) -> FloatArray:
    """Chebyshev-T coefficients of P(c + r*u) on u in [-1, 1].

    ``coeffs`` are the power-basis coefficients of P, ascending.
    """
    shifted = np.polynomial.polynomial.Polynomial(coeffs)(
        np.polynomial.polynomial.Polynomial([c, r])
    )
    return np.polynomial.chebyshev.poly2cheb(shifted.coef)


def cumulative_simpson(x: FloatArray, y: FloatArray) -> FloatArray:
    """Cumulative integral of samples (x, y) with I[0] = 0.

    Composite Simpson on (possibly nonuniform) grids: each consecutive triple
    is fit by a parabola and integrated piecewise, so every node receives a
    value.  A final unpaired interval reuses the parabola through the last
    three points.  Two-point input falls back to the trapezoid rule.
    """
    n = len(x)
    if n != len(y):
        raise ValueError("x and y must have equal length")
    out = np.zeros(n)
    if n < 2:
        return out
    if n == 2:
        out[1] = 0.5 * (y[0] + y[1]) * (x[1] - x[0])
        return out

    def _parabola_pieces(x0, x1, x2, y0, y1, y2):
        # Newton form through three points; integrate over [x0,x1] and [x1,x2].
        d1 = (y1 - y0) / (x1 - x0)
        d2 = ((y2 - y1) / (x2 - x1) - d1) / (x2 - x0)

        def seg(lo, hi):
            # integral of y0 + d1 (t-x0) + d2 (t-x0)(t-x1) dt
            def prim(t):
                u = t - x0
                return y0 * u + 0.5 * d1 * u * u + d2 * (u**3 / 3.0 + u * u * (x0 - x1) / 2.0)

            return prim(hi) - prim(lo)

        return seg(x0, x1), seg(x1, x2)

    i = 0
    while i + 2 < n:
        s01, s12 = _parabola_pieces(x[i], x[i + 1], x[i + 2], y[i], y[i + 1], y[i + 2])
        out[i + 1] = out[i] + s01
        out[i + 2] = out[i + 1] + s12
        i += 2
    if i + 1 < n:  # odd leftover interval
        _, s12 = _parabola_pieces(x[n - 3], x[n - 2], x[n - 1], y[n - 3], y[n - 2], y[n - 1])
        out[n - 1] = out[n - 2] + s12
    return out

"""Quadrature helpers checked against scipy and analytic moments."""

import numpy as np
from scipy import integrate

from ldgas.quadrature import (
    arcsine_moments,
    chebyshev_nodes,
    cumulative_simpson,
    gauss_chebyshev_integral,
    poly_chebyshev_coeffs,
)


def test_chebyshev_nodes_ascending_open_interval():
    nodes = chebyshev_nodes(33, -2.0, 5.0)
    assert nodes.shape == (33,)
    assert np.all(np.diff(nodes) > 0)
    assert nodes[0] > -2.0 and nodes[-1] < 5.0


def test_gauss_chebyshev_matches_weighted_quad():
    # integral of exp(x) / (pi sqrt(1 - x^2)) over (-1, 1)
    nodes = chebyshev_nodes(64, -1.0, 1.0)
    got = gauss_chebyshev_integral(np.exp(nodes)) / np.pi
    expected, _ = integrate.quad(
        lambda t: np.exp(t) / np.pi, -1, 1, weight="alg", wvar=(-0.5, -0.5)
    )
    assert abs(got - expected) < 1e-13


def test_arcsine_moments_match_quadrature():
    c, r = 0.7, 1.9
    moments = arcsine_moments(c, r, 8)
    for k in range(9):
        expected, _ = integrate.quad(
            lambda t, k=k: (c + r * t) ** k / np.pi,
            -1,
            1,
            weight="alg",
            wvar=(-0.5, -0.5),
        )
        assert abs(moments[k] - expected) < 1e-12 * max(1.0, abs(expected))


def test_poly_chebyshev_coeffs_reconstructs_polynomial():
    rng = np.random.default_rng(3)
    coeffs = rng.normal(size=6)
    c, r = -0.4, 2.3
    g = poly_chebyshev_coeffs(coeffs, c, r)
    theta = np.linspace(0.1, 3.0, 40)
    x = c + r * np.cos(theta)
    recon = sum(gk * np.cos(k * theta) for k, gk in enumerate(g))
    direct = np.polynomial.polynomial.polyval(x, coeffs)
    np.testing.assert_allclose(recon, direct, rtol=1e-12, atol=1e-12)


def test_cumulative_simpson_exact_on_quadratics():
    # composite parabolic rule is exact for degree <= 2 even on uneven grids
    x = np.array([0.0, 0.3, 0.55, 1.1, 1.35, 2.0, 2.2])
    y = 3.0 * x**2 - 2.0 * x + 1.0
    got = cumulative_simpson(x, y)
    exact = x**3 - x**2 + x
    np.testing.assert_allclose(got, exact, rtol=1e-13, atol=1e-13)


def test_cumulative_simpson_matches_scipy_on_smooth_integrand():
    x = np.linspace(0.0, 3.0, 301)
    y = np.sin(x) * np.exp(-0.3 * x)
    got = cumulative_simpson(x, y)
    exact = np.array([integrate.quad(lambda t: np.sin(t) * np.exp(-0.3 * t), 0, xi)[0] for xi in x[::50]])
    np.testing.assert_allclose(got[::50], exact, atol=1e-9)


def test_cumulative_simpson_two_points_falls_back_to_trapezoid():
    x = np.array([0.0, 1.0])
    y = np.array([1.0, 3.0])
    got = cumulative_simpson(x, y)
    np.testing.assert_allclose(got, [0.0, 2.0])

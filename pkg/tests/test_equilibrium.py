"""One-cut equilibrium solver against closed-form laws and independent quadrature.

Reference measures used throughout:

* flat potential between walls at -1 and 1: inverse-square-root (arcsine)
  law, both edges hard, mean-field energy log(2)/2;
* quadratic potential lam^2/4: semicircle on [-2, 2] with unit second moment
  and mean-field energy 3/8;
* linear ramp with a single lower wall at 0: density (1/pi) sqrt((2-x)/x)
  on [0, 2], hard-soft;
* flat walled gas tilted by 2*lam: density -2*lam / (pi sqrt(-lam(lam+1)))
  on [-1, 0], hard at -1, vanishing (soft) at 0.
"""

import numpy as np
import pytest

import _oracles as oracles
from ldgas import (
    ConfinementPotential,
    EdgeSingularity,
    EdgeType,
    IllConfinedError,
    NoOneCutError,
    Polynomial,
    Walls,
    density_at,
    euler_lagrange_residual,
    mean_field_energy,
    normalization,
    solve_one_cut,
    statistic_value,
    tilt,
)
from ldgas.quadrature import chebyshev_nodes


def _tensor_double_log(measure, n=800):
    """Independent evaluation of iint log|x-y| drho drho.

    Tensor Gauss-Chebyshev with offset node counts (grids interleave, so the
    logarithm is never sampled on the diagonal).  The rule converges like
    c1/n + c2/n^2 for the log kernel; two Richardson stages over (n, 2n, 4n)
    cancel both terms, leaving ~1e-8 accuracy at n = 800.
    """
    a, b = measure.support.a, measure.support.b

    def raw(m):
        x = chebyshev_nodes(m, a, b)
        y = chebyshev_nodes(m + 1, a, b)
        rx = measure.numerator(x)
        ry = measure.numerator(y)
        return float(np.mean(np.log(np.abs(x[:, None] - y[None, :])) * (rx[:, None] * ry[None, :])))

    t1, t2, t4 = raw(n), raw(2 * n), raw(4 * n)
    r1, r2 = 2.0 * t2 - t1, 2.0 * t4 - t2
    return (4.0 * r2 - r1) / 3.0


@pytest.fixture(scope="module")
def arcsine():
    return solve_one_cut(oracles.box_potential())


@pytest.fixture(scope="module")
def semicircle():
    return solve_one_cut(oracles.quartic_potential())


class TestArcsineLaw:
    def test_support_fills_the_box_with_hard_edges(self, arcsine):
        sup = arcsine.support
        assert sup.a == pytest.approx(-1.0, abs=1e-12)
        assert sup.b == pytest.approx(1.0, abs=1e-12)
        assert sup.edge_a is EdgeType.HARD and sup.edge_b is EdgeType.HARD

    def test_density_matches_inverse_sqrt_law(self, arcsine):
        lam = np.linspace(-0.99, 0.99, 199)
        expected = 1.0 / (np.pi * np.sqrt(1.0 - lam**2))
        np.testing.assert_allclose(arcsine.density(lam), expected, rtol=1e-12)

    def test_normalization_and_field_constancy(self, arcsine):
        assert abs(normalization(arcsine) - 1.0) < 1e-12
        assert euler_lagrange_residual(arcsine) < 1e-10

    def test_energy_is_half_log_two(self, arcsine):
        assert mean_field_energy(arcsine) == pytest.approx(0.5 * np.log(2.0), abs=1e-12)

    def test_quantiles_invert_the_arcsine_cdf(self, arcsine):
        n = 64
        got = arcsine.quantiles(n)
        q = (np.arange(n) + 0.5) / n
        np.testing.assert_allclose(got, -np.cos(np.pi * q), atol=1e-6)

    def test_hard_edge_reports_singularity(self, arcsine):
        sing = density_at(arcsine, 1.0)
        assert isinstance(sing, EdgeSingularity)
        assert sing.exponent == -0.5
        assert sing.coefficient == pytest.approx(1.0 / (np.pi * np.sqrt(2.0)), rel=1e-10)
        assert density_at(arcsine, 1.5) == 0.0
        assert density_at(arcsine, 0.0) == pytest.approx(1.0 / np.pi, rel=1e-12)


class TestSemicircleLaw:
    def test_soft_edges_at_plus_minus_two(self, semicircle):
        sup = semicircle.support
        assert sup.a == pytest.approx(-2.0, abs=1e-9)
        assert sup.b == pytest.approx(2.0, abs=1e-9)
        assert sup.edge_a is EdgeType.SOFT and sup.edge_b is EdgeType.SOFT

    def test_density_matches_semicircle(self, semicircle):
        lam = np.linspace(-1.95, 1.95, 157)
        expected = np.sqrt(4.0 - lam**2) / (2.0 * np.pi)
        np.testing.assert_allclose(semicircle.density(lam), expected, atol=1e-10)

    def test_even_moments_are_catalan_numbers(self, semicircle):
        for k, catalan in ((2, 1.0), (4, 2.0), (6, 5.0)):
            mono = Polynomial([0.0] * k + [1.0])
            assert statistic_value(semicircle, mono) == pytest.approx(catalan, abs=1e-10)

    def test_energy_is_three_eighths(self, semicircle):
        assert mean_field_energy(semicircle) == pytest.approx(0.375, abs=1e-10)

    def test_seeded_resolve_reproduces_cold_start(self, semicircle):
        again = solve_one_cut(oracles.quartic_potential(), seed=semicircle.support)
        assert again.support.a == pytest.approx(semicircle.support.a, abs=1e-12)
        assert again.support.b == pytest.approx(semicircle.support.b, abs=1e-12)


class TestWalledRamp:
    def test_hard_soft_law(self):
        pot = ConfinementPotential(Polynomial([0.0, 1.0]), Walls(0.0, None))
        measure = solve_one_cut(pot)
        sup = measure.support
        assert sup.a == pytest.approx(0.0, abs=1e-12)
        assert sup.b == pytest.approx(2.0, abs=1e-9)
        assert sup.edge_a is EdgeType.HARD and sup.edge_b is EdgeType.SOFT
        x = np.linspace(0.05, 1.95, 77)
        np.testing.assert_allclose(
            measure.density(x), np.sqrt((2.0 - x) / x) / np.pi, atol=1e-9
        )
        assert statistic_value(measure, Polynomial([0.0, 1.0])) == pytest.approx(0.5, abs=1e-9)


class TestTiltedBox:
    def test_strong_positive_tilt_pushes_gas_onto_lower_half(self):
        measure = solve_one_cut(tilt(oracles.box_potential(), oracles.box_statistic(), 2.0))
        sup = measure.support
        assert sup.a == pytest.approx(-1.0, abs=1e-12)
        assert sup.b == pytest.approx(0.0, abs=1e-9)
        assert sup.edge_a is EdgeType.HARD and sup.edge_b is EdgeType.SOFT
        lam = np.linspace(-0.99, -0.01, 99)
        expected = -2.0 * lam / (np.pi * np.sqrt(-lam * (lam + 1.0)))
        np.testing.assert_allclose(measure.density(lam), expected, atol=1e-9)
        assert statistic_value(measure, Polynomial([0.0, 1.0])) == pytest.approx(-0.75, abs=1e-9)

    def test_hard_edge_singularity_coefficient(self):
        measure = solve_one_cut(tilt(oracles.box_potential(), oracles.box_statistic(), 2.0))
        sing = density_at(measure, -1.0)
        assert isinstance(sing, EdgeSingularity)
        assert sing.coefficient == pytest.approx(2.0 / np.pi, rel=1e-6)


class TestEnergyAgainstIndependentQuadrature:
    @pytest.mark.parametrize("s", [0.0, 0.7, 2.0])
    def test_series_energy_matches_tensor_quadrature(self, s):
        pot = tilt(oracles.box_potential(), oracles.box_statistic(), s)
        measure = solve_one_cut(pot)
        direct = -0.5 * _tensor_double_log(measure) + statistic_value(measure, pot.v)
        assert mean_field_energy(measure) == pytest.approx(direct, abs=2e-6)

    def test_untilted_functional_on_tilted_minimizer(self):
        base = oracles.quartic_potential()
        pot = tilt(base, oracles.quartic_statistic(), 0.1)
        measure = solve_one_cut(pot)
        direct = -0.5 * _tensor_double_log(measure) + statistic_value(measure, base.v)
        assert mean_field_energy(measure, base) == pytest.approx(direct, abs=2e-6)


class TestFailureTaxonomy:
    def test_deep_double_well_has_no_one_cut_measure(self):
        # (lam^2 - 9)^2 / 4: wells at +-3, insurmountable central barrier
        pot = ConfinementPotential(Polynomial([20.25, 0.0, -4.5, 0.0, 0.25]))
        with pytest.raises(NoOneCutError):
            solve_one_cut(pot)

    def test_ill_confined_potential_rejected_at_construction(self):
        with pytest.raises(IllConfinedError):
            ConfinementPotential(Polynomial([0.0, 0.0, -1.0]))

"""One-cut equilibrium measures of confined log-gases with polynomial potentials.

The minimizer of
``E[rho] = -1/2 iint log|l - m| drho(l) drho(m) + int W drho``
over probability measures on the wall interval is, in the single-interval
regime, of the form ``rho(l) = R(l) / (pi sqrt((b - l)(l - a)))`` with a
polynomial numerator R.  Expanding the Stieltjes transform
``G(z) = W'(z) + R(z)/sqrt((z - a)(z - b))`` at infinity and matching
``G ~ 1/z`` determines R exactly from the arcsine moments of [a, b]
(a triangular linear recursion), which keeps the whole solver closed-form up
to the edge positions themselves:

* soft edge: R vanishes there; equivalently the two conditions
  ``sum_j w_j p_j(a, b) = 0`` and ``sum_j w_j p_{j+1}(a, b) = 1`` where w are
  the coefficients of W' and p_k the arcsine moments,
* hard edge: the edge sits on a wall and R stays nonnegative there.

The solver attempts the soft-soft regime first, pins edges to violated walls,
and unpins edges whose pinned numerator turns negative.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .errors import NoConvergenceError, NoOneCutError
from .model import ConfinementPotential, Polynomial
from .quadrature import (
    arcsine_moments,
    chebyshev_nodes,
    poly_chebyshev_coeffs,
)

_WALL_TOL = 1e-9
_NONNEG_TOL = 1e-12
_DENSITY_SAMPLES = 512


class EdgeType(Enum):
    SOFT = "soft"
    HARD = "hard"


@dataclass(frozen=True, slots=True)
class SupportInterval:
    a: float
    b: float
    edge_a: EdgeType
    edge_b: EdgeType

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a) and np.isfinite(self.b) and self.a < self.b):
            raise ValueError("support edges must be finite with a < b")

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def radius(self) -> float:
        return 0.5 * (self.b - self.a)


@dataclass(frozen=True)
class EdgeSingularity:
    """Leading behavior rho(l) ~ coefficient * |l - edge|**exponent at a hard edge."""

    coefficient: float
    exponent: float


@dataclass(frozen=True)
class EquilibriumMeasure:
    """Normalized one-cut measure R(l) / (pi sqrt((b - l)(l - a))) on its support."""

    support: SupportInterval
    numerator: Polynomial
    potential: ConfinementPotential

    @cached_property
    def cheb_coeffs(self) -> np.ndarray:
        """Chebyshev-T coefficients of R on the support; index 0 equals 1."""
        return poly_chebyshev_coeffs(
            np.array(self.numerator.coefficients), self.support.center, self.support.radius
        )

    def density(self, lam) -> np.ndarray:
        """Density values; zero outside the open support interval."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        a, b = self.support.a, self.support.b
        inside = (lam > a) & (lam < b)
        out = np.zeros(lam.shape)
        lam_in = lam[inside]
        out[inside] = self.numerator(lam_in) / (np.pi * np.sqrt((b - lam_in) * (lam_in - a)))
        return out

    def log_potential(self, lam) -> np.ndarray:
        """int log|l - t| drho(t) for l inside the support, via the Chebyshev series."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        c, r = self.support.center, self.support.radius
        u = np.clip((lam - c) / r, -1.0, 1.0)
        theta = np.arccos(u)
        g = self.cheb_coeffs
        acc = np.full(lam.shape, g[0] * np.log(r / 2.0))
        for k in range(1, len(g)):
            acc -= g[k] * np.cos(k * theta) / k
        return acc

    def cdf_grid(self, n: int = 4097) -> tuple[np.ndarray, np.ndarray]:
        """(lam, CDF) samples, ascending in lam, endpoints included."""
        c, r = self.support.center, self.support.radius
        theta = np.linspace(np.pi, 0.0, n)
        g = self.cheb_coeffs
        cdf = g[0] * (np.pi - theta)
        for k in range(1, len(g)):
            cdf -= g[k] * np.sin(k * theta) / k
        return c + r * np.cos(theta), cdf / np.pi

    def quantiles(self, n: int) -> np.ndarray:
        """n continuum quantiles at probability levels (i + 1/2) / n."""
        lam, cdf = self.cdf_grid()
        q = (np.arange(n) + 0.5) / n
        return np.interp(q, cdf, lam)


def _numerator_coeffs(w_prime: np.ndarray, c: float, r: float) -> np.ndarray:
    """Numerator R from the expansion of the resolvent at infinity.

    ``w_prime`` holds ascending coefficients of W'.  Matching powers
    z^(d-1) .. z^0 fixes R_d .. R_1 by back-substitution against the arcsine
    moments p_k; the 1/z normalization fixes R_0.
    """
    w_prime = np.trim_zeros(np.asarray(w_prime, dtype=float), "b")
    if w_prime.size == 0:
        return np.array([1.0])
    d = w_prime.size  # deg W' + 1 = deg R
    p = arcsine_moments(c, r, d)
    coeffs = np.zeros(d + 1)
    for m in range(d - 1, -1, -1):
        acc = -w_prime[m]
        for k in range(1, d - m):
            acc -= coeffs[m + 1 + k] * p[k]
        coeffs[m + 1] = acc
    coeffs[0] = 1.0 - np.dot(coeffs[1:], p[1 : d + 1])
    return coeffs


def _edge_conditions(w_prime: np.ndarray, c: float, r: float) -> tuple[float, float, float]:
    """(alpha1, alpha2, scale): soft-soft edge residuals and their magnitude scale."""
    dmax = len(w_prime)
    p = arcsine_moments(c, r, dmax)
    pabs = arcsine_moments(abs(c), r, dmax)
    a1 = float(np.dot(w_prime, p[:dmax]))
    a2 = float(np.dot(w_prime, p[1 : dmax + 1]))
    scale = float(np.dot(np.abs(w_prime), pabs[1 : dmax + 1])) + 1.0
    return a1, a2, scale


def _edge_jacobian(w_prime: np.ndarray, c: float, r: float) -> np.ndarray:
    """Jacobian of (alpha1, alpha2 - 1) with respect to (c, log r)."""
    dmax = len(w_prime) + 1
    p = arcsine_moments(c, r, dmax)
    j = np.arange(len(w_prime))
    q = (p[1 : len(w_prime) + 1] - c * p[: len(w_prime)]) / r  # q_k = E[(c+rX)^k X]
    qm1 = np.concatenate(([0.0], q[:-1]))  # q_{j-1}, with q_{-1} := 0
    pm1 = np.concatenate(([0.0], p[: len(w_prime) - 1]))
    da1_dc = float(np.dot(w_prime, j * pm1))
    da1_dr = float(np.dot(w_prime, j * qm1))
    da2_dc = float(np.dot(w_prime, (j + 1) * p[: len(w_prime)]))
    da2_dr = float(np.dot(w_prime, (j + 1) * q))
    return np.array([[da1_dc, r * da1_dr], [da2_dc, r * da2_dr]])


def _solve_soft_soft(w_prime: np.ndarray, starts: list[tuple[float, float]]) -> tuple[float, float] | None:
    """Damped Newton on (c, log r) for the two soft-edge conditions."""
    if len(w_prime) < 2:
        return None  # constant or zero W' cannot satisfy both conditions
    for c0, r0 in starts:
        c, logr = float(c0), float(np.log(max(r0, 1e-12)))
        a1, a2, scale = _edge_conditions(w_prime, c, np.exp(logr))
        fnorm = max(abs(a1), abs(a2 - 1.0))
        ok = False
        for _ in range(120):
            if fnorm < 1e-13 * scale:
                ok = True
                break
            r = np.exp(logr)
            jac = _edge_jacobian(w_prime, c, r)
            try:
                step = np.linalg.solve(jac, -np.array([a1, a2 - 1.0]))
            except np.linalg.LinAlgError:
                break
            lam_damp = 1.0
            improved = False
            for _ in range(30):
                c_new = c + lam_damp * step[0]
                logr_new = logr + lam_damp * step[1]
                if abs(c_new) > 1e9 or not -45.0 < logr_new < 45.0:
                    lam_damp *= 0.5
                    continue
                a1n, a2n, scale_n = _edge_conditions(w_prime, c_new, np.exp(logr_new))
                fn = max(abs(a1n), abs(a2n - 1.0))
                if fn < fnorm or fn < 1e-13 * scale_n:
                    c, logr, a1, a2, scale, fnorm = c_new, logr_new, a1n, a2n, scale_n, fn
                    improved = True
                    break
                lam_damp *= 0.5
            if not improved:
                break
        if ok or fnorm < 1e-11 * scale:
            return c, float(np.exp(logr))
    return None


def _support_bound(w_prime: np.ndarray) -> float:
    """Radius beyond which the support of any equilibrium measure cannot reach."""
    if len(w_prime) == 0:
        return 4.0
    roots = np.roots(w_prime[::-1]) if len(w_prime) > 1 else np.array([0.0])
    m = float(np.max(np.abs(roots))) if roots.size else 0.0
    lead = abs(w_prime[-1])
    # crude but safe: support radius where |W'| ~ lead * x^deg overtakes 4/x
    extra = (4.0 / lead) ** (1.0 / len(w_prime))
    return 2.0 * m + 2.0 * extra + 4.0


def _pinned_residual(w_prime: np.ndarray, lo: float, hi: float, soft_at_b: bool) -> float:
    c, r = 0.5 * (lo + hi), 0.5 * (hi - lo)
    coeffs = _numerator_coeffs(w_prime, c, r)
    edge = hi if soft_at_b else lo
    return float(np.polynomial.polynomial.polyval(edge, coeffs))


def _solve_pinned(
    w_prime: np.ndarray, wall: float, other_limit: float | None, soft_at_b: bool
) -> list[float]:
    """Roots of the free-edge condition with one edge pinned at ``wall``.

    Returns candidate free-edge positions, nearest-to-wall first.  When
    ``soft_at_b`` the pinned edge is the lower one and the free edge b > wall;
    otherwise the free edge a < wall.
    """
    bound = _support_bound(w_prime)
    if soft_at_b:
        far = other_limit if other_limit is not None else wall + 2.0 * bound + 2.0 * abs(wall)
        lo_edge, hi_edge = wall, far
    else:
        far = other_limit if other_limit is not None else wall - 2.0 * bound - 2.0 * abs(wall)
        lo_edge, hi_edge = far, wall
    span = hi_edge - lo_edge
    if span <= 0:
        return []

    def g(edge: float) -> float:
        if soft_at_b:
            return _pinned_residual(w_prime, wall, edge, True)
        return _pinned_residual(w_prime, edge, wall, False)

    frac = np.concatenate((np.geomspace(1e-7, 0.1, 50), np.linspace(0.1, 1.0, 200)))
    grid = (wall + frac * span) if soft_at_b else (wall - frac * span)
    vals = np.array([g(x) for x in grid])
    roots: list[float] = []
    for i in range(len(grid) - 1):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0:
            roots.append(float(grid[i]))
        elif v0 * v1 < 0.0:
            xa, xb = sorted((grid[i], grid[i + 1]))
            roots.append(float(brentq(g, xa, xb, xtol=1e-15, rtol=8.9e-16)))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def _min_density_numerator(coeffs: np.ndarray, a: float, b: float) -> float:
    """Minimum of R over [a, b], via critical points plus dense sampling."""
    lo = float(min(np.polynomial.polynomial.polyval(a, coeffs), np.polynomial.polynomial.polyval(b, coeffs)))
    if len(coeffs) > 2:
        crit = np.roots((coeffs[1:] * np.arange(1, len(coeffs)))[::-1])
        crit = crit[np.abs(crit.imag) < 1e-12].real
        crit = crit[(crit > a) & (crit < b)]
        if crit.size:
            lo = min(lo, float(np.min(np.polynomial.polynomial.polyval(crit, coeffs))))
    samples = np.polynomial.polynomial.polyval(chebyshev_nodes(_DENSITY_SAMPLES, a, b), coeffs)
    return min(lo, float(np.min(samples)))


def _validate(
    w_prime: np.ndarray,
    a: float,
    b: float,
    edge_a: EdgeType,
    edge_b: EdgeType,
    lo: float | None,
    hi: float | None,
) -> np.ndarray | None:
    """Numerator coefficients if (a, b) yields an admissible measure, else None."""
    if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
        return None
    wtol_lo = _WALL_TOL * (1.0 + abs(lo)) if lo is not None else 0.0
    wtol_hi = _WALL_TOL * (1.0 + abs(hi)) if hi is not None else 0.0
    if lo is not None and a < lo - wtol_lo:
        return None
    if hi is not None and b > hi + wtol_hi:
        return None
    c, r = 0.5 * (a + b), 0.5 * (b - a)
    coeffs = _numerator_coeffs(w_prime, c, r)
    scale = float(np.sum(np.abs(coeffs) * np.maximum(abs(a), abs(b)) ** np.arange(len(coeffs)))) + 1.0
    if _min_density_numerator(coeffs, a, b) < -1e-10 * scale:
        return None
    for edge, kind in ((a, edge_a), (b, edge_b)):
        val = float(np.polynomial.polynomial.polyval(edge, coeffs))
        if kind is EdgeType.HARD and val < -1e-10 * scale:
            return None
    return coeffs


def solve_one_cut(
    potential: ConfinementPotential,
    *,
    seed: SupportInterval | tuple[float, float] | None = None,
) -> EquilibriumMeasure:
    """Equilibrium measure of a (tilted) polynomial potential with optional walls.

    Parameters
    ----------
    potential:
        Confinement potential W (possibly a tilt V + s f) with its walls.
    seed:
        Optional previous support used as the first Newton start when sweeping
        a family of potentials (continuation).

    Raises
    ------
    NoOneCutError
        if every single-interval regime produces a negative density,
    NoConvergenceError
        if edge root-finding fails in all regimes.
    """
    w_prime = np.array(potential.v.derivative().coefficients)
    if potential.v.derivative().is_zero:
        w_prime = np.array([])
    lo, hi = potential.walls.lower, potential.walls.upper

    starts: list[tuple[float, float]] = []
    if seed is not None:
        if isinstance(seed, SupportInterval):
            starts.append((seed.center, seed.radius))
        else:
            a0, b0 = seed
            starts.append((0.5 * (a0 + b0), 0.5 * (b0 - a0)))
        c0, r0 = starts[0]
        starts += [(c0, 2 * r0), (c0, 0.5 * r0)]
    # cold starts from a probe of the potential landscape; skipped in the
    # analytic-continuation regime, where only seeded continuation is trusted
    if len(w_prime) >= 2 and (seed is None or potential.is_confining):
        bound = _support_bound(w_prime)
        plo = lo if lo is not None else -bound
        phi = hi if hi is not None else bound
        probe = np.linspace(plo + 1e-9 * (1 + abs(plo)), phi - 1e-9 * (1 + abs(phi)), 257)
        wvals = potential.v(probe)
        cbest = float(probe[int(np.argmin(wvals))])
        span = phi - plo
        for rr in (span / 8, span / 3, span / 16, span / 1.5):
            starts.append((cbest, rr))
        starts.append((0.5 * (plo + phi), span / 4))

    attempted = False
    # regime 1: both edges soft
    ss = _solve_soft_soft(w_prime, starts)
    if ss is not None:
        attempted = True
        c, r = ss
        coeffs = _validate(w_prime, c - r, c + r, EdgeType.SOFT, EdgeType.SOFT, lo, hi)
        if coeffs is not None:
            sup = SupportInterval(c - r, c + r, EdgeType.SOFT, EdgeType.SOFT)
            return EquilibriumMeasure(sup, Polynomial(tuple(coeffs)), potential)

    # regimes 2-4: pin edges to walls, in a fixed deterministic order
    candidates: list[tuple[float, float, EdgeType, EdgeType]] = []
    if lo is not None:
        for b in _solve_pinned(w_prime, lo, hi, soft_at_b=True):
            candidates.append((lo, b, EdgeType.HARD, EdgeType.SOFT))
    if hi is not None:
        for a in _solve_pinned(w_prime, hi, lo, soft_at_b=False):
            candidates.append((a, hi, EdgeType.SOFT, EdgeType.HARD))
    if lo is not None and hi is not None:
        candidates.append((lo, hi, EdgeType.HARD, EdgeType.HARD))
    for a, b, ea, eb in candidates:
        attempted = True
        coeffs = _validate(w_prime, a, b, ea, eb, lo, hi)
        if coeffs is not None:
            # an edge pinned exactly where the numerator vanishes is soft
            if ea is EdgeType.HARD and abs(float(np.polynomial.polynomial.polyval(a, coeffs))) < 1e-12:
                ea = EdgeType.SOFT
            if eb is EdgeType.HARD and abs(float(np.polynomial.polynomial.polyval(b, coeffs))) < 1e-12:
                eb = EdgeType.SOFT
            sup = SupportInterval(a, b, ea, eb)
            return EquilibriumMeasure(sup, Polynomial(tuple(coeffs)), potential)

    if attempted:
        raise NoOneCutError(
            "no single-interval measure with nonnegative density exists for this potential"
        )
    raise NoConvergenceError("edge root-finding failed in every one-cut regime")


def density_at(measure: EquilibriumMeasure, lam: float) -> float | EdgeSingularity:
    """Density value at a point; at a hard edge, the divergent-prefactor decomposition."""
    sup = measure.support
    for edge, kind in ((sup.a, sup.edge_a), (sup.b, sup.edge_b)):
        if lam == edge and kind is EdgeType.HARD:
            width = sup.b - sup.a
            coeff = float(measure.numerator(edge)) / (np.pi * np.sqrt(width))
            return EdgeSingularity(coefficient=coeff, exponent=-0.5)
    if lam <= sup.a or lam >= sup.b:
        return 0.0 if lam != sup.a and lam != sup.b else float(measure.density(np.array([lam]))[0])
    return float(measure.density(np.array([lam]))[0])


def statistic_value(measure: EquilibriumMeasure, f: Polynomial) -> float:
    """Exact integral of a polynomial statistic against the measure.

    Gauss-Chebyshev with n >= (deg f + deg R)/2 + 2 nodes integrates the
    polynomial f * R exactly against the inverse-square-root weight.
    """
    n = max(8, (f.degree + measure.numerator.degree) // 2 + 2)
    nodes = chebyshev_nodes(n, measure.support.a, measure.support.b)
    return float(np.mean(f(nodes) * measure.numerator(nodes)))


def normalization(measure: EquilibriumMeasure) -> float:
    """Total mass of the measure (should be 1 to roundoff)."""
    n = max(8, measure.numerator.degree // 2 + 2)
    nodes = chebyshev_nodes(n, measure.support.a, measure.support.b)
    return float(np.mean(measure.numerator(nodes)))


def euler_lagrange_residual(measure: EquilibriumMeasure, n: int = 512) -> float:
    """Standard deviation of the effective potential over interior sample points.

    The field ``int log|l - t| drho(t) - W(l)`` must be constant on the
    support of the equilibrium measure.
    """
    nodes = chebyshev_nodes(n, measure.support.a, measure.support.b)
    field = measure.log_potential(nodes) - measure.potential.v(nodes)
    return float(np.std(field))


def mean_field_energy(
    measure: EquilibriumMeasure, potential: ConfinementPotential | None = None
) -> float:
    """Mean-field energy -1/2 iint log|l - m| drho drho + int V drho.

    ``potential`` defaults to the potential the measure was solved with (the
    full tilted W); pass the untilted V to evaluate the untilted functional on
    a tilted minimizer.  The double logarithmic integral is evaluated in
    closed form from the Chebyshev expansion of the numerator:
    ``iint log = g0^2 log(r/2) - sum_k g_k^2 / (2k)``.
    """
    g = measure.cheb_coeffs
    r = measure.support.radius
    double_log = g[0] ** 2 * np.log(r / 2.0)
    for k in range(1, len(g)):
        double_log -= g[k] ** 2 / (2.0 * k)
    v = (potential or measure.potential).v
    return float(-0.5 * double_log + statistic_value(measure, v))

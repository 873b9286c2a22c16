"""Scaled cumulant generating function and rate function via Legendre duality.

For a tilt strength s, the equilibrium measure of W_s = V + s f yields
``x*(s) = int f drho*_s``, which is the derivative of the scaled cumulant
generating function J.  J is therefore recovered by integrating x* from 0,
and the rate function Psi by integrating the inverse map s*(x):

    J(s) = int_0^s x*(t) dt,       Psi(x) = -int_{x0}^x s*(u) du,

with x0 = x*(0), so that J(s) - Psi(x*(s)) = s x*(s) holds on the whole
curve.  Cumulants of the statistic follow from derivatives of J at 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from math import factorial

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    FlatSegmentError,
    IllConfinedError,
    NoConvergenceError,
    NoOneCutError,
    NotAnalyticError,
    PathMismatchError,
)
from .model import ConfinementPotential, LinearStatistic, tilt
from .equilibrium import EquilibriumMeasure, SupportInterval, solve_one_cut, statistic_value
from .quadrature import cumulative_simpson

_SOLVER_FAIL = (NoOneCutError, NoConvergenceError)


class DomainFlag(Enum):
    INTERIOR = "interior"
    DOMAIN_BOUNDARY = "domain_boundary"
    NON_STEEP_BOUNDARY = "non_steep_boundary"


def _solve_tilted(
    potential: ConfinementPotential,
    statistic: LinearStatistic,
    s: float,
    seed: SupportInterval | None,
) -> EquilibriumMeasure:
    """Solve the tilted problem, continuing past confinement loss when seeded."""
    try:
        w = tilt(potential, statistic, s)
    except IllConfinedError:
        if seed is None:
            raise
        w = tilt(potential, statistic, s, continuation=True)
    return solve_one_cut(w, seed=seed)


@dataclass(frozen=True)
class DualityCurve:
    """Tabulated map s -> x*(s) (and, once integrated, s -> J(s)).

    ``s_grid`` is ascending and contains 0 exactly; ``x_values`` is
    nonincreasing (concavity of J).  ``kink_brackets`` are narrow s-intervals
    each containing one detected non-analyticity of the curve; integration
    never places a Simpson parabola across them.
    """

    potential: ConfinementPotential
    statistic: LinearStatistic
    s_grid: np.ndarray
    x_values: np.ndarray
    supports: tuple[SupportInterval, ...]
    flags: tuple[DomainFlag, DomainFlag] = (DomainFlag.INTERIOR, DomainFlag.INTERIOR)
    kink_brackets: tuple[tuple[float, float], ...] = ()
    j_values: np.ndarray | None = None

    def __post_init__(self) -> None:
        s, x = self.s_grid, self.x_values
        if len(s) != len(x) or len(s) < 2:
            raise ValueError("curve needs at least two grid points")
        if np.any(np.diff(s) <= 0):
            raise ValueError("s_grid must be strictly increasing")
        if not np.any(s == 0.0):
            raise ValueError("s_grid must contain 0 exactly")
        tol = 1e-8 * (np.max(np.abs(x)) + 1.0)
        if np.any(np.diff(x) > tol):
            raise ValueError("x values must be nonincreasing in s")

    @property
    def origin_index(self) -> int:
        return int(np.nonzero(self.s_grid == 0.0)[0][0])

    def x_at(self, s: float) -> float:
        return float(np.interp(s, self.s_grid, self.x_values))

    def j_at(self, s) -> np.ndarray:
        if self.j_values is None:
            raise ValueError("curve has not been integrated yet")
        return np.interp(s, self.s_grid, self.j_values)

    def support_at(self, s: float) -> SupportInterval:
        i = int(np.argmin(np.abs(self.s_grid - s)))
        return self.supports[i]


def _probe_boundary(potential, statistic, s_last, direction, span, seed, x_last):
    """Locate the solvability boundary beyond s_last and probe x* approaching it.

    Returns (s_edge, xs) where xs is the sequence of x* values recorded on a
    geometric approach to the edge; a diverging sequence (|last value| > 1e6)
    marks a steep boundary.
    """
    gap = 1e-3 * span
    state = {"seed": seed}

    def solvable(sv: float) -> bool:
        try:
            m = _solve_tilted(potential, statistic, sv, state["seed"])
        except (_SOLVER_FAIL + (IllConfinedError,)):
            return False
        state["seed"] = m.support
        state["x"] = statistic_value(m, statistic.f)
        return True

    a, b = s_last, s_last + direction * gap
    for _ in range(70):
        if not solvable(b):
            break
        a, b = b, b + direction * gap
        gap *= 2.0
    else:
        b = a + direction * gap
    for _ in range(60):
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            break
        if solvable(mid):
            a = mid
        else:
            b = mid
    s_edge = a

    xs = [x_last]
    depth = abs(s_edge - s_last)
    for j in range(1, 44):
        step = depth * 2.0**-j
        if step < 1e-13 * (1.0 + abs(s_edge)):
            break
        if solvable(s_edge - direction * step):
            xs.append(state["x"])
            if abs(xs[-1]) > 1e6:
                break
    return s_edge, xs


def _insert_point(s_list, x_list, sup_list, s, x, sup) -> None:
    i = int(np.searchsorted(s_list, s))
    tol = 1e-12 * (abs(s_list[-1] - s_list[0]) + 1.0)
    for k in (i - 1, i):
        if 0 <= k < len(s_list) and abs(s_list[k] - s) <= tol:
            return
    s_list.insert(i, s)
    x_list.insert(i, x)
    sup_list.insert(i, sup)


def _sweep(potential, statistic, s_values, seed0):
    """Solve at each s in order, seeding each solve from its predecessor.

    Returns (solved list of (s, x, support), truncated_flag) where truncation
    happened at the first unsolvable point.
    """
    out = []
    seed = seed0
    for s in s_values:
        try:
            m = _solve_tilted(potential, statistic, float(s), seed)
        except (_SOLVER_FAIL + (IllConfinedError,)):
            return out, True
        out.append((float(s), statistic_value(m, statistic.f), m.support))
        seed = m.support
    return out, False


_SCAN_HALF_WIDTH = 6


def _fit_disparities(s_arr, x_arr, orders=(1, 2, 3)):
    """Per-cell jumps of one-sided derivative estimates across each grid cell.

    For cell i the left window covers points i-5..i and the right window
    i+1..i+6; cubic fits on each side are differentiated at the cell midpoint.
    Returns an array of shape (len(orders), n_cells); cells too close to the
    ends are left at zero.
    """
    n = len(s_arr)
    w = _SCAN_HALF_WIDTH
    disp = np.zeros((len(orders), n - 1))
    for i in range(w, n - 1 - w):
        sm = 0.5 * (s_arr[i] + s_arr[i + 1])
        li = slice(i - w + 1, i + 1)
        ri = slice(i + 1, i + 1 + w)
        try:
            pl = np.polyfit(s_arr[li] - sm, x_arr[li], 3)
            pr = np.polyfit(s_arr[ri] - sm, x_arr[ri], 3)
        except np.linalg.LinAlgError:
            continue
        for kk, k in enumerate(orders):
            dk_l = np.polyval(np.polyder(pl, k), 0.0)
            dk_r = np.polyval(np.polyder(pr, k), 0.0)
            disp[kk, i] = abs(dk_l - dk_r)
    return disp


def _scan_kink_cells(s_arr, x_arr) -> list[tuple[int, int]]:
    """Indices of grid cells flagged as containing a derivative jump, clustered.

    A cell is flagged when, for some derivative order, its disparity exceeds
    max(1e-3, 50x the local noise floor); the floor is the median disparity
    over nearby cells whose fit windows do not touch the candidate cell, so a
    genuine kink cannot inflate its own floor.  Nearby flagged cells merge
    into one cluster (the windows of up to w neighbours overlap the kink).
    """
    n = len(s_arr)
    w = _SCAN_HALF_WIDTH
    if n < 4 * w:
        return []
    disp = _fit_disparities(s_arr, x_arr)
    n_cells = n - 1
    flagged = []
    for i in range(w, n_cells - w):
        hit = False
        for kk in range(disp.shape[0]):
            sides = np.concatenate(
                [disp[kk, max(0, i - w - 9) : max(0, i - w)], disp[kk, i + w + 1 : i + w + 10]]
            )
            if len(sides) < 4:
                continue
            floor = float(np.median(sides))
            if disp[kk, i] > max(1e-3, 50.0 * floor):
                hit = True
                break
        if hit:
            flagged.append(i)
    clusters: list[tuple[int, int]] = []
    for i in flagged:
        if clusters and i - clusters[-1][1] <= w:
            clusters[-1] = (clusters[-1][0], i)
        else:
            clusters.append((i, i))
    return clusters


def _locate_kinks(potential, statistic, s_arr, x_arr, sup_list, *, delta=1e-5):
    """Scan for derivative jumps on a tabulated curve and bisect each to a bracket.

    Each flagged cluster is narrowed by bisecting the level crossing of the
    centered second difference (window ``delta``), which pins the kink inside
    an interval of width a few ``delta``.
    """
    clusters = _scan_kink_cells(s_arr, x_arr)
    refined = []
    for c_lo, c_hi in clusters:
        lo, hi = float(s_arr[c_lo]), float(s_arr[c_hi + 1])
        seed = sup_list[c_lo]

        def x_of(s, _seed=[seed]):
            m = _solve_tilted(potential, statistic, s, _seed[0])
            _seed[0] = m.support
            return statistic_value(m, statistic.f)

        def d2(s):
            return (x_of(s - delta) - 2.0 * x_of(s) + x_of(s + delta)) / delta**2

        try:
            va = d2(lo - 3 * delta)
            vb = d2(hi + 3 * delta)
            target = 0.5 * (va + vb)
            sign_lo = np.sign(va - target) or 1.0
            a, b = lo, hi
            for _ in range(40):
                if b - a <= 5e-5:
                    break
                mid = 0.5 * (a + b)
                if np.sign(d2(mid) - target) == sign_lo:
                    a = mid
                else:
                    b = mid
            refined.append((a - 2 * delta, b + 2 * delta))
        except (_SOLVER_FAIL + (IllConfinedError,)):
            refined.append((lo, hi))
    return tuple(refined)


def build_curve(
    potential: ConfinementPotential,
    statistic: LinearStatistic,
    s_min: float,
    s_max: float,
    n_points: int,
    *,
    include: tuple[float, ...] = (),
    refine: bool = True,
    locate_kinks: bool = True,
) -> DualityCurve:
    """Tabulate x*(s) on [s_min, s_max] by a continuation sweep from s = 0.

    The range must straddle 0.  If the tilted problem loses confinement or
    the one-cut solution ceases to exist inside the range, the grid is
    truncated there and the endpoint flagged (DomainBoundary, or
    NonSteepBoundary when x* stays bounded toward the truncation).  Intervals
    whose x-increment exceeds 10x the median are bisected down to 1e-4, and
    detected kinks are bracketed to comparable width.
    """
    if not (s_min <= 0.0 <= s_max) or s_min == s_max:
        raise ValueError("s range must contain 0 and be nondegenerate")
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    span = s_max - s_min
    grid = np.linspace(s_min, s_max, n_points)
    grid[np.abs(grid) < 1e-12 * span] = 0.0
    pts = list(grid)
    if 0.0 not in pts:
        pts.append(0.0)
    for p in include:
        p = float(p)
        if s_min <= p <= s_max and np.min(np.abs(np.array(pts) - p)) > 1e-12 * span:
            pts.append(p)
    grid = np.array(sorted(set(float(p) for p in pts)))
    i0 = int(np.nonzero(grid == 0.0)[0][0])

    m0 = solve_one_cut(tilt(potential, statistic, 0.0))
    right, trunc_r = _sweep(potential, statistic, grid[i0 + 1 :], m0.support)
    left, trunc_l = _sweep(potential, statistic, grid[:i0][::-1], m0.support)

    s_list = [p[0] for p in left[::-1]] + [0.0] + [p[0] for p in right]
    x_list = [p[1] for p in left[::-1]] + [statistic_value(m0, statistic.f)] + [p[1] for p in right]
    sup_list = [p[2] for p in left[::-1]] + [m0.support] + [p[2] for p in right]

    def boundary_flag(side: int) -> DomainFlag:
        # side = 0 for left end, -1 for right end; probe whether x* stays bounded
        truncated = trunc_l if side == 0 else trunc_r
        if not truncated:
            return DomainFlag.INTERIOR
        direction = -1.0 if side == 0 else 1.0
        _, xs = _probe_boundary(
            potential, statistic, s_list[side], direction, span, sup_list[side], x_list[side]
        )
        return DomainFlag.DOMAIN_BOUNDARY if abs(xs[-1]) > 1e6 else DomainFlag.NON_STEEP_BOUNDARY

    flags = (boundary_flag(0), boundary_flag(-1))

    if refine and len(s_list) > 4:
        base_inc = np.abs(np.diff(np.array(x_list)))
        med = float(np.median(base_inc))
        if med > 0:
            budget = 8 * n_points

            def refine_cell(s0, x0, sup0, s1, x1, sup1, depth):
                nonlocal budget
                if budget <= 0 or depth > 16 or abs(x1 - x0) <= 10 * med or s1 - s0 <= 1e-4:
                    return
                sm = 0.5 * (s0 + s1)
                try:
                    m = _solve_tilted(potential, statistic, sm, sup0)
                except (_SOLVER_FAIL + (IllConfinedError,)):
                    return
                xm = statistic_value(m, statistic.f)
                budget -= 1
                _insert_point(s_list, x_list, sup_list, sm, xm, m.support)
                refine_cell(s0, x0, sup0, sm, xm, m.support, depth + 1)
                refine_cell(sm, xm, m.support, s1, x1, sup1, depth + 1)

            cells = [
                (s_list[i], x_list[i], sup_list[i], s_list[i + 1], x_list[i + 1], sup_list[i + 1])
                for i in range(len(s_list) - 1)
                if abs(x_list[i + 1] - x_list[i]) > 10 * med
            ]
            for cell in cells:
                refine_cell(*cell, 0)

    s_arr = np.array(s_list)
    x_arr = np.array(x_list)

    kinks: tuple[tuple[float, float], ...] = ()
    if locate_kinks:
        kinks = _locate_kinks(potential, statistic, s_arr, x_arr, sup_list)
        for lo, hi in kinks:
            for s_new in (lo, hi):
                if s_new <= s_arr[0] or s_new >= s_arr[-1]:
                    continue
                seed = sup_list[int(np.searchsorted(s_list, s_new)) - 1]
                try:
                    m = _solve_tilted(potential, statistic, float(s_new), seed)
                except (_SOLVER_FAIL + (IllConfinedError,)):
                    continue
                _insert_point(s_list, x_list, sup_list, float(s_new),
                              statistic_value(m, statistic.f), m.support)
        s_arr = np.array(s_list)
        x_arr = np.array(x_list)

    return DualityCurve(
        potential=potential,
        statistic=statistic,
        s_grid=s_arr,
        x_values=x_arr,
        supports=tuple(sup_list),
        flags=flags,
        kink_brackets=kinks,
    )


def _cumulative_from_origin(s: np.ndarray, y: np.ndarray, i0: int, splits: tuple[tuple[float, float], ...]) -> np.ndarray:
    """Cumulative integral of y ds from s[i0], split so no parabola spans a kink."""
    cut_pts: list[float] = []
    for lo, hi in splits:
        cut_pts += [lo, hi]
    cut_idx = sorted(set(int(np.searchsorted(s, c)) for c in cut_pts if s[0] < c < s[-1]))

    out = np.zeros_like(y)

    def run(idx_from: int, idx_to: int, direction: int) -> None:
        # integrate from idx_from toward idx_to in steps bounded by cut indices
        acc = 0.0
        pos = idx_from
        cuts = [c for c in cut_idx if (c > pos if direction > 0 else c < pos)]
        cuts = cuts if direction > 0 else cuts[::-1]
        targets = cuts + [idx_to]
        for t in targets:
            t = min(t, idx_to) if direction > 0 else max(t, idx_to)
            if (t - pos) * direction <= 0:
                continue
            seg = slice(pos, t + 1) if direction > 0 else slice(t, pos + 1)
            ss, yy = s[seg], y[seg]
            if direction > 0:
                cum = cumulative_simpson(ss, yy)
                out[pos : t + 1] = acc + cum
                acc += cum[-1]
            else:
                u = -ss[::-1]
                cum = cumulative_simpson(u, yy[::-1])
                out[t : pos + 1] = (acc - cum)[::-1]
                acc -= cum[-1]
            pos = t
            if pos == idx_to:
                break

    if i0 < len(s) - 1:
        run(i0, len(s) - 1, +1)
    if i0 > 0:
        run(i0, 0, -1)
    return out


def integrate_j(curve: DualityCurve) -> DualityCurve:
    """Fill the cumulant generating function J(s) = int_0^s x*; J(0) = 0 exactly."""
    j = _cumulative_from_origin(curve.s_grid, curve.x_values, curve.origin_index, curve.kink_brackets)
    return replace(curve, j_values=j)


@dataclass(frozen=True)
class RateFunctionTable:
    """Inverse map s*(x) on an ascending x grid, plus the rate function Psi."""

    x_grid: np.ndarray
    s_star_values: np.ndarray
    x0: float
    kink_brackets: tuple[tuple[float, float], ...] = ()
    psi_values: np.ndarray | None = None

    @cached_property
    def _s_star_interp(self) -> PchipInterpolator:
        return PchipInterpolator(self.x_grid, self.s_star_values, extrapolate=False)

    @cached_property
    def _psi_interp(self) -> PchipInterpolator:
        if self.psi_values is None:
            raise ValueError("table has not been integrated yet")
        return PchipInterpolator(self.x_grid, self.psi_values, extrapolate=False)

    def s_star_at(self, x) -> np.ndarray:
        return self._s_star_interp(x)

    def psi_at(self, x) -> np.ndarray:
        return self._psi_interp(x)


def invert_curve(curve: DualityCurve) -> RateFunctionTable:
    """Invert the nonincreasing map s -> x*(s) into s*(x) on an ascending x grid.

    Numerically coincident x values are deduplicated; a genuinely flat
    stretch (zero slope over a finite s interval, a first-order transition)
    makes the inverse multivalued and raises FlatSegmentError.
    """
    s = curve.s_grid[::-1].copy()
    x = curve.x_values[::-1].copy()
    span = curve.s_grid[-1] - curve.s_grid[0]
    xscale = float(np.max(np.abs(x))) + 1.0

    keep = [0]
    for i in range(1, len(x)):
        dx = x[i] - x[keep[-1]]
        ds = abs(s[i] - s[keep[-1]])
        if dx <= 0 or dx < 1e-13 * xscale:
            if ds > 1e-6 * span and dx <= 1e-13 * xscale:
                raise FlatSegmentError(
                    f"x*(s) is flat near s = {s[i]:.6g}: the statistic map is not invertible"
                )
            continue  # drop numerically duplicate node
        keep.append(i)
    x_grid = x[keep]
    s_star = s[keep]
    if len(x_grid) < 2:
        raise FlatSegmentError("curve is globally flat; no inverse map exists")

    x0 = curve.x_values[curve.origin_index]
    xk = []
    for lo, hi in curve.kink_brackets:
        xs = np.interp([lo, hi], curve.s_grid, curve.x_values)
        xk.append((float(np.min(xs)), float(np.max(xs))))
    return RateFunctionTable(x_grid=x_grid, s_star_values=s_star, x0=float(x0), kink_brackets=tuple(xk))


def integrate_psi(table: RateFunctionTable, x0: float | None = None) -> RateFunctionTable:
    """Fill Psi(x) = -int_{x0}^x s*(u) du; Psi(x0) = 0 with x0 = x*(0) by default."""
    x0 = table.x0 if x0 is None else float(x0)
    i0 = int(np.argmin(np.abs(table.x_grid - x0)))
    if abs(table.x_grid[i0] - x0) > 1e-9 * (1.0 + abs(x0)):
        raise ValueError("x0 must be a grid point of the rate-function table")
    psi = -_cumulative_from_origin(table.x_grid, table.s_star_values, i0, table.kink_brackets)
    return replace(table, psi_values=psi)


def legendre_check(curve: DualityCurve, table: RateFunctionTable) -> float:
    """Max residual of J(s) - Psi(x*(s)) - s x*(s) over the curve grid."""
    if curve.j_values is None or table.psi_values is None:
        raise ValueError("both J and Psi must be integrated first")
    psi = table.psi_at(curve.x_values)
    ok = np.isfinite(psi)
    res = curve.j_values[ok] - psi[ok] - curve.s_grid[ok] * curve.x_values[ok]
    return float(np.max(np.abs(res)))


@dataclass(frozen=True)
class CumulantReport:
    """Derivatives of J at 0 and their finite-size cumulant scalings.

    ``derivatives[m-1]`` holds d^m J / ds^m at s = 0.  The m-th cumulant of
    the statistic at size (N, beta) is ``(-1/(beta N^2))**(m-1)`` times that
    derivative.
    """

    orders: tuple[int, ...]
    derivatives: np.ndarray
    step: float

    def finite_n_values(self, n_particles: int, beta: float) -> np.ndarray:
        m = np.array(self.orders, dtype=float)
        return (-1.0 / (beta * n_particles**2)) ** (m - 1.0) * self.derivatives


def _fd_weights(offsets: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights for the given derivative order on unit offsets."""
    n = len(offsets)
    a = np.vander(offsets, n, increasing=True).T  # a[t, j] = offsets[j]**t
    rhs = np.zeros(n)
    rhs[order] = factorial(order)
    return np.linalg.solve(a, rhs)


def cumulants(
    potential: ConfinementPotential,
    statistic: LinearStatistic,
    m_max: int,
    *,
    h0: float = 1e-2,
    levels: int = 4,
) -> CumulantReport:
    """Derivatives d^m J/ds^m at 0 for m = 1..m_max by Richardson extrapolation.

    Central differences of x*(s) = J'(s) on symmetric stencils, evaluated on a
    geometric ladder of step sizes and extrapolated in h^2.  The base step
    shrinks automatically until the widest stencil (with a safety margin) fits
    inside the solvable tilt domain; NotAnalyticError is raised if the stencil
    region contains a detected kink of x*.
    """
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    if m_max > 6:
        raise ValueError("cumulants are supported up to order 6")
    kmax = max(1, -(-(m_max - 1) // 2))  # stencil half-width for the top derivative

    m0 = solve_one_cut(tilt(potential, statistic, 0.0))
    x0 = statistic_value(m0, statistic.f)
    if m_max == 1:
        return CumulantReport(orders=(1,), derivatives=np.array([x0]), step=0.0)

    def solvable(s: float) -> bool:
        try:
            _solve_tilted(potential, statistic, s, m0.support)
        except (_SOLVER_FAIL + (IllConfinedError,)):
            return False
        return True

    h = float(h0)
    for _ in range(14):
        margin = 2.5 * kmax * h
        if solvable(margin) and solvable(-margin):
            break
        h *= 0.5
    else:
        raise NoConvergenceError("no symmetric stencil of any size fits the solvable domain")

    # x* at all needed offsets, swept outward with continuation seeding
    mults = sorted({m * 2.0**-lev for m in range(1, kmax + 1) for lev in range(levels)})
    xs = {0.0: x0}
    for sign in (+1.0, -1.0):
        seed = m0.support
        for m in mults:
            s = sign * m * h
            meas = _solve_tilted(potential, statistic, s, seed)
            xs[s] = statistic_value(meas, statistic.f)
            seed = meas.support

    # kink guard: scan x* on a uniform grid spanning the stencil region
    maxoff = kmax * h
    aux = np.linspace(-1.6 * maxoff, 1.6 * maxoff, 57)
    aux_x = np.empty_like(aux)
    ia = len(aux) // 2
    aux_x[ia] = x0
    for idx_range in (range(ia + 1, len(aux)), range(ia - 1, -1, -1)):
        seed = m0.support
        for i in idx_range:
            meas = _solve_tilted(potential, statistic, float(aux[i]), seed)
            aux_x[i] = statistic_value(meas, statistic.f)
            seed = meas.support
    if _scan_kink_cells(aux, aux_x):
        raise NotAnalyticError(
            "x*(s) is not smooth inside the difference stencil; move or shrink it"
        )

    derivs = [x0]
    for q in range(1, m_max):  # q-th derivative of x* = (q+1)-th of J
        k = max(1, -(-q // 2))
        offsets = np.arange(-k, k + 1, dtype=float)
        w = _fd_weights(offsets, q)
        ladder = []
        for lev in range(levels):
            hh = h * 2.0**-lev
            val = sum(w[j] * xs[offsets[j] * hh] for j in range(len(offsets))) / hh**q
            ladder.append(val)
        # Richardson tableau in powers of h^2
        tab = [list(ladder)]
        for col in range(1, levels):
            prev = tab[col - 1]
            fac = 4.0**col
            tab.append([(fac * prev[i + 1] - prev[i]) / (fac - 1.0) for i in range(len(prev) - 1)])
        derivs.append(float(tab[-1][0]))

    return CumulantReport(
        orders=tuple(range(1, m_max + 1)), derivatives=np.array(derivs), step=h
    )


@dataclass(frozen=True)
class JointSurface:
    """x1*(s1, s2), x2*(s1, s2) on a rectangular tilt grid containing the origin."""

    potential: ConfinementPotential
    statistic_1: LinearStatistic
    statistic_2: LinearStatistic
    s1_grid: np.ndarray
    s2_grid: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    cropped: bool = False

    @property
    def origin(self) -> tuple[int, int]:
        return (
            int(np.nonzero(self.s1_grid == 0.0)[0][0]),
            int(np.nonzero(self.s2_grid == 0.0)[0][0]),
        )


def joint_build_surface(
    potential: ConfinementPotential,
    statistic_1: LinearStatistic,
    statistic_2: LinearStatistic,
    s1_grid: np.ndarray,
    s2_grid: np.ndarray,
) -> JointSurface:
    """Solve the doubly tilted problem W = V + s1 f1 + s2 f2 on a grid.

    Sweeps run outward from the origin with continuation seeding.  If some
    nodes are unsolvable the grid is cropped to the largest rectangle around
    the origin whose nodes all solved; the result is flagged ``cropped``.
    """
    s1 = np.asarray(s1_grid, dtype=float)
    s2 = np.asarray(s2_grid, dtype=float)
    for g in (s1, s2):
        if np.any(np.diff(g) <= 0) or not np.any(g == 0.0):
            raise ValueError("joint grids must be strictly increasing and contain 0")
    i0 = int(np.nonzero(s1 == 0.0)[0][0])
    j0 = int(np.nonzero(s2 == 0.0)[0][0])
    n1, n2 = len(s1), len(s2)

    x1 = np.full((n1, n2), np.nan)
    x2 = np.full((n1, n2), np.nan)
    valid = np.zeros((n1, n2), dtype=bool)

    def tilt2(a: float, b: float) -> ConfinementPotential:
        w = potential.v + statistic_1.f.scaled(a) + statistic_2.f.scaled(b)
        try:
            return ConfinementPotential(w, potential.walls)
        except IllConfinedError:
            return ConfinementPotential._unchecked(w, potential.walls)

    base = solve_one_cut(tilt2(0.0, 0.0))
    axis_seeds: dict[int, SupportInterval] = {}
    for i in list(range(i0, n1)) + list(range(i0 - 1, -1, -1)):
        seed = axis_seeds.get(i + 1 if i < i0 else i - 1, base.support) if i != i0 else base.support
        try:
            m_axis = solve_one_cut(tilt2(s1[i], 0.0), seed=seed)
        except _SOLVER_FAIL:
            continue
        axis_seeds[i] = m_axis.support
        for jrange in (range(j0, n2), range(j0 - 1, -1, -1)):
            seed_col = m_axis.support
            for j in jrange:
                if j == j0:
                    m = m_axis
                else:
                    try:
                        m = solve_one_cut(tilt2(s1[i], s2[j]), seed=seed_col)
                    except _SOLVER_FAIL:
                        break
                seed_col = m.support
                x1[i, j] = statistic_value(m, statistic_1.f)
                x2[i, j] = statistic_value(m, statistic_2.f)
                valid[i, j] = True

    if not valid[i0, j0]:
        raise NoOneCutError("joint problem unsolvable at the origin")

    # largest valid rectangle around the origin
    rows = np.nonzero(~valid[:, j0])[0]
    ilo = int(np.max(rows[rows < i0]) + 1) if np.any(rows < i0) else 0
    ihi = int(np.min(rows[rows > i0]) - 1) if np.any(rows > i0) else n1 - 1
    jlo, jhi = 0, n2 - 1
    for i in range(ilo, ihi + 1):
        cols = np.nonzero(~valid[i, :])[0]
        if np.any(cols < j0):
            jlo = max(jlo, int(np.max(cols[cols < j0]) + 1))
        if np.any(cols > j0):
            jhi = min(jhi, int(np.min(cols[cols > j0]) - 1))
    cropped = (ilo, ihi, jlo, jhi) != (0, n1 - 1, 0, n2 - 1)
    return JointSurface(
        potential=potential,
        statistic_1=statistic_1,
        statistic_2=statistic_2,
        s1_grid=s1[ilo : ihi + 1],
        s2_grid=s2[jlo : jhi + 1],
        x1=x1[ilo : ihi + 1, jlo : jhi + 1],
        x2=x2[ilo : ihi + 1, jlo : jhi + 1],
        cropped=cropped,
    )


@dataclass(frozen=True)
class JointLdf:
    """Joint generating function and rate function on the tilt grid."""

    surface: JointSurface
    j_values: np.ndarray
    psi_values: np.ndarray
    path_mismatch: float


def joint_integrate(surface: JointSurface, *, mismatch_tol: float = 1e-5) -> JointLdf:
    """Integrate dJ = x1 ds1 + x2 ds2 along both axis orders and verify exactness.

    Path A integrates along s1 at s2 = 0 and then along s2; path B the other
    way around.  Their maximal disagreement beyond ``mismatch_tol`` raises
    PathMismatchError.  The joint rate function follows from the Legendre
    identity Psi = J - s1 x1 - s2 x2 at every node.
    """
    s1, s2 = surface.s1_grid, surface.s2_grid
    i0, j0 = surface.origin
    n1, n2 = len(s1), len(s2)

    j_a = np.zeros((n1, n2))
    base = _cumulative_from_origin(s1, surface.x1[:, j0], i0, ())
    for i in range(n1):
        j_a[i, :] = base[i] + _cumulative_from_origin(s2, surface.x2[i, :], j0, ())

    j_b = np.zeros((n1, n2))
    base2 = _cumulative_from_origin(s2, surface.x2[i0, :], j0, ())
    for j in range(n2):
        j_b[:, j] = base2[j] + _cumulative_from_origin(s1, surface.x1[:, j], i0, ())

    mismatch = float(np.max(np.abs(j_a - j_b)))
    if mismatch > mismatch_tol:
        raise PathMismatchError(
            f"axis-order integrals differ by {mismatch:.3e} (> {mismatch_tol:.1e}); "
            "the surface is inconsistent with an exact differential"
        )
    j = 0.5 * (j_a + j_b)
    psi = j - np.outer(s1, np.ones(n2)) * surface.x1 - np.outer(np.ones(n1), s2) * surface.x2
    return JointLdf(surface=surface, j_values=j, psi_values=psi, path_mismatch=mismatch)


def mixed_partial_asymmetry(surface: JointSurface) -> float:
    """Max |d x1/d s2 - d x2/d s1| over interior nodes, by central differences."""
    s1, s2 = surface.s1_grid, surface.s2_grid
    dx1_ds2 = np.gradient(surface.x1, s2, axis=1)
    dx2_ds1 = np.gradient(surface.x2, s1, axis=0)
    inner = (slice(1, -1), slice(1, -1))
    return float(np.max(np.abs(dx1_ds2[inner] - dx2_ds1[inner])))

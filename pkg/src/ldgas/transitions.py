"""Phase transitions of the generating function and steepness of its domain.

A transition of order l is a jump in the l-th s-derivative of J, i.e. in the
(l-1)-th derivative of x*(s).  Candidates come from the kink brackets located
while building a DualityCurve; each is confirmed and classified here by
comparing one-sided polynomial fits on windows flanking the bracket.

At a truncated end of the curve the generating function may cease to exist.
Whether the Legendre transform still recovers the full rate function depends
on the boundary slope: if x* = J' diverges approaching the boundary (a steep
edge), every slope is realized; if it stays bounded, the rate function
continues linearly beyond the last tabulated point.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import IllConfinedError, NoConvergenceError, NoOneCutError
from .duality import DomainFlag, DualityCurve, _probe_boundary, _solve_tilted
from .equilibrium import statistic_value

_SOLVER_FAIL = (NoOneCutError, NoConvergenceError, IllConfinedError)


@dataclass(frozen=True)
class CriticalPoint:
    """A confirmed non-analyticity of J inside (s_lower, s_upper).

    ``order`` is the lowest discontinuous derivative of J (3 for the usual
    edge-detachment transitions); ``jump`` is the right-minus-left jump of
    d^(order-1) x*/ds^(order-1) across the point.
    """

    s_lower: float
    s_upper: float
    order: int
    jump: float

    @property
    def location(self) -> float:
        return 0.5 * (self.s_lower + self.s_upper)


@dataclass(frozen=True)
class SteepnessReport:
    """Behaviour of x* = J' at a truncated end of the tilt domain."""

    boundary_s: float
    boundary_slope: float
    steep: bool
    note: str


def _window_fit(potential, statistic, seed, s_points):
    xs = np.empty(len(s_points))
    for i, s in enumerate(s_points):
        m = _solve_tilted(potential, statistic, float(s), seed)
        seed = m.support
        xs[i] = statistic_value(m, statistic.f)
    return xs


def _side_derivatives(s_points, xs, s_mid, deg, k_list):
    """Derivative estimates at s_mid plus noise floors from the fit residual."""
    t = s_points - s_mid
    coeffs = np.polyfit(t, xs, deg)
    resid = xs - np.polyval(coeffs, t)
    rms = float(np.sqrt(np.mean(resid**2))) + 1e-15 * (np.max(np.abs(xs)) + 1.0)
    # amplification of white noise into the k-th derivative at t = 0
    vand = np.vander(t, deg + 1, increasing=True)
    pinv = np.linalg.pinv(vand)
    out = {}
    for k in k_list:
        fac = float(factorial(k))
        amp = fac * float(np.linalg.norm(pinv[k]))
        dk = fac * coeffs[deg - k] if k <= deg else 0.0
        out[k] = (float(dk), rms * amp)
    return out


def detect_transitions(curve: DualityCurve, max_order: int = 4) -> tuple[CriticalPoint, ...]:
    """Confirm and classify the kink brackets of a curve into critical points.

    For each bracket, x* is resampled on windows flanking it, one-sided fits
    estimate the derivatives of x* on each side, and the transition order is
    set by the lowest derivative whose jump stands clear of the fit noise.
    Candidates whose one-sided fits agree to within noise at every order, or
    that sit too close to a curve end to support a window, are dropped.
    """
    s = curve.s_grid
    span = s[-1] - s[0]
    found: list[CriticalPoint] = []
    for lo, hi in curve.kink_brackets:
        s_mid = 0.5 * (lo + hi)
        gap = max(hi - lo, 1e-6 * span)
        room = min(s_mid - s[0], s[-1] - s_mid)
        for other in curve.kink_brackets:
            om = 0.5 * (other[0] + other[1])
            if om != s_mid:
                room = min(room, 0.45 * abs(om - s_mid))
        width = min(0.08 * span, room)
        if width < 12 * gap:
            continue  # no space for a classification window
        n_side = 24
        left_pts = np.linspace(s_mid - width, s_mid - 1.5 * gap, n_side)
        right_pts = np.linspace(s_mid + 1.5 * gap, s_mid + width, n_side)
        i_near = int(np.argmin(np.abs(s - s_mid)))
        seed = curve.supports[i_near]
        try:
            xl = _window_fit(curve.potential, curve.statistic, seed, left_pts[::-1])[::-1]
            xr = _window_fit(curve.potential, curve.statistic, seed, right_pts)
        except _SOLVER_FAIL:
            continue
        k_list = list(range(0, max_order))
        dl = _side_derivatives(left_pts, xl, s_mid, 5, k_list)
        dr = _side_derivatives(right_pts, xr, s_mid, 5, k_list)
        for k in k_list:
            jump = dr[k][0] - dl[k][0]
            noise = dl[k][1] + dr[k][1]
            scale = max(abs(dl[k][0]), abs(dr[k][0]), 1.0)
            if abs(jump) > max(1e-4 * scale, 12.0 * noise):
                found.append(
                    CriticalPoint(s_lower=float(lo), s_upper=float(hi), order=k + 1, jump=float(jump))
                )
                break
    return tuple(sorted(found, key=lambda c: c.location))


def check_steepness(curve: DualityCurve) -> tuple[SteepnessReport, ...]:
    """Probe x* = J' at each truncated end of the curve.

    Returns one report per flagged end (none if the curve covers its whole
    requested range, in which case no domain boundary was seen).  The probe
    first bisects the solvability boundary, then approaches it geometrically,
    watching whether x* diverges (steep) or levels off (non-steep).
    """
    reports: list[SteepnessReport] = []
    s = curve.s_grid
    for side, flag in ((0, curve.flags[0]), (-1, curve.flags[1])):
        if flag is DomainFlag.INTERIOR:
            continue
        s_last = float(s[side])
        direction = -1.0 if side == 0 else 1.0
        span = float(s[-1] - s[0])
        s_edge, xs = _probe_boundary(
            curve.potential,
            curve.statistic,
            s_last,
            direction,
            span,
            curve.supports[side],
            float(curve.x_values[side]),
        )
        slope = xs[-1]
        steep = abs(slope) > 1e6
        if steep:
            note = (
                f"x* grows without bound approaching s = {s_edge:.8g}; the generating "
                "function is steep there and inversion covers every statistic value"
            )
        else:
            tail = np.abs(np.array(xs[-4:]))
            settled = len(tail) >= 3 and np.max(tail) - np.min(tail) < 1e-3 * (np.max(tail) + 1.0)
            note = (
                f"x* stays bounded (about {slope:.8g}) at the domain edge s = {s_edge:.8g}; "
                "the rate function continues linearly beyond the last tabulated value"
                + ("" if settled else " (limit estimate has not fully settled)")
            )
        reports.append(
            SteepnessReport(
                boundary_s=float(s_edge), boundary_slope=float(slope), steep=steep, note=note
            )
        )
    return tuple(reports)

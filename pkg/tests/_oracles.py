"""Closed-form references and random-instance builders shared by the tests.

The walled flat-potential gas and the quadratic-plus-quartic pair below have
fully explicit optimizers, generating functions, and rate functions; tests
treat these expressions as ground truth and compare library output against
them.  Everything here is implemented from the closed forms alone, with no
calls into the package's own quadrature or solvers.
"""

from __future__ import annotations

import numpy as np

from ldgas import ConfinementPotential, LinearStatistic, Polynomial, Walls


def box_potential() -> ConfinementPotential:
    return ConfinementPotential(Polynomial([0.0]), Walls(-1.0, 1.0))


def box_statistic() -> LinearStatistic:
    return LinearStatistic(Polynomial([0.0, 1.0]))


def quartic_potential() -> ConfinementPotential:
    return ConfinementPotential(Polynomial([0.0, 0.0, 0.25]))


def quartic_statistic() -> LinearStatistic:
    return LinearStatistic(Polynomial([0.0, 0.0, 0.0, 0.0, 1.0]))


def box_x_star(s):
    """Optimal mean position of the walled flat gas under tilt s."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore"):
        outer_pos = 1.0 / (2.0 * s) - 1.0
        outer_neg = 1.0 / (2.0 * s) + 1.0
    return np.where(np.abs(s) <= 1.0, -s / 2.0, np.where(s > 0.0, outer_pos, outer_neg))


def box_j(s):
    s = np.asarray(s, dtype=float)
    mag = np.maximum(np.abs(s), 1e-300)
    outer = -mag + 0.5 * np.log(mag) + 0.75
    return np.where(np.abs(s) <= 1.0, -(s**2) / 4.0, outer)


def box_psi(x):
    x = np.asarray(x, dtype=float)
    outer = 0.25 - 0.5 * np.log(2.0 * np.maximum(1.0 - np.abs(x), 1e-300))
    return np.where(np.abs(x) <= 0.5, x**2, outer)


def box_s_star(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        outer_pos = 1.0 / (2.0 * (x - 1.0))
        outer_neg = 1.0 / (2.0 * (x + 1.0))
    return np.where(np.abs(x) <= 0.5, -2.0 * x, np.where(x > 0.0, outer_pos, outer_neg))


def quartic_l(s):
    """Edge parameter of the tilted quadratic+quartic model; L(0) = 1."""
    s = np.asarray(s, dtype=float)
    safe = np.where(s == 0.0, 1.0, s)
    return np.where(s == 0.0, 1.0, (np.sqrt(1.0 + 96.0 * s) - 1.0) / (48.0 * safe))


def quartic_x_star(s):
    ell = quartic_l(s)
    return ell**2 * (3.0 - ell)


def quartic_j(s):
    ell = quartic_l(s)
    return (ell - 1.0) * (9.0 - ell) / 48.0 - 0.25 * np.log(ell)


PLANAR_COUNTS = np.array([2.0, 36.0, 1728.0, 145152.0, 17915904.0])
QUARTIC_DERIVS = np.array([2.0, -72.0, 6912.0, -1161216.0, 286654464.0])
QUARTIC_J_AT_1_32 = -25.0 / 432.0 + 0.25 * np.log(1.5)


def random_instance(rng: np.random.Generator):
    """A random confining ensemble (degree <= 6) with a random statistic.

    Wall layout and potential degree are co-chosen so the potential always
    confines.  On gases with an open side the statistic's degree is kept at
    or below the potential's and its leading sign is matched, so every tilt
    inside the returned |s| scale stays confining as well.
    """
    mode = str(rng.choice(["none", "both", "lower", "upper"]))
    if mode == "none":
        deg = int(rng.choice([2, 4, 6]))
    else:
        deg = int(rng.integers(1, 7))
    coeffs = rng.normal(0.0, 0.6, size=deg + 1)
    lead = 0.3 + abs(coeffs[-1])
    if mode == "upper" and deg % 2 == 1:
        lead = -lead
    coeffs[-1] = lead
    walls = {
        "none": Walls(None, None),
        "both": Walls(-float(0.5 + rng.random() * 1.5), float(0.5 + rng.random() * 1.5)),
        "lower": Walls(-float(0.5 + rng.random() * 1.5), None),
        "upper": Walls(None, float(0.5 + rng.random() * 1.5)),
    }[mode]
    potential = ConfinementPotential(Polynomial(list(coeffs)), walls)

    fdeg = int(rng.integers(1, 5))
    if mode != "both":
        fdeg = min(fdeg, deg)
        if mode == "none" and fdeg % 2 == 1:
            fdeg = max(2, fdeg - 1)
    fcoeffs = rng.normal(0.0, 0.5, size=fdeg + 1)
    flead = 0.1 + abs(fcoeffs[-1])
    if mode != "both" and lead < 0.0:
        flead = -flead
    fcoeffs[-1] = flead
    statistic = LinearStatistic(Polynomial(list(fcoeffs)))

    # lead + s*flead keeps its sign for |s| within this bound (same-sign leads)
    s_scale = 0.05 * (1.0 + abs(lead)) / (1.0 + abs(flead))
    return potential, statistic, float(s_scale)

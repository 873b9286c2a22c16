"""Domain types: polynomials, walls, confining potentials, statistics, gas parameters.

The joint eigenvalue law handled by this package is
``dP = Z^-1 exp(-beta E(lam)) dlam`` with
``E = -sum_{i<j} log|lam_i - lam_j| + N sum_i V(lam_i)``,
optionally restricted to a wall interval.  A linear statistic
``F = N^-1 sum_i f(lam_i)`` is tilted into the potential as ``W_s = V + s f``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllConfinedError


@dataclass(frozen=True, slots=True)
class Polynomial:
    """Real polynomial in the power basis, ascending coefficients.

    Trailing zero coefficients are stripped on construction so that the last
    stored coefficient is nonzero unless the polynomial is identically zero.
    """

    coefficients: tuple[float, ...]

    def __init__(self, coefficients) -> None:
        coeffs = [float(c) for c in coefficients]
        if not coeffs:
            coeffs = [0.0]
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs.pop()
        if not all(np.isfinite(coeffs)):
            raise ValueError("polynomial coefficients must be finite")
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return self.coefficients == (0.0,)

    @property
    def leading(self) -> float:
        return self.coefficients[-1]

    def __call__(self, x):
        """Horner evaluation; accepts scalars or numpy arrays."""
        x = np.asarray(x, dtype=float)
        acc = np.full_like(x, self.coefficients[-1])
        for c in self.coefficients[-2::-1]:
            acc = acc * x + c
        return float(acc) if acc.ndim == 0 else acc

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial((0.0,))
        return Polynomial(tuple(k * c for k, c in enumerate(self.coefficients) if k > 0))

    def antiderivative(self) -> "Polynomial":
        """Primitive with zero constant term."""
        return Polynomial((0.0,) + tuple(c / (k + 1) for k, c in enumerate(self.coefficients)))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coefficients), len(other.coefficients))
        a = np.zeros(n)
        a[: len(self.coefficients)] += self.coefficients
        a[: len(other.coefficients)] += other.coefficients
        return Polynomial(tuple(a))

    def scaled(self, factor: float) -> "Polynomial":
        return Polynomial(tuple(factor * c for c in self.coefficients))


@dataclass(frozen=True, slots=True)
class Walls:
    """Hard-wall interval; ``None`` encodes an infinite (absent) wall.

    Infinities are never represented as floats inside model arithmetic; the
    tag itself carries the information.
    """

    lower: float | None = None
    upper: float | None = None

    def __post_init__(self) -> None:
        for w in (self.lower, self.upper):
            if w is not None and not np.isfinite(w):
                raise ValueError("finite wall positions must be finite floats; use None for no wall")
        if self.lower is not None and self.upper is not None and not self.lower < self.upper:
            raise ValueError("lower wall must lie strictly below upper wall")

    @property
    def is_free(self) -> bool:
        return self.lower is None and self.upper is None


def _grows_at(poly: Polynomial, direction: int) -> bool:
    """True if poly(x) -> +inf as x -> direction * inf."""
    if poly.degree == 0:
        return False
    if direction > 0:
        return poly.leading > 0
    return poly.leading > 0 if poly.degree % 2 == 0 else poly.leading < 0


def _check_confining(v: Polynomial, walls: Walls) -> None:
    if walls.lower is None and not _grows_at(v, -1):
        raise IllConfinedError(
            f"potential of degree {v.degree} with leading coefficient {v.leading:g} "
            "does not grow at -inf and no lower wall is present"
        )
    if walls.upper is None and not _grows_at(v, +1):
        raise IllConfinedError(
            f"potential of degree {v.degree} with leading coefficient {v.leading:g} "
            "does not grow at +inf and no upper wall is present"
        )
    if walls.is_free and v.degree < 2:
        raise IllConfinedError("wall-free potential must have degree >= 2")


@dataclass(frozen=True, slots=True)
class ConfinementPotential:
    """Potential term of the gas energy together with its wall interval.

    Without walls the polynomial must grow to +inf in every open direction
    (even degree >= 2 with positive leading coefficient); with a wall on one
    side only the open direction is constrained.
    """

    v: Polynomial
    walls: Walls = Walls()

    def __post_init__(self) -> None:
        _check_confining(self.v, self.walls)

    @classmethod
    def _unchecked(cls, v: Polynomial, walls: Walls) -> "ConfinementPotential":
        """Bypass the confinement validation.

        Only used for analytic continuation of the equilibrium problem into
        tilt strengths where the global measure does not exist but a local
        one-cut solution still does.
        """
        obj = object.__new__(cls)
        object.__setattr__(obj, "v", v)
        object.__setattr__(obj, "walls", walls)
        return obj

    @property
    def is_confining(self) -> bool:
        try:
            _check_confining(self.v, self.walls)
        except IllConfinedError:
            return False
        return True


@dataclass(frozen=True, slots=True)
class LinearStatistic:
    """Polynomial test function f of a linear statistic N^-1 sum_i f(lam_i)."""

    f: Polynomial

    def __post_init__(self) -> None:
        if self.f.degree < 1:
            raise ValueError("statistic polynomial must have degree >= 1")


@dataclass(frozen=True, slots=True)
class GasParameters:
    """Particle number and inverse temperature; the LDP speed is beta * N**2."""

    n_particles: int
    beta: float

    def __post_init__(self) -> None:
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    @property
    def speed(self) -> float:
        return self.beta * self.n_particles**2


def tilt(
    potential: ConfinementPotential,
    statistic: LinearStatistic,
    s: float,
    *,
    continuation: bool = False,
) -> ConfinementPotential:
    """Tilted potential W_s = V + s*f with the original walls.

    Raises IllConfinedError when the tilt destroys confinement, unless
    ``continuation=True``, which returns an unvalidated potential for local
    analytic continuation of the one-cut branch.
    """
    w = potential.v + statistic.f.scaled(float(s))
    if continuation:
        return ConfinementPotential._unchecked(w, potential.walls)
    return ConfinementPotential(w, potential.walls)

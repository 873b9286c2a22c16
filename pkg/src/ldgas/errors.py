"""Exception taxonomy for solver and pipeline failure modes."""

from __future__ import annotations


class LdgasError(Exception):
    """Base class for all package-specific failures."""


class IllConfinedError(LdgasError):
    """The (tilted) potential does not grow fast enough to confine the gas."""


class NoOneCutError(LdgasError):
    """No single-interval equilibrium measure with nonnegative density exists."""


class NoConvergenceError(LdgasError):
    """Edge root-finding failed to converge after all fallbacks."""


class FlatSegmentError(LdgasError):
    """The statistic map s -> x*(s) has a flat segment; the inverse is not a function."""


class PathMismatchError(LdgasError):
    """Two-statistic surface integration along different axis orders disagrees."""


class NotAnalyticError(LdgasError):
    """A finite-difference stencil straddles a critical point of the curve."""


class ConfigError(LdgasError):
    """Malformed, incomplete, or unrecognized run configuration."""

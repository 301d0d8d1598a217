"""Exception types shared across the package.

Every failure mode that callers are expected to handle programmatically is a
subclass of :class:`OscPhaseError`, so ``except OscPhaseError`` at an outer
layer (e.g. the CLI) catches all solver-level failures while letting genuine
bugs propagate.
"""

__all__ = [
    "OscPhaseError",
    "NonPositiveEnergy",
    "OutsideAllowedRegion",
    "PoleAtPoint",
    "ContourTooTight",
    "NoConvergence",
    "ZeroMomentumAtOrigin",
    "PhasePole",
    "NonPositivePhaseDerivative",
    "TailTooLarge",
    "BracketNotFound",
    "NotAnEigenvalue",
    "EigenvaluePole",
    "GammaPole",
]


class OscPhaseError(Exception):
    """Base class for all solver-level errors raised by this package."""


class NonPositiveEnergy(OscPhaseError):
    """Energy must be positive for a well with V(0) = 0."""


class OutsideAllowedRegion(OscPhaseError):
    """Requested point lies outside the classically allowed interval."""


class PoleAtPoint(OscPhaseError):
    """A rational jet expression was evaluated where its denominator vanishes."""


class ContourTooTight(OscPhaseError):
    """Contour quadrature nodes pass too close to a singularity."""


class NoConvergence(OscPhaseError):
    """An iterative solver exhausted its iteration budget."""


class ZeroMomentumAtOrigin(OscPhaseError):
    """The classical momentum vanishes at x = 0 (energy at or below the well bottom)."""


class PhasePole(OscPhaseError):
    """Cotangent-based phase relation evaluated at a pole of cot."""


class NonPositivePhaseDerivative(OscPhaseError):
    """A converged phase derivative is not strictly positive everywhere."""


class TailTooLarge(OscPhaseError):
    """The estimated phase tail beyond the grid exceeds the requested tolerance."""


class BracketNotFound(OscPhaseError):
    """Root bracketing failed within the searched energy range."""


class NotAnEigenvalue(OscPhaseError):
    """The supplied energy does not satisfy the quantization condition."""


class EigenvaluePole(OscPhaseError):
    """Analytic parameter formulas degenerate at an exact eigenvalue."""


class GammaPole(OscPhaseError):
    """A Gamma-function argument hit a nonpositive-integer pole."""

"""Exception types shared across the package.

Several of these carry control-flow meaning: ``OverflowError`` (the builtin)
from the Mittag-Leffler derivative tells the counting layer to switch to the
subordination-integral route, and ``NonConvergenceError`` from the M-Wright
series tells callers to fall back to the saddle-point tail.
"""


class NonConvergenceError(ArithmeticError):
    """A series/asymptotic evaluation could not reach the requested tolerance."""


class InvalidOrderError(ValueError):
    """Function order outside its admissible range (e.g. alpha <= 0)."""


class QuadratureError(ArithmeticError):
    """A quadrature could not reach its error target within budget."""


class ContourError(ArithmeticError):
    """Image-function evaluation failed on an inversion contour node."""


class NonRealResultError(ArithmeticError):
    """Laplace inversion produced a non-negligible imaginary residue."""


class SingularDenominatorError(ZeroDivisionError):
    """Montroll-Weiss denominator |1 - phi*w| below the singularity threshold."""


class TailBudgetError(RuntimeError):
    """pmf tail truncation would exceed the hard n_max cap."""


class PathBudgetError(RuntimeError):
    """A simulated path generated more events than the hard cap."""


class GridTooCoarseError(ValueError):
    """Time grid has too few nodes for the requested scheme."""


class HorizonMismatchError(ValueError):
    """Ensemble paths do not cover the requested observation time."""


class EmptyEnsembleError(ValueError):
    """No paths supplied where at least one is required."""


class InsufficientDataError(ValueError):
    """Too few usable bins/observations for the requested statistic."""

"""Fractional Poisson process numerics.

Counting probabilities by three independent routes (derivative series,
subordination integral, numerical Laplace inversion), the special functions
behind them, fractional-calculus residual checks, and seeded Monte Carlo
realizing the time-change theorem.
"""

__version__ = "0.1.0"

from . import errors, fraccalc, laplace, montecarlo, process, specfun  # noqa: F401

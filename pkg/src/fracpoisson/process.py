"""Analytic layer of the fractional Poisson process.

Survival/waiting-time functions, counting probabilities p_n(t) by two
independent routes (derivative series and subordination integral, with the
Laplace-inversion route exercised in the tests), renewal function, probability
generating function, and renewal-equation residuals.

The fractional order beta lives in (0, 1]; beta = 1 is the standard Poisson
process and every operation must collapse to its closed forms there.  A rate
lambda extends the paper's unit-rate convention by the time rescaling
Psi(t) = E_beta(-lambda t^beta), the unique rescaling consistent with beta=1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from ._quad import laguerre_rule, tanh_sinh
from .errors import QuadratureError, TailBudgetError
from .specfun import DEFAULT_CONTROL, SeriesControl

_NMAX_CAP = 10_000


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class FppParams:
    """Fractional order beta in (0,1] and rate lambda > 0 (default 1)."""

    beta: float
    rate: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.beta) and 0.0 < self.beta <= 1.0):
            raise ValueError(f"beta must lie in (0, 1], got {self.beta!r}")
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise ValueError(f"rate must be > 0, got {self.rate!r}")


@dataclass(frozen=True)
class RenewalTriple:
    """Survival Psi(t), failure Phi(t) = 1 - Psi(t), waiting density phi(t).

    density is +inf at t=0 for beta < 1: the t^{beta-1} singularity is
    integrable and flagged by the sentinel, not by an exception.
    """

    survival: float
    failure: float
    density: float

    def __post_init__(self):
        if not -1e-12 <= self.survival <= 1.0 + 1e-12:
            raise ValueError(f"survival {self.survival} outside [0, 1]")
        if abs(self.survival + self.failure - 1.0) > 1e-12:
            raise ValueError("survival + failure must equal 1")
        if not (self.density >= 0.0 or math.isinf(self.density)):
            raise ValueError(f"density must be >= 0, got {self.density}")


@dataclass(frozen=True)
class CountingPmf:
    """p_0..p_{n_max}(t) with explicit tail-mass bookkeeping."""

    t: float
    n_max: int
    probs: np.ndarray
    tail_mass: float

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", p)
        if len(p) != self.n_max + 1:
            raise ValueError("probs must have n_max + 1 entries")
        if np.any(p < -1e-12) or np.any(p > 1.0 + 1e-12):
            raise ValueError("probabilities outside [0, 1]")
        if self.tail_mass < -1e-12:
            raise ValueError("tail_mass must be >= 0")
        if abs(float(np.sum(p)) + self.tail_mass - 1.0) > 1e-10:
            raise ValueError("sum(probs) + tail_mass must equal 1 within 1e-10")

    def mean(self) -> float:
        return float(np.dot(np.arange(self.n_max + 1), self.probs))


# ---------------------------------------------------------------------------
# survival / waiting time


def renewal_triple(params: FppParams, t: float,
                   ctl: SeriesControl = DEFAULT_CONTROL) -> RenewalTriple:
    """Psi(t) = E_beta(-lambda t^beta), Phi = 1 - Psi,
    phi(t) = lambda beta t^{beta-1} E'_beta(-lambda t^beta)."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    b, lam = params.beta, params.rate
    if t == 0.0:
        density = lam if b == 1.0 else math.inf
        return RenewalTriple(survival=1.0, failure=0.0, density=density)
    z = -lam * t ** b
    surv = specfun.mittag_leffler(b, z, ctl)
    dens = lam * b * t ** (b - 1.0) * specfun.mittag_leffler_deriv(b, z, 1, ctl)
    return RenewalTriple(survival=surv, failure=1.0 - surv, density=max(dens, 0.0))


def mean_waiting_time(params: FppParams) -> float:
    """1/rate for beta = 1; +inf for beta < 1 (heavy-tailed waiting times)."""
    return 1.0 / params.rate if params.beta == 1.0 else math.inf


def survival_tail_ratio(params: FppParams, t: float,
                        ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Psi(t) divided by its algebraic tail sin(beta pi) Gamma(beta)/(pi lambda t^beta).

    Tends to 1 as t -> inf; rejects beta = 1 where the tail formula degenerates
    (sin(pi) = 0, the survival is exponential instead).
    """
    b, lam = params.beta, params.rate
    if b == 1.0:
        raise ValueError("survival_tail_ratio is undefined for beta = 1")
    if not t > 0.0:
        raise ValueError("t must be > 0")
    surv = specfun.mittag_leffler(b, -lam * t ** b, ctl)
    tail = math.sin(b * math.pi) * math.gamma(b) / (math.pi * lam * t ** b)
    return surv / tail


# ---------------------------------------------------------------------------
# counting probabilities: derivative-series and subordination routes


def _pmf_series(params: FppParams, t: float, n: int, ctl: SeriesControl) -> float:
    b, lam = params.beta, params.rate
    z = -lam * t ** b
    log_pref = n * (math.log(lam) + b * math.log(t)) - math.lgamma(n + 1)
    deriv = specfun.mittag_leffler_deriv(b, z, n, ctl)
    if deriv <= 0.0:
        return 0.0
    val = math.exp(log_pref + math.log(deriv))
    return min(max(val, 0.0), 1.0)


def pmf_subord(params: FppParams, t: float, n: int, quad_nodes: int = 128,
               ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """p_n(t) by the subordination integral
    (1/n!) int_0^inf u^n e^{-u} tau^{-beta} M_beta(u tau^{-beta}) du,
    tau = lambda^{1/beta} t, evaluated on Gauss-Laguerre nodes.

    beta = 1 degenerates to the Poisson pmf (the subordinator density becomes
    a delta at u = t) and is handled analytically.
    """
    if not t > 0.0:
        raise ValueError("t must be > 0")
    if n < 0:
        raise ValueError("n must be >= 0")
    b, lam = params.beta, params.rate
    if b == 1.0:
        return math.exp(-lam * t + n * math.log(lam * t) - math.lgamma(n + 1)) \
            if t > 0 else (1.0 if n == 0 else 0.0)
    # the integrand u^n e^{-u} peaks near u ~ n: the rule must reach past it
    if quad_nodes < 2 * n + 32:
        raise QuadratureError(
            f"quad_nodes={quad_nodes} insufficient for n={n}; "
            f"need >= {2 * n + 32} to cover the integrand peak")
    tau_mb = lam * t ** b  # tau^{beta} with tau = lambda^{1/beta} t
    x, w = laguerre_rule(quad_nodes)
    mctl = SeriesControl(abs_tol=max(ctl.abs_tol, 1e-13), max_terms=max(ctl.max_terms, 800),
                         crossover_z=ctl.crossover_z)
    marg = x / tau_mb
    mvals = np.empty_like(marg)
    for i, xm in enumerate(marg):
        try:
            mvals[i] = specfun._m_wright_scalar(b, float(xm), mctl)
        except Exception:
            mvals[i] = specfun.m_wright_tail(b, float(xm))
    if n == 0:
        logs = np.zeros_like(x)
    else:
        logs = n * np.log(x)
    vals = np.exp(logs - math.lgamma(n + 1)) * mvals / tau_mb
    total = float(np.dot(w, vals))
    return min(max(total, 0.0), 1.0)


def pmf(params: FppParams, t: float, n: int,
        ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """p_n(t) = (lambda^n t^{n beta}/n!) E_beta^{(n)}(-lambda t^beta).

    Route policy: derivative series up to n = 40, subordination quadrature
    beyond; in the overlap window [30, 40] both routes run and must agree.
    OverflowError from the derivative series propagates so callers can fall
    back to pmf_subord explicitly.
    """
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if n < 0 or int(n) != n:
        raise ValueError("n must be a non-negative integer")
    n = int(n)
    if t == 0.0:
        return 1.0 if n == 0 else 0.0
    if params.beta == 1.0:
        lam = params.rate
        return math.exp(-lam * t + n * math.log(lam * t) - math.lgamma(n + 1))
    if n <= 30:
        return _pmf_series(params, t, n, ctl)
    if n <= 40:
        series_val = _pmf_series(params, t, n, ctl)
        quad_val = pmf_subord(params, t, n, quad_nodes=2 * n + 64, ctl=ctl)
        if abs(series_val - quad_val) > 1e-6:
            raise ArithmeticError(
                f"series/subordination routes disagree at n={n}, t={t}: "
                f"{series_val} vs {quad_val}")
        return series_val
    return pmf_subord(params, t, n, quad_nodes=2 * n + 64, ctl=ctl)


def pmf_on_grid(params: FppParams, t_grid, n: int,
                ctl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
    """Vectorized p_n over a time grid (series route; grid arguments are the
    hot path of the fractional-Kolmogorov residual checks)."""
    b, lam = params.beta, params.rate
    t = np.asarray(t_grid, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("grid times must be >= 0")
    z = -lam * np.power(t, b, where=t > 0, out=np.zeros_like(t))
    deriv = specfun.ml_deriv_grid(b, n, z, ctl)
    out = np.zeros_like(t)
    pos = t > 0
    if n == 0:
        out[pos] = deriv[pos]
        out[~pos] = 1.0
    else:
        with np.errstate(divide="ignore"):
            logs = n * (math.log(lam) + b * np.log(t, where=pos, out=np.zeros_like(t)))
        out[pos] = np.exp(logs[pos] - math.lgamma(n + 1)) * deriv[pos]
        out[~pos] = 0.0
    return np.clip(out, 0.0, 1.0)


def pmf_vector(params: FppParams, t: float, eps_tail: float = 1e-10,
               ctl: SeriesControl = DEFAULT_CONTROL) -> CountingPmf:
    """p_0..p_{n_max}(t) with n_max chosen so the tail mass drops below eps_tail."""
    if eps_tail <= 0.0:
        raise ValueError("eps_tail must be > 0")
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return CountingPmf(t=0.0, n_max=0, probs=np.array([1.0]), tail_mass=0.0)
    probs = []
    cum = 0.0
    n = 0
    while True:
        try:
            p = pmf(params, t, n, ctl)
        except OverflowError:
            p = pmf_subord(params, t, n, quad_nodes=2 * n + 64, ctl=ctl)
        probs.append(p)
        cum += p
        if 1.0 - cum < eps_tail:
            break
        n += 1
        if n > _NMAX_CAP:
            raise TailBudgetError(
                f"tail budget {eps_tail} needs n_max > {_NMAX_CAP} at t={t}")
    return CountingPmf(t=t, n_max=n, probs=np.array(probs),
                       tail_mass=max(1.0 - cum, 0.0))


# ---------------------------------------------------------------------------
# renewal function and equation


def renewal_function(params: FppParams, t: float) -> float:
    """m(t) = lambda t^beta / Gamma(1+beta); lambda t for beta = 1."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    b, lam = params.beta, params.rate
    if b == 1.0:
        return lam * t
    return lam * t ** b / math.gamma(1.0 + b)


def renewal_equation_residual(params: FppParams, t: float,
                              quad_tol: float = 1e-9,
                              ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """|m(t) - int_0^t [1 + m(t-u)] phi(u) du|.

    The integrand carries the u^{beta-1} singularity at the origin; tanh-sinh
    absorbs it.  Near-zero residuals validate the closed form against the
    renewal equation.
    """
    if not t > 0.0:
        raise ValueError("t must be > 0")
    b, lam = params.beta, params.rate

    def integrand(u):
        u = np.asarray(u, dtype=float)
        z = -lam * u ** b
        deriv = specfun.ml_deriv_grid(b, 1, z, ctl)
        phi = lam * b * u ** (b - 1.0) * deriv
        return (1.0 + _m_vec(params, t - u)) * phi

    val, _ = tanh_sinh(integrand, 0.0, t, tol=quad_tol)
    return abs(renewal_function(params, t) - float(np.real(val)))


def _m_vec(params: FppParams, t):
    t = np.asarray(t, dtype=float)
    b, lam = params.beta, params.rate
    if b == 1.0:
        return lam * t
    return lam * np.power(np.maximum(t, 0.0), b) / math.gamma(1.0 + b)


# ---------------------------------------------------------------------------
# probability generating function (Laplace in the counting direction)


def ll_pgf(params: FppParams, kappa: float, t: float,
           ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """E_beta(-lambda (1 - e^{-kappa}) t^beta) = sum_n p_n(t) e^{-n kappa}."""
    if kappa < 0.0:
        raise ValueError("kappa must be >= 0")
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if t == 0.0 or kappa == 0.0:
        return 1.0
    b, lam = params.beta, params.rate
    z = -lam * (1.0 - math.exp(-kappa)) * t ** b
    return specfun.mittag_leffler(b, z, ctl)

"""Mittag-Leffler, Wright and M-Wright functions, and the one-sided stable density.

Evaluation strategy for the entire-function series (all routes share it):

1. float64 Taylor/power series with Kahan-compensated summation and a running
   peak-term monitor.  The achievable absolute accuracy of a cancelling series
   in double precision is ~4*eps*peak, so the result is accepted only when that
   estimate meets the requested tolerance.
2. For E_alpha on the far negative axis, the complete algebraic asymptotic
   series -sum_k z^{-k}/Gamma(1 - alpha k), truncated at the smallest term.
   The truncation bound is the first omitted term plus, for alpha > 2/3, an
   estimate of the exponentially small contribution exp(x^{1/alpha} cos(pi/alpha))
   that the algebraic series cannot see.
3. An arbitrary-precision escalation of the same series (mpmath) with the
   working precision sized from the predicted peak-term exponent.  This covers
   the mid-zone where double precision cancels catastrophically but the
   asymptotic regime has not been reached.

All functions are pure; no shared mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.special import rgamma

from .errors import InvalidOrderError, NonConvergenceError

_EPS = 2.2204460492503131e-16
# float64 series error model: ~4 ulp per term, peak term dominates
_CANCEL_MARGIN = 4.0
# a term this far (in natural log) below the running peak ends the sum;
# the truncated remainder is then far below the rounding floor
_STOP_LOG = 42.0
_MAX_DPS = 1000


# ---------------------------------------------------------------------------
# parameter records


@dataclass(frozen=True)
class MlOrder:
    """Mittag-Leffler index alpha > 0 (the process uses alpha = beta in (0,1])."""

    alpha: float

    def __post_init__(self):
        if not (isinstance(self.alpha, (int, float)) and math.isfinite(self.alpha)
                and self.alpha > 0.0):
            raise InvalidOrderError(f"alpha must be a finite positive real, got {self.alpha!r}")


@dataclass(frozen=True)
class WrightParams:
    """Wright function parameters: lam > -1, mu real.

    First kind for lam >= 0, second kind for -1 < lam < 0.
    """

    lam: float
    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > -1.0):
            raise InvalidOrderError(f"lam must be > -1, got {self.lam!r}")
        if not math.isfinite(self.mu):
            raise InvalidOrderError(f"mu must be a finite real, got {self.mu!r}")

    @property
    def kind(self) -> str:
        return "first" if self.lam >= 0.0 else "second"


@dataclass(frozen=True)
class SeriesControl:
    """Accuracy/budget knobs for the series evaluators."""

    abs_tol: float = 1e-14
    max_terms: int = 500
    crossover_z: float = 5.0

    def __post_init__(self):
        if not self.abs_tol > 0.0:
            raise ValueError("abs_tol must be > 0")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not self.crossover_z > 0.0:
            raise ValueError("crossover_z must be > 0")


DEFAULT_CONTROL = SeriesControl()


def _alpha_of(order) -> float:
    if isinstance(order, MlOrder):
        return order.alpha
    return MlOrder(float(order)).alpha


# ---------------------------------------------------------------------------
# float64 series engines


def _ml_deriv_series_f64(alpha: float, n: int, z: float, max_terms: int):
    """Kahan-summed series for E_alpha^{(n)}(z).

    Returns (value, peak_log, converged, overflowed).  peak_log is the natural
    log of the largest |term| seen; the absolute error of the float64 result is
    ~_CANCEL_MARGIN * eps * exp(peak_log).
    """
    total = 0.0
    comp = 0.0
    peak_log = -math.inf
    lnz = math.log(abs(z)) if z != 0.0 else -math.inf
    neg = z < 0.0
    for k in range(max_terms):
        if k > 0 and z == 0.0:
            return total, peak_log, True, False
        lt = (math.lgamma(k + n + 1) - math.lgamma(k + 1)
              - math.lgamma(alpha * (k + n) + 1))
        if k > 0:
            lt += k * lnz
        if lt > 705.0:
            return math.nan, max(peak_log, lt), False, True
        term = math.exp(lt)
        if neg and (k & 1):
            term = -term
        peak_log = max(peak_log, lt)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if k > 2 and lt < peak_log - _STOP_LOG:
            return total, peak_log, True, False
    return total, peak_log, False, False


def _wright_series_f64(lam: float, mu: float, z: float, max_terms: int):
    """Kahan-summed series for W_{lam,mu}(z); Gamma poles contribute 0 terms.

    Returns (value, peak_log, converged).
    """
    total = 0.0
    comp = 0.0
    peak_log = -math.inf
    lnz = math.log(abs(z)) if z != 0.0 else -math.inf
    neg = z < 0.0
    for k in range(max_terms):
        if k > 0 and z == 0.0:
            return total, peak_log, True
        rg = float(rgamma(lam * k + mu))
        if rg == 0.0:
            continue
        lt = k * lnz - math.lgamma(k + 1) + math.log(abs(rg)) if k > 0 else math.log(abs(rg))
        if lt > 705.0:
            return math.nan, max(peak_log, lt), False
        term = math.exp(lt)
        if rg < 0.0:
            term = -term
        if neg and (k & 1):
            term = -term
        peak_log = max(peak_log, lt)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if k > 2 and lt < peak_log - _STOP_LOG:
            return total, peak_log, True
    return total, peak_log, False


def _series_abs_err(peak_log: float) -> float:
    if peak_log == -math.inf:
        return 0.0
    if peak_log > 700.0:
        return math.inf
    return _CANCEL_MARGIN * _EPS * math.exp(peak_log)


# ---------------------------------------------------------------------------
# asymptotic route for E_alpha on the negative axis


def _ml_asymptotic_neg(alpha: float, z: float, max_terms: int):
    """Algebraic expansion E_alpha(z) ~ -sum_{k>=1} z^{-k}/Gamma(1-alpha k), z < 0.

    Optimal truncation: stop before the first term that grows again.  Returns
    (value, bound); the bound is the first omitted term plus, for alpha > 2/3,
    the exponentially small contribution the algebraic series cannot capture.
    """
    x = -z
    lnx = math.log(x)
    total = 0.0
    comp = 0.0
    prev = math.inf
    omitted = math.inf
    for k in range(1, max_terms + 1):
        rg = float(rgamma(1.0 - alpha * k))
        lt = -k * lnx
        t = 0.0 if rg == 0.0 else -math.exp(lt) * ((-1.0) ** k) * rg
        a = abs(t)
        if a > 0.0:
            if a >= prev:
                omitted = a
                break
            prev = a
        y = t - comp
        s = total + y
        comp = (s - total) - y
        total = s
    else:
        omitted = prev
    bound = omitted if math.isfinite(omitted) else math.inf
    if alpha > 2.0 / 3.0:
        expo = math.cos(math.pi / alpha) * math.exp(min(lnx / alpha, 700.0))
        bound += (2.0 / alpha) * (math.exp(expo) if expo < 700.0 else math.inf)
    return total, bound


# ---------------------------------------------------------------------------
# arbitrary-precision escalation


def _needed_dps(peak_log: float) -> int:
    return max(30, int(peak_log / math.log(10.0)) + 25)


def _ml_deriv_series_mp(alpha: float, n: int, z: float, max_terms: int,
                        peak_log: float) -> float:
    dps = _needed_dps(peak_log)
    if dps > _MAX_DPS:
        raise NonConvergenceError(
            f"series needs ~{dps} digits (> {_MAX_DPS}) for alpha={alpha}, z={z}")
    with mp.workdps(dps):
        a = mp.mpf(alpha)
        zz = mp.mpf(z)
        total = mp.mpf(0)
        peak = mp.mpf(0)
        zk = mp.mpf(1)
        stop = mp.mpf(10) ** (-dps + 8)
        for k in range(max_terms):
            term = mp.gamma(k + n + 1) / (mp.gamma(k + 1) * mp.gamma(a * (k + n) + 1)) * zk
            total += term
            at = abs(term)
            peak = max(peak, at)
            if k > 2 and at < stop * max(peak, mp.mpf(1)):
                return float(total)
            zk *= zz
        raise NonConvergenceError(
            f"mp series did not converge in {max_terms} terms (alpha={alpha}, z={z}, n={n})")


def _wright_series_mp(lam: float, mu: float, z: float, max_terms: int,
                      peak_log: float) -> float:
    dps = _needed_dps(peak_log)
    if dps > _MAX_DPS:
        raise NonConvergenceError(
            f"series needs ~{dps} digits (> {_MAX_DPS}) for lam={lam}, mu={mu}, z={z}")
    with mp.workdps(dps):
        lm = mp.mpf(lam)
        muu = mp.mpf(mu)
        zz = mp.mpf(z)
        total = mp.mpf(0)
        peak = mp.mpf(0)
        zk = mp.mpf(1)
        stop = mp.mpf(10) ** (-dps + 8)
        for k in range(max_terms):
            g = lm * k + muu
            if mp.isint(g) and g <= 0:
                term = mp.mpf(0)
            else:
                term = zk / (mp.gamma(k + 1) * mp.gamma(g))
            total += term
            at = abs(term)
            peak = max(peak, at)
            if k > 2 and at != 0 and at < stop * max(peak, mp.mpf(1)):
                return float(total)
            zk *= zz
        raise NonConvergenceError(
            f"mp Wright series did not converge in {max_terms} terms "
            f"(lam={lam}, mu={mu}, z={z})")


# ---------------------------------------------------------------------------
# public scalar evaluators


def mittag_leffler(order, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """E_alpha(z) for real z, absolute accuracy ctl.abs_tol.

    Negative z is the hot path (survival probabilities).  E_1(z) = exp(z),
    and 0 < E_alpha(z) <= 1 for alpha in (0,1], z <= 0.
    """
    alpha = _alpha_of(order)
    z = float(z)
    if z == 0.0:
        return 1.0
    tol = ctl.abs_tol

    if z > 0.0:
        # all terms positive: no cancellation, error purely relative
        val, peak_log, converged, overflowed = _ml_deriv_series_f64(
            alpha, 0, z, ctl.max_terms)
        if overflowed:
            raise OverflowError(f"E_{alpha}({z}) exceeds the float64 range")
        if converged:
            return val
        raise NonConvergenceError(
            f"series for E_{alpha}({z}) needs more than {ctl.max_terms} terms")

    far = -z > ctl.crossover_z
    if far:
        val, bound = _ml_asymptotic_neg(alpha, z, ctl.max_terms)
        if bound <= tol:
            return val
    val, peak_log, converged, overflowed = _ml_deriv_series_f64(
        alpha, 0, z, ctl.max_terms)
    if converged and not overflowed and _series_abs_err(peak_log) <= tol:
        return val
    if not far:
        aval, bound = _ml_asymptotic_neg(alpha, z, ctl.max_terms)
        if bound <= tol:
            return aval
    if peak_log > -math.inf:
        return _ml_deriv_series_mp(alpha, 0, z, ctl.max_terms, peak_log)
    raise NonConvergenceError(
        f"no route reached {tol} for E_{alpha}({z}) within {ctl.max_terms} terms")


def mittag_leffler_deriv(order, z: float, n: int,
                         ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """n-th derivative E_alpha^{(n)}(z) = sum_k (k+n)!/k! z^k / Gamma(alpha(k+n)+1).

    Accuracy target is abs_tol scaled by max(1, |result|) -- the derivative
    grows factorially in n while its downstream consumer (the counting pmf)
    divides that growth back out.  Raises OverflowError when the factorial-ratio
    terms leave the float64 range; the counting layer then switches to the
    subordination-integral route.
    """
    alpha = _alpha_of(order)
    if n < 0 or int(n) != n:
        raise ValueError(f"derivative order must be a non-negative integer, got {n!r}")
    n = int(n)
    if n == 0:
        return mittag_leffler(order, z, ctl)
    z = float(z)
    tol = ctl.abs_tol
    val, peak_log, converged, overflowed = _ml_deriv_series_f64(
        alpha, n, z, ctl.max_terms)
    if overflowed:
        raise OverflowError(
            f"E_{alpha}^({n})({z}): factorial-ratio terms exceed the float64 range")
    if converged and _series_abs_err(peak_log) <= tol * max(1.0, abs(val)):
        return val
    if converged:
        return _ml_deriv_series_mp(alpha, n, z, ctl.max_terms, peak_log)
    raise NonConvergenceError(
        f"series for E_{alpha}^({n})({z}) needs more than {ctl.max_terms} terms")


def wright(params: WrightParams, z: float,
           ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """W_{lam,mu}(z) = sum_n z^n/(n! Gamma(lam n + mu)).

    Terms hitting a Gamma pole contribute 0 (reciprocal-gamma convention);
    only genuine non-convergence raises.
    """
    if not isinstance(params, WrightParams):
        raise TypeError("params must be a WrightParams instance")
    z = float(z)
    tol = ctl.abs_tol
    val, peak_log, converged = _wright_series_f64(params.lam, params.mu, z,
                                                  ctl.max_terms)
    if converged and _series_abs_err(peak_log) <= tol * max(1.0, abs(val)):
        return val
    if converged or peak_log > -math.inf:
        return _wright_series_mp(params.lam, params.mu, z, ctl.max_terms, peak_log)
    raise NonConvergenceError(
        f"Wright series (lam={params.lam}, mu={params.mu}, z={z}) "
        f"did not converge in {ctl.max_terms} terms")


# ---------------------------------------------------------------------------
# M-Wright function and the one-sided stable density


def _m_wright_tail_log(nu: float, x: float) -> float:
    """log of the saddle-point approximation of M_nu(x) (valid for large x)."""
    t = nu * x
    if t <= 0.0:
        return math.inf
    one_m = 1.0 - nu
    lt = math.log(t)
    return (-0.5 * math.log(2.0 * math.pi * one_m)
            + (nu - 0.5) / one_m * lt
            - (one_m / nu) * math.exp(lt / one_m))


def m_wright_tail(nu: float, x: float) -> float:
    """Saddle-point approximation a(nu) t^{(nu-1/2)/(1-nu)} exp(-b(nu) t^{1/(1-nu)})
    of M_nu(x), with t = nu x, a = 1/sqrt(2 pi (1-nu)), b = (1-nu)/nu.

    Meaningless for small x by contract; exact for nu = 1/2.
    """
    if not 0.0 < nu < 1.0:
        raise InvalidOrderError(f"nu must lie in (0,1), got {nu!r}")
    lg = _m_wright_tail_log(nu, float(x))
    if lg == math.inf:
        return math.inf
    return math.exp(lg) if lg > -745.0 else 0.0


def _m_wright_scalar(nu: float, x: float, ctl: SeriesControl) -> float:
    if x == 0.0:
        return float(rgamma(1.0 - nu))
    tol = ctl.abs_tol
    val, peak_log, converged = _wright_series_f64(-nu, 1.0 - nu, -x, ctl.max_terms)
    if converged and _series_abs_err(peak_log) <= tol:
        return max(val, 0.0)
    # once the true value sits far below tolerance the saddle tail is
    # absolutely accurate no matter how poor its relative error
    tail_log = _m_wright_tail_log(nu, x)
    if tail_log < math.log(tol) - math.log(100.0):
        return math.exp(tail_log) if tail_log > -745.0 else 0.0
    if converged or peak_log > -math.inf:
        try:
            return max(_wright_series_mp(-nu, 1.0 - nu, -x, ctl.max_terms, peak_log), 0.0)
        except NonConvergenceError:
            pass
    raise NonConvergenceError(
        f"M_{nu}({x}) out of series reach at tolerance {tol}; "
        f"use m_wright_tail for the asymptotic regime")


def m_wright(nu: float, x, ctl: SeriesControl = DEFAULT_CONTROL):
    """M_nu(x) = W_{-nu,1-nu}(-x), a probability density on [0, inf).

    Accepts a scalar or ndarray x >= 0.  M_{1/2}(x) = exp(-x^2/4)/sqrt(pi),
    and the integral of M_nu over [0, inf) is 1.
    """
    if not 0.0 < nu < 1.0:
        raise InvalidOrderError(f"nu must lie in (0,1), got {nu!r}")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("x must be >= 0")
    if arr.ndim == 0:
        return _m_wright_scalar(nu, float(arr), ctl)
    out = np.empty(arr.size, dtype=float)
    for i, xi in enumerate(arr.ravel()):
        out[i] = _m_wright_scalar(nu, float(xi), ctl)
    return out.reshape(arr.shape)


def stable_density(beta: float, t, ctl: SeriesControl = DEFAULT_CONTROL):
    """Extremal one-sided stable density L_beta^{-beta}(t), Laplace transform e^{-s^beta}.

    Realized as (beta/t^{beta+1}) M_beta(t^{-beta}); scalar or ndarray t > 0.
    """
    if not 0.0 < beta < 1.0:
        raise InvalidOrderError(f"beta must lie in (0,1), got {beta!r}")
    arr = np.asarray(t, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError("t must be > 0")
    scalar = arr.ndim == 0
    flat = np.atleast_1d(arr).ravel()
    out = np.empty(flat.shape, dtype=float)
    for i, ti in enumerate(flat):
        x = ti ** (-beta)
        m = _m_wright_scalar(beta, x, ctl)
        if m == 0.0:
            out[i] = 0.0
        else:
            out[i] = beta * math.exp(math.log(m) - (beta + 1.0) * math.log(ti))
    return float(out[0]) if scalar else out.reshape(arr.shape)


# ---------------------------------------------------------------------------
# grid evaluator used by the process and fractional-calculus layers


def ml_deriv_grid(order, n: int, z, ctl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
    """Vectorized E_alpha^{(n)} over an array of arguments.

    Fast float64 path with a collective cancellation guard; elements whose
    series cannot meet ctl.abs_tol are recomputed through the scalar
    escalation path.
    """
    alpha = _alpha_of(order)
    n = int(n)
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    if flat.size == 0:
        return np.empty(z.shape)
    out = np.zeros(flat.shape)
    comp = np.zeros(flat.shape)
    peak = np.zeros(flat.shape)
    zk = np.ones(flat.shape)
    converged = False
    for k in range(ctl.max_terms):
        lc = (math.lgamma(k + n + 1) - math.lgamma(k + 1)
              - math.lgamma(alpha * (k + n) + 1))
        if lc > 700.0 or np.max(np.abs(zk)) > 1e250:
            break
        term = math.exp(lc) * zk
        np.maximum(peak, np.abs(term), out=peak)
        y = term - comp
        t = out + y
        comp = (t - out) - y
        out = t
        if k > 2 and np.max(np.abs(term)) < 1e-19 * max(1.0, float(peak.max())):
            converged = True
            break
        zk = zk * flat
    est = _CANCEL_MARGIN * _EPS * peak
    if not converged:
        est = np.full(flat.shape, math.inf)
    tol = ctl.abs_tol * np.maximum(1.0, np.abs(out)) if n > 0 else ctl.abs_tol
    bad = np.flatnonzero(est > tol)
    order_obj = MlOrder(alpha)
    for i in bad:
        out[i] = mittag_leffler_deriv(order_obj, float(flat[i]), n, ctl) if n > 0 \
            else mittag_leffler(order_obj, float(flat[i]), ctl)
    return out.reshape(z.shape)

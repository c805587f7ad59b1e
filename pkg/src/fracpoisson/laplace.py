"""Forward Laplace transforms, numerical inversion, and the Laplace-Laplace
Montroll-Weiss formulas of the counting process.

Inversion runs on the fixed Talbot contour (principal branch of s^beta, the
contour wraps the negative real axis without crossing it) with Gaver-Stehfest
as an advisory real-axis cross-check.  Images that blow up off the positive
real axis (e.g. E_nu(-s), which grows like e^{s^2} in the left plane for
nu = 1/2) cannot ride the Talbot contour; such pairs carry a high-precision
real-axis inversion route instead.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np

from ._quad import laguerre_halfline, tanh_sinh
from .errors import (ContourError, NonRealResultError, QuadratureError,
                     SingularDenominatorError)
from . import specfun

_SINGULAR_EPS = 1e-14


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class TransformPoint:
    """Evaluation point: s for the time direction, kappa for the counting one."""

    s: complex
    kappa: float = 0.0

    def __post_init__(self):
        if not complex(self.s).real > 0.0:
            raise ValueError(f"Re(s) must be > 0, got {self.s!r}")
        if not self.kappa >= 0.0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa!r}")


@dataclass(frozen=True)
class InversionConfig:
    talbot_nodes: int = 32
    stehfest_terms: int = 16
    agreement_tol: float = 1e-6

    def __post_init__(self):
        if self.talbot_nodes < 8:
            raise ValueError("talbot_nodes must be >= 8")
        if self.stehfest_terms < 8 or self.stehfest_terms % 2:
            raise ValueError("stehfest_terms must be even and >= 8")


DEFAULT_INVERSION = InversionConfig()


@dataclass(frozen=True)
class TransformPair:
    """A registered (time function, image function) pair.

    image_domain is "complex" when the image may be evaluated on an inversion
    contour, "real" when it is only safe on the positive real axis; real-only
    pairs may carry image_fn_hp, an mpmath-capable image for high-precision
    real-axis inversion.
    """

    name: str
    time_fn: object
    image_fn: object
    valid_t_range: tuple = (0.05, 20.0)
    image_domain: str = "complex"
    image_fn_hp: object = None


# ---------------------------------------------------------------------------
# forward transform


def _call_vec(f, t):
    t = np.asarray(t)
    try:
        v = np.asarray(f(t))
        if v.shape == t.shape:
            return v
    except (TypeError, ValueError):
        pass
    return np.array([f(float(x)) for x in t.ravel()]).reshape(t.shape)


def laplace_forward(f, s, quad_tol: float = 1e-10) -> complex:
    """int_0^inf e^{-st} f(t) dt by quadrature, absolute error <= quad_tol.

    Split at t=1: tanh-sinh on [0,1] (absorbs the t^{beta-1} origin
    singularity of the waiting-time densities), exp-weighted Gauss-Laguerre
    beyond.  Re(s) must be positive.
    """
    s = complex(s)
    if not s.real > 0.0:
        raise ValueError("laplace_forward requires Re(s) > 0")

    def head(t):
        tt = np.asarray(t)
        return np.exp(-s * tt) * np.asarray(_call_vec(f, tt))

    try:
        head_val, head_err = tanh_sinh(head, 0.0, 1.0, tol=quad_tol / 4.0)
    except QuadratureError as exc:
        raise QuadratureError(f"head integral failed: {exc}") from exc

    sigma = s.real
    omega = s.imag

    def tail_g(u):
        uu = np.asarray(u)
        return np.exp(-1j * omega * uu) * np.asarray(_call_vec(f, 1.0 + uu))

    t64 = laguerre_halfline(tail_g, sigma, n=64)
    t96 = laguerre_halfline(tail_g, sigma, n=96)
    damp = abs(cmath.exp(-s))
    tail_err = abs(t96 - t64) * damp
    tail_val = cmath.exp(-s) * t96
    if head_err + tail_err > quad_tol:
        raise QuadratureError(
            f"laplace_forward error estimate {head_err + tail_err:.2e} > {quad_tol}")
    return complex(head_val + tail_val)


# ---------------------------------------------------------------------------
# inversion: fixed Talbot and Gaver-Stehfest


def _talbot_nodes(t: float, m: int):
    r = 2.0 * m / 5.0
    theta = np.arange(m) * math.pi / m
    s = np.empty(m, dtype=complex)
    s[0] = r / t
    th = theta[1:]
    cot = 1.0 / np.tan(th)
    s[1:] = (r / t) * th * (cot + 1j)
    gamma = np.empty(m, dtype=complex)
    gamma[0] = 0.5 * math.exp(r)
    gamma[1:] = np.exp(s[1:] * t) * (1.0 + 1j * th * (1.0 + cot ** 2) - 1j * cot)
    return s, gamma


def invert_talbot(F, t: float, cfg: InversionConfig = DEFAULT_INVERSION) -> float:
    """f(t) from its image F by the fixed Talbot contour.

    F must be analytic to the right of (and on) the deformed contour and
    satisfy F(conj(s)) = conj(F(s)); s^beta is taken on the principal branch.
    """
    if not t > 0.0:
        raise ValueError("t must be > 0")
    s, gamma = _talbot_nodes(t, cfg.talbot_nodes)
    # conjugate-symmetry spot check: a violation signals a branch-cut problem
    probe = s[1] if len(s) > 1 else complex(1.0 / t, 1.0 / t)
    try:
        up = complex(F(probe))
        down = complex(F(probe.conjugate()))
    except Exception as exc:
        raise ContourError(f"image evaluation failed at {probe}: {exc}") from exc
    if abs(down - up.conjugate()) > 1e-10 * (1.0 + abs(up)):
        raise NonRealResultError(
            f"F(conj(s)) != conj(F(s)) at s={probe}: {down} vs {up.conjugate()}")
    try:
        vals = np.asarray([complex(F(si)) for si in s])
    except Exception as exc:
        raise ContourError(f"image evaluation failed on the contour: {exc}") from exc
    if not np.all(np.isfinite(vals.real)) or not np.all(np.isfinite(vals.imag)):
        raise ContourError("image returned a non-finite value on the contour")
    return float((2.0 / (5.0 * t)) * np.sum(gamma * vals).real)


@lru_cache(maxsize=8)
def _stehfest_weights(n: int):
    weights = []
    half = n // 2
    for k in range(1, n + 1):
        acc = 0.0
        for j in range((k + 1) // 2, min(k, half) + 1):
            acc += (j ** half * math.factorial(2 * j)
                    / (math.factorial(half - j) * math.factorial(j)
                       * math.factorial(j - 1) * math.factorial(k - j)
                       * math.factorial(2 * j - k)))
        weights.append((-1.0) ** (k + half) * acc)
    return tuple(weights)


def invert_stehfest(F, t: float, cfg: InversionConfig = DEFAULT_INVERSION) -> float:
    """Gaver-Stehfest estimate of f(t) from real-axis samples F(k ln2 / t).

    Loses accuracy on oscillatory or heavy-tailed time functions; used as a
    consistency vote against Talbot, never as the authority.
    """
    if not t > 0.0:
        raise ValueError("t must be > 0")
    w = _stehfest_weights(cfg.stehfest_terms)
    a = math.log(2.0) / t
    return a * math.fsum(w[k - 1] * float(F(k * a))
                         for k in range(1, cfg.stehfest_terms + 1))


def _invert_stehfest_hp(image_hp, t: float, degree: int = 24, dps: int = 60) -> float:
    """High-precision Gaver-Stehfest for images only evaluable on the real axis."""
    with mp.workdps(dps):
        return float(mp.invertlaplace(image_hp, mp.mpf(t), method="stehfest",
                                      degree=degree))


def _ml_neg_real_mp(nu: float, x) -> mp.mpf:
    """E_nu(-x) for real x >= 0, accurate at the ambient mpmath precision.

    Moderate x: series, summed at a locally raised precision sized from the
    peak term (the cancellation there dwarfs any fixed dps).  Large x (where
    the series peak would be astronomical): optimally truncated algebraic
    asymptotics, whose smallest term is then far below the ambient precision.
    Intended for nu <= 2/3 (the registered pair uses nu = 1/2).
    """
    xf = float(x)
    if xf < 0:
        raise ValueError("x must be >= 0")
    if xf == 0.0:
        return mp.mpf(1)
    ambient = mp.mp.dps
    if xf ** (1.0 / nu) <= 90.0:
        n_peak = max(10, int(xf ** (1.0 / nu) / nu) + 10)
        peak_log = max((k * math.log(xf) - math.lgamma(nu * k + 1)
                        for k in range(1, 4 * n_peak, max(1, n_peak // 64))),
                       default=0.0)
        work = max(ambient, int(peak_log / math.log(10)) + ambient + 10)
        with mp.workdps(work):
            nn = mp.mpf(nu)
            xx = mp.mpf(x)
            total = mp.mpf(0)
            peak = mp.mpf(0)
            zk = mp.mpf(1)
            stop = mp.mpf(10) ** (-work + 6)
            for k in range(8 * n_peak + 200):
                term = zk / mp.gamma(nn * k + 1)
                total += term
                peak = max(peak, abs(term))
                if k > 4 and abs(term) < stop * max(peak, mp.mpf(1)):
                    break
                zk *= -xx
            return +total
    # asymptotic: -sum_k z^{-k}/Gamma(1 - nu k) at z = -x, smallest-term stop
    nn = mp.mpf(nu)
    xx = mp.mpf(x)
    total = mp.mpf(0)
    prev = mp.inf
    for k in range(1, 20_000):
        g = 1 - nn * k
        if mp.isint(g) and g <= 0:
            continue
        term = -((-1) ** k) * xx ** (-k) / mp.gamma(g)
        if abs(term) >= prev:
            break
        prev = abs(term)
        total += term
    return total


# ---------------------------------------------------------------------------
# Laplace-Laplace formulas


def montroll_weiss_ll(phi_img, w_img, p: TransformPoint) -> complex:
    """Double-transform sojourn density (1-phi(s))/s * 1/(1 - phi(s) w(kappa))."""
    phi = complex(phi_img(p.s))
    w = complex(w_img(p.kappa))
    denom = 1.0 - phi * w
    if abs(denom) < _SINGULAR_EPS:
        raise SingularDenominatorError(
            f"|1 - phi*w| = {abs(denom):.2e} at s={p.s}, kappa={p.kappa}")
    return (1.0 - phi) / p.s / denom


def counting_ll(beta: float, p: TransformPoint) -> complex:
    """Closed form s^{beta-1}/(1 + s^beta - e^{-kappa}) of the counting process."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta!r}")
    s = complex(p.s)
    sb = s ** beta
    denom = 1.0 + sb - math.exp(-p.kappa)
    if abs(denom) < _SINGULAR_EPS:
        raise SingularDenominatorError(
            f"|1 + s^beta - e^-kappa| = {abs(denom):.2e} at s={s}, kappa={p.kappa}")
    return s ** (beta - 1.0) / denom


# ---------------------------------------------------------------------------
# pair verification


@dataclass(frozen=True)
class PairResidual:
    t: float
    time_value: float
    inverted_value: float
    abs_residual: float
    stehfest_value: float = math.nan
    stehfest_flag: bool = False


@dataclass
class PairReport:
    pair: str
    rows: list = field(default_factory=list)

    @property
    def max_abs_residual(self) -> float:
        return max((r.abs_residual for r in self.rows), default=math.nan)

    @property
    def flagged(self) -> list:
        return [r for r in self.rows if r.stehfest_flag]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["pair", "t", "time_value", "inverted_value", "abs_residual"])
            for r in self.rows:
                w.writerow([self.pair, repr(r.t), repr(r.time_value),
                            repr(r.inverted_value), repr(r.abs_residual)])


def verify_pair(pair: TransformPair, t_grid,
                cfg: InversionConfig = DEFAULT_INVERSION) -> PairReport:
    """Invert pair.image_fn on t_grid and compare against pair.time_fn.

    Complex-capable images go through Talbot with a float Stehfest agreement
    vote (disagreement beyond cfg.agreement_tol flags the point).  Real-only
    images are inverted by high-precision Gaver-Stehfest on the real axis.
    """
    report = PairReport(pair=pair.name)
    lo, hi = pair.valid_t_range
    for t in t_grid:
        t = float(t)
        if not lo <= t <= hi:
            raise ValueError(f"t={t} outside valid range {pair.valid_t_range} "
                             f"of pair {pair.name}")
        try:
            time_val = float(pair.time_fn(t))
        except Exception as exc:
            raise QuadratureError(f"time_fn of {pair.name} failed at t={t}: {exc}") from exc
        steh = math.nan
        flag = False
        if pair.image_domain == "complex":
            inv = invert_talbot(pair.image_fn, t, cfg)
        else:
            image_hp = pair.image_fn_hp if pair.image_fn_hp is not None else pair.image_fn
            inv = _invert_stehfest_hp(image_hp, t)
        try:
            steh = invert_stehfest(pair.image_fn, t, cfg)
            flag = abs(steh - inv) > cfg.agreement_tol
        except (OverflowError, ValueError):
            flag = True
        report.rows.append(PairResidual(
            t=t, time_value=time_val, inverted_value=inv,
            abs_residual=abs(inv - time_val), stehfest_value=steh,
            stehfest_flag=bool(flag)))
    return report


# ---------------------------------------------------------------------------
# registered pairs of the fractional Poisson process


def survival_pair(beta: float) -> TransformPair:
    """Psi_beta(t) = E_beta(-t^beta)  <->  s^{beta-1}/(1+s^beta)."""
    def time_fn(t):
        return specfun.mittag_leffler(beta, -(t ** beta))

    def image_fn(s):
        return s ** (beta - 1.0) / (1.0 + s ** beta)

    return TransformPair(name=f"survival(beta={beta})", time_fn=time_fn,
                         image_fn=image_fn, valid_t_range=(0.01, 50.0))


def density_pair(beta: float) -> TransformPair:
    """phi_beta(t) = beta t^{beta-1} E'_beta(-t^beta)  <->  1/(1+s^beta)."""
    def time_fn(t):
        return beta * t ** (beta - 1.0) * specfun.mittag_leffler_deriv(
            beta, -(t ** beta), 1)

    def image_fn(s):
        return 1.0 / (1.0 + s ** beta)

    return TransformPair(name=f"waiting-density(beta={beta})", time_fn=time_fn,
                         image_fn=image_fn, valid_t_range=(0.01, 50.0))


def m_wright_pair(nu: float) -> TransformPair:
    """M_nu(t)  <->  E_nu(-s).  The image is real-axis only: off the positive
    axis it grows super-exponentially, so Talbot cannot be used."""
    def time_fn(t):
        return specfun.m_wright(nu, t)

    def image_fn(s):
        return specfun.mittag_leffler(nu, -float(s))

    def image_hp(s):
        return _ml_neg_real_mp(nu, s)

    return TransformPair(name=f"m-wright(nu={nu})", time_fn=time_fn,
                         image_fn=image_fn, valid_t_range=(0.01, 6.0),
                         image_domain="real", image_fn_hp=image_hp)


def stretched_exp_pair(nu: float) -> TransformPair:
    """(nu/t^{nu+1}) M_nu(1/t^nu)  <->  e^{-s^nu} (one-sided stable density)."""
    def time_fn(t):
        return specfun.stable_density(nu, t)

    def image_fn(s):
        return np.exp(-(s ** nu))

    return TransformPair(name=f"stable-density(nu={nu})", time_fn=time_fn,
                         image_fn=image_fn, valid_t_range=(0.05, 50.0))


def default_pairs(betas=(0.5, 0.8), nus=(0.5,)) -> list:
    pairs = []
    for b in betas:
        pairs.append(survival_pair(b))
        pairs.append(density_pair(b))
    for nu in nus:
        pairs.append(m_wright_pair(nu))
        pairs.append(stretched_exp_pair(nu))
    return pairs

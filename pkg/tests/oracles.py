"""High-precision reference evaluators used to mint and defend golden values.

Everything here is deliberately slow and independent of the package's float64
code paths: plain mpmath series summation with adaptive working precision, a
spectral-integral route for the Mittag-Leffler function on the negative axis,
and mpmath quadrature for transforms.  Derived expected values in the test
modules were produced by these evaluators.
"""

import math

import mpmath as mp


def _series_budget(alpha, z):
    """Rough peak position / decay length of sum z^n/Gamma(alpha n + 1)."""
    if z == 0:
        return 10, 0.0
    x = abs(z)
    n_peak = max(10, int(x ** (1.0 / alpha) / alpha) + 10)
    peak_log = max(0.0, n_peak * math.log(x) - math.lgamma(alpha * n_peak + 1))
    return n_peak, peak_log


def ml_ref(alpha, z, n=0):
    """E_alpha^{(n)}(z) by mpmath series with adaptive precision and length."""
    n_peak, peak_log = _series_budget(alpha, z)
    dps = max(40, int(peak_log / math.log(10)) + 30)
    terms = 4 * n_peak + 200
    with mp.workdps(dps):
        a = mp.mpf(alpha)
        zz = mp.mpf(z)
        total = mp.mpf(0)
        zk = mp.mpf(1)
        peak = mp.mpf(0)
        stop = mp.mpf(10) ** (-dps + 8)
        for k in range(terms):
            term = mp.gamma(k + n + 1) / (mp.gamma(k + 1) * mp.gamma(a * (k + n) + 1)) * zk
            total += term
            peak = max(peak, abs(term))
            if k > 4 and abs(term) < stop * max(peak, mp.mpf(1)):
                break
            zk *= zz
        else:
            raise RuntimeError(f"oracle series not converged: alpha={alpha} z={z} n={n}")
        return float(total)


def ml_ref_spectral(alpha, x):
    """E_alpha(-x) for 0 < alpha < 1, x > 0, by the spectral representation

        E_alpha(-x) = int_0^inf e^{-r x} K(r) dr,
        K(r) = (1/pi) r^{alpha-1} sin(alpha pi) / (r^{2 alpha} + 2 r^alpha cos(alpha pi) + 1).

    Completely independent of any series summation.
    """
    assert 0 < alpha < 1 and x > 0
    with mp.workdps(40):
        a = mp.mpf(alpha)
        xx = mp.mpf(x)
        s = mp.sin(a * mp.pi)
        c = mp.cos(a * mp.pi)

        def kernel(r):
            ra = r ** a
            return mp.e ** (-r * xx) * r ** (a - 1) * s / (ra * ra + 2 * ra * c + 1) / mp.pi

        # generous splitting: the kernel has an r^{alpha-1} endpoint singularity
        # and only an algebraic tail until e^{-rx} takes over near r ~ 1/x
        pts = [0, mp.mpf(1) / 1000, 1, 10, 100, 1000, 10000, mp.inf]
        return float(mp.quad(kernel, pts))


def wright_ref(lam, mu, z):
    """W_{lam,mu}(z) by mpmath series; Gamma poles contribute zero."""
    # peak of |z|^n/(n! |Gamma(lam n + mu)|) is crude; oversize the precision
    x = abs(z)
    n_peak = max(20, int((x ** (1.0 / (1.0 + lam))) * 3) + 20)
    peak_log = 0.0
    for k in range(1, n_peak * 2, max(1, n_peak // 50)):
        g = lam * k + mu
        if g == int(g) and g <= 0:
            continue
        lt = k * math.log(x) - math.lgamma(k + 1) - math.lgamma(g) if g > 0 else \
            k * math.log(x) - math.lgamma(k + 1) + math.lgamma(1 - g) \
            + math.log(abs(math.sin(math.pi * g)) / math.pi + 1e-300)
        peak_log = max(peak_log, lt)
    dps = max(40, int(peak_log / math.log(10)) + 30)
    with mp.workdps(dps):
        lm = mp.mpf(lam)
        muu = mp.mpf(mu)
        zz = mp.mpf(z)
        total = mp.mpf(0)
        zk = mp.mpf(1)
        peak = mp.mpf(0)
        stop = mp.mpf(10) ** (-dps + 8)
        for k in range(8 * n_peak + 400):
            g = lm * k + muu
            if mp.isint(g) and g <= 0:
                term = mp.mpf(0)
            else:
                term = zk / (mp.gamma(k + 1) * mp.gamma(g))
            total += term
            at = abs(term)
            peak = max(peak, at)
            if k > 4 and at != 0 and at < stop * max(peak, mp.mpf(1)):
                break
            zk *= zz
        else:
            raise RuntimeError(f"oracle Wright series not converged: {lam},{mu},{z}")
        return float(total)


def m_wright_ref(nu, x):
    return wright_ref(-nu, 1.0 - nu, -x)


def stable_density_ref(beta, t):
    return beta * t ** (-(beta + 1.0)) * m_wright_ref(beta, t ** (-beta))


def poisson_pmf(t, n):
    with mp.workdps(40):
        return float(mp.e ** (-mp.mpf(t)) * mp.mpf(t) ** n / mp.gamma(n + 1))


def fpp_pmf_ref(beta, t, n):
    """p_n(t) = t^{n beta}/n! * E_beta^{(n)}(-t^beta), high precision."""
    if t == 0:
        return 1.0 if n == 0 else 0.0
    z = -(t ** beta)
    n_peak, peak_log = _series_budget(beta, z)
    dps = max(40, int(peak_log / math.log(10)) + 30)
    with mp.workdps(dps):
        b = mp.mpf(beta)
        tt = mp.mpf(t)
        zz = -(tt ** b)
        total = mp.mpf(0)
        zk = mp.mpf(1)
        peak = mp.mpf(0)
        stop = mp.mpf(10) ** (-dps + 8)
        for k in range(4 * n_peak + 400):
            term = mp.gamma(k + n + 1) / (mp.gamma(k + 1) * mp.gamma(b * (k + n) + 1)) * zk
            total += term
            peak = max(peak, abs(term))
            if k > 4 and abs(term) < stop * max(peak, mp.mpf(1)):
                break
            zk *= zz
        return float(tt ** (n * b) / mp.gamma(n + 1) * total)


def laplace_ref(f, s, upper=mp.inf, dps=30):
    """Forward Laplace transform of a python callable by mpmath quadrature."""
    with mp.workdps(dps):
        return complex(mp.quad(lambda t: mp.e ** (-mp.mpf(s) * t) * f(float(t)),
                               [0, 1, upper]))

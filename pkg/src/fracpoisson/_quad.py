"""Quadrature primitives shared by the transform and process layers.

tanh-sinh handles endpoint singularities like t^{beta-1} on finite intervals;
the half-line pieces ride on Gauss-Laguerre nodes.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_laguerre

from .errors import QuadratureError

_UMAX = 3.8  # (pi/2) sinh(3.8) ~ 35: endpoint distances reach ~1e-30


def _ts_nodes(level: int):
    """tanh-sinh offsets/weights at step h = 2^-level for u > 0 on (-1, 1).

    eps is the stably computed distance 1 - x to the endpoint; refinement
    levels return only the odd multiples of h.
    """
    h = 2.0 ** (-level)
    ks = np.arange(1, int(_UMAX / h) + 1)
    if level > 0:
        ks = ks[ks % 2 == 1]
    u = ks * h
    su = 0.5 * math.pi * np.sinh(u)
    e2 = np.exp(-2.0 * su)
    eps = 2.0 * e2 / (1.0 + e2)  # 1 - tanh(su)
    w = 0.5 * math.pi * np.cosh(u) / np.cosh(su) ** 2
    keep = eps > 0.0
    return eps[keep], w[keep]


def _eval_vec(f, x: np.ndarray) -> np.ndarray:
    v = np.asarray(f(x))
    if v.shape == x.shape:
        return v
    return np.array([f(float(xi)) for xi in x])


def tanh_sinh(f, a: float, b: float, tol: float = 1e-12, max_level: int = 11):
    """Integrate f over [a, b]; f may be complex-valued and endpoint-singular.

    Returns (value, err_estimate).  Raises QuadratureError when refinement
    stalls above tol.
    """
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    center = 0.5 * math.pi * _eval_vec(f, np.array([mid]))[0]
    acc = center  # h * sum of w_k f(x_k) over the current grid (h folded in)
    prev_val = None
    err = math.inf
    for level in range(max_level + 1):
        h = 2.0 ** (-level)
        eps, w = _ts_nodes(level)
        lo = _eval_vec(f, a + half * eps)
        hi = _eval_vec(f, b - half * eps)
        block = np.sum((lo + hi) * w)
        if level == 0:
            acc = center + block
        else:
            acc = 0.5 * acc + h * block
        val = acc * half
        if prev_val is not None and level >= 2:
            err = abs(val - prev_val)
            if err <= tol:
                return val, err
        prev_val = val
    if err <= 100.0 * tol:
        return prev_val, err
    raise QuadratureError(
        f"tanh-sinh did not reach tol={tol} on [{a}, {b}] (est err {err:.2e})")


@lru_cache(maxsize=32)
def laguerre_rule(n: int):
    x, w = roots_laguerre(n)
    return x, w


def laguerre_halfline(g, scale: float, n: int = 64):
    """sum_i w_i g(x_i/scale)/scale, approximating int_0^inf e^{-scale u} g(u) du."""
    x, w = laguerre_rule(n)
    vals = _eval_vec(g, x / scale)
    return np.sum(w * vals) / scale

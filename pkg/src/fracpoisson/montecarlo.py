"""Stochastic realization layer.

Samplers for the one-sided stable law (Kanter's representation), Mittag-Leffler
waiting times (product form E^{1/beta} S), and the inverse stable subordinator;
path simulation by the renewal route and by the parametric subordination route;
ensemble statistics and the two-sample equivalence test behind the
time-change theorem.

Reproducibility contract: a path is a pure function of (seed, stream_id); the
ensemble runner assigns stream_id = path index, so results are independent of
worker count and chunking.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .errors import (EmptyEnsembleError, HorizonMismatchError,
                     InsufficientDataError, PathBudgetError)

_PATH_CAP = 1_000_000
_BLOCK = 64
_SUB_BLOCK = 512


# ---------------------------------------------------------------------------
# rng streams


@dataclass(frozen=True)
class RngStream:
    """Deterministic, platform-independent stream: PCG64 keyed by (seed, stream_id)."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    raise TypeError("rng must be an RngStream or numpy Generator")


# ---------------------------------------------------------------------------
# path records


@dataclass(frozen=True)
class PathSample:
    """Ordered event times of one realized counting path on (0, horizon]."""

    beta: float
    horizon: float
    event_times: np.ndarray
    route: str

    def __post_init__(self):
        ev = np.asarray(self.event_times, dtype=float)
        object.__setattr__(self, "event_times", ev)
        if self.route not in ("renewal", "parametric"):
            raise ValueError(f"unknown route {self.route!r}")
        if ev.size:
            if not (ev[0] > 0.0 and ev[-1] <= self.horizon):
                raise ValueError("event times must lie in (0, horizon]")
            if ev.size > 1 and not np.all(np.diff(ev) > 0.0):
                raise ValueError("event times must be strictly increasing")

    def count_at(self, t: float) -> int:
        """N(t): right-continuous number of events in (0, t]."""
        return int(np.searchsorted(self.event_times, t, side="right"))


@dataclass(frozen=True)
class SubordinatorPath:
    """Leading process t(t_*) sampled on the operational grid k*dt_star."""

    beta: float
    dt_star: float
    leading_values: np.ndarray

    def __post_init__(self):
        lv = np.asarray(self.leading_values, dtype=float)
        object.__setattr__(self, "leading_values", lv)
        if not self.dt_star > 0.0:
            raise ValueError("dt_star must be > 0")
        if lv.size == 0 or lv[0] != 0.0:
            raise ValueError("leading_values must start at 0")
        if np.any(np.diff(lv) < 0.0):
            raise ValueError("leading_values must be non-decreasing")


@dataclass(frozen=True)
class EnsembleStats:
    """Empirical pmf at time t with binomial standard errors.

    counts has n_max + 2 entries: bins 0..n_max plus a final bin counting
    paths with N(t) > n_max, so the counts always sum to the path total.
    """

    beta: float
    t: float
    n_max: int
    counts: np.ndarray
    paths: int
    route: str

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", c)
        if len(c) != self.n_max + 2:
            raise ValueError("counts must have n_max + 2 entries (overflow bin last)")
        if int(np.sum(c)) != self.paths:
            raise ValueError("counts must sum to the number of paths")

    @property
    def p_hat(self) -> np.ndarray:
        return self.counts[: self.n_max + 1] / self.paths

    @property
    def se(self) -> np.ndarray:
        p = self.p_hat
        return np.sqrt(p * (1.0 - p) / self.paths)


# ---------------------------------------------------------------------------
# samplers


def sample_stable(beta: float, rng, size=None):
    """One-sided stable draw(s) S > 0 with E[e^{-sS}] = e^{-s^beta}.

    Kanter's representation: with U ~ U(0,1), E ~ Exp(1) and
    B(u) = sin(beta pi u)^beta sin((1-beta) pi u)^{1-beta} / sin(pi u),
    S = B(U)^{1/beta} E^{-(1-beta)/beta}.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0,1) for stable sampling, got {beta!r}; "
                         "beta=1 degenerates to S == 1 and is the caller's case")
    gen = _as_generator(rng)
    n = 1 if size is None else int(size)
    u = gen.uniform(0.0, 1.0, n)
    e = gen.standard_exponential(n)
    pu = math.pi * u
    b = beta
    logB = (b * np.log(np.sin(b * pu)) + (1.0 - b) * np.log(np.sin((1.0 - b) * pu))
            - np.log(np.sin(pu)))
    s = np.exp(logB / b - (1.0 - b) / b * np.log(e))
    return float(s[0]) if size is None else s


def sample_ml_waiting(beta: float, rng, size=None):
    """Waiting time(s) with survival E_beta(-t^beta): T = E^{1/beta} S.

    The transform identity E[e^{-sT}] = 1/(1+s^beta) justifies the product
    form; beta = 1 returns plain exponentials.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0,1], got {beta!r}")
    gen = _as_generator(rng)
    n = 1 if size is None else int(size)
    e = gen.standard_exponential(n)
    if beta == 1.0:
        t = e
    else:
        t = e ** (1.0 / beta) * sample_stable(beta, gen, n)
    return float(t[0]) if size is None else t


def sample_inverse_subordinator(beta: float, t: float, rng, size=None):
    """Draw(s) of t_*(t), density q_beta(., t) = t^{-beta} M_beta(. / t^beta).

    Realized as (t/S)^beta: {(t/S)^beta <= x} = {S >= t x^{-1/beta}} is the
    defining first-passage inversion.  beta = 1 is the degenerate t_* = t.
    """
    if not t > 0.0:
        raise ValueError("t must be > 0")
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0,1], got {beta!r}")
    if beta == 1.0:
        return t if size is None else np.full(int(size), float(t))
    s = sample_stable(beta, rng, size if size is not None else 1)
    out = (t / s) ** beta
    return float(out[0]) if size is None else out


# ---------------------------------------------------------------------------
# path simulation


def simulate_renewal_path(beta: float, horizon: float, rng,
                          cap: int = _PATH_CAP) -> PathSample:
    """Cumulative sums of Mittag-Leffler waiting times, truncated at horizon."""
    if not horizon > 0.0:
        raise ValueError("horizon must be > 0")
    gen = _as_generator(rng)
    blocks = []
    t_cur = 0.0
    total = 0
    while True:
        w = sample_ml_waiting(beta, gen, _BLOCK)
        cs = t_cur + np.cumsum(w)
        k = int(np.searchsorted(cs, horizon, side="right"))
        blocks.append(cs[:k])
        total += k
        if total > cap:
            raise PathBudgetError(f"more than {cap} events before horizon {horizon}")
        if k < _BLOCK:
            break
        t_cur = float(cs[-1])
    events = np.concatenate(blocks) if blocks else np.empty(0)
    return PathSample(beta=beta, horizon=horizon, event_times=events, route="renewal")


def build_subordinator_path(beta: float, horizon: float, dt_star: float, rng,
                            cap: int = _PATH_CAP) -> SubordinatorPath:
    """Leading process on the operational grid, extended until it exceeds horizon."""
    if not (0.0 < beta < 1.0):
        raise ValueError("grid subordinator is defined for beta in (0,1)")
    gen = _as_generator(rng)
    scale = dt_star ** (1.0 / beta)
    chunks = [np.zeros(1)]
    total = 0.0
    cells = 0
    while total <= horizon:
        inc = scale * sample_stable(beta, gen, _SUB_BLOCK)
        cs = total + np.cumsum(inc)
        chunks.append(cs)
        total = float(cs[-1])
        cells += _SUB_BLOCK
        if cells > cap:
            raise PathBudgetError(
                f"subordinator grid exceeded {cap} cells before horizon {horizon}")
    return SubordinatorPath(beta=beta, dt_star=dt_star,
                            leading_values=np.concatenate(chunks))


def simulate_parametric_path(beta: float, horizon: float, dt_star: float, rng,
                             cap: int = _PATH_CAP) -> PathSample:
    """Subordination route: standard Poisson events in operational time mapped
    through the leading process t = t(t_*).

    An event at operational epoch tau in (k dt, (k+1) dt] lands at the natural
    time t((k+1) dt) (right-endpoint convention, consistent with the
    right-continuity of N).  Events sharing a cell land at the same leading
    jump location and are separated by single float ulps to keep event times
    strictly increasing.  beta = 1 short-circuits to the identity subordinator.
    """
    if not horizon > 0.0:
        raise ValueError("horizon must be > 0")
    if not dt_star > 0.0:
        raise ValueError("dt_star must be > 0")
    gen = _as_generator(rng)
    if beta == 1.0:
        base = simulate_renewal_path(1.0, horizon, gen, cap)
        return PathSample(beta=1.0, horizon=horizon,
                          event_times=base.event_times, route="parametric")

    sub = build_subordinator_path(beta, horizon, dt_star, gen, cap)
    lead = sub.leading_values
    n_cells = len(lead) - 1
    op_end = n_cells * dt_star

    # unit-rate Poisson epochs in operational time
    taus = []
    t_cur = 0.0
    total = 0
    while True:
        e = gen.standard_exponential(_BLOCK)
        cs = t_cur + np.cumsum(e)
        k = int(np.searchsorted(cs, op_end, side="right"))
        taus.append(cs[:k])
        total += k
        if total > cap:
            raise PathBudgetError(f"more than {cap} events before horizon {horizon}")
        if k < _BLOCK:
            break
        t_cur = float(cs[-1])
    tau = np.concatenate(taus) if taus else np.empty(0)

    cells = np.ceil(tau / dt_star).astype(np.int64)
    cells = cells[(cells >= 1) & (cells <= n_cells)]
    nat = lead[cells]
    nat = nat[nat <= horizon]
    # ulp tie-break for events inside one leading jump
    for i in range(1, len(nat)):
        if nat[i] <= nat[i - 1]:
            nat[i] = np.nextafter(nat[i - 1], math.inf)
    nat = nat[nat <= horizon]
    return PathSample(beta=beta, horizon=horizon, event_times=nat, route="parametric")


# ---------------------------------------------------------------------------
# ensembles


def _worker_count(workers) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("FRACPOISSON_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def run_ensemble(route: str, beta: float, horizon: float, n_paths: int,
                 seed: int, dt_star: float = 1e-3, workers=None) -> list:
    """n_paths independent paths; path i draws from stream (seed, i).

    Output is identical for any worker count: the per-path streams carry all
    the randomness and results are assembled in stream order.
    """
    if route not in ("renewal", "parametric"):
        raise ValueError(f"unknown route {route!r}")
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")

    def one(i: int) -> PathSample:
        gen = RngStream(seed=seed, stream_id=i).generator()
        if route == "renewal":
            return simulate_renewal_path(beta, horizon, gen)
        return simulate_parametric_path(beta, horizon, dt_star, gen)

    nworkers = _worker_count(workers)
    if nworkers == 1:
        return [one(i) for i in range(n_paths)]
    with ThreadPoolExecutor(max_workers=nworkers) as pool:
        return list(pool.map(one, range(n_paths)))


def empirical_pmf(paths, t: float, n_max: int) -> EnsembleStats:
    """Counts of N(t) = n over an ensemble, with binomial standard errors."""
    paths = list(paths)
    if not paths:
        raise EmptyEnsembleError("empirical_pmf needs at least one path")
    if any(p.horizon < t for p in paths):
        raise HorizonMismatchError(f"some paths end before t={t}")
    counts = np.zeros(n_max + 2, dtype=np.int64)
    for p in paths:
        n = p.count_at(t)
        counts[min(n, n_max + 1)] += 1
    routes = {p.route for p in paths}
    betas = {p.beta for p in paths}
    return EnsembleStats(beta=betas.pop() if len(betas) == 1 else math.nan,
                         t=t, n_max=n_max, counts=counts, paths=len(paths),
                         route=routes.pop() if len(routes) == 1 else "mixed")


@dataclass(frozen=True)
class EquivalenceReport:
    """Two-sample chi-square comparison of empirical counting distributions."""

    statistic: float
    dof: int
    p_value: float
    n_bins: int
    merged_from: int = field(default=-1)  # first bin index folded into the tail

    @property
    def passed(self) -> bool:
        return self.p_value > 1e-3


def equivalence_test(stats_a: EnsembleStats, stats_b: EnsembleStats,
                     min_expected: float = 5.0) -> EquivalenceReport:
    """Two-sample chi-square over bins with pooled expected count >= min_expected.

    Sparse high-n bins (and the overflow bin) merge into a common tail; the
    statistic is sum (K1 a_i - K2 b_i)^2/(a_i+b_i) with K1 = sqrt(NB/NA),
    K2 = sqrt(NA/NB), dof = bins - 1.
    """
    if stats_a.t != stats_b.t or stats_a.n_max != stats_b.n_max:
        raise ValueError("ensembles must share t and n_max")
    na = stats_a.paths
    nb = stats_b.paths
    a = stats_a.counts.astype(float)
    b = stats_b.counts.astype(float)
    pooled = a + b
    # merge from the top until the pooled tail reaches the threshold
    k = len(pooled)
    merged_from = k
    tail_p = 0.0
    while merged_from > 1 and tail_p < min_expected:
        merged_from -= 1
        tail_p += pooled[merged_from]
    bins_a = list(a[:merged_from]) + ([float(np.sum(a[merged_from:]))] if merged_from < k else [])
    bins_b = list(b[:merged_from]) + ([float(np.sum(b[merged_from:]))] if merged_from < k else [])
    use_a, use_b = [], []
    for xa, xb in zip(bins_a, bins_b):
        if xa + xb >= min_expected:
            use_a.append(xa)
            use_b.append(xb)
        elif use_a:  # fold stray sparse bins into the previous one
            use_a[-1] += xa
            use_b[-1] += xb
    if len(use_a) < 2:
        raise InsufficientDataError("fewer than 2 usable bins for the chi-square test")
    k1 = math.sqrt(nb / na)
    k2 = math.sqrt(na / nb)
    ua = np.asarray(use_a)
    ub = np.asarray(use_b)
    stat = float(np.sum((k1 * ua - k2 * ub) ** 2 / (ua + ub)))
    dof = len(use_a) - 1
    return EquivalenceReport(statistic=stat, dof=dof,
                             p_value=float(chi2.sf(stat, dof)),
                             n_bins=len(use_a), merged_from=merged_from)

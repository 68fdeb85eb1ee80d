"""Growth-rate estimation, the Euler-Lotka link between r and R0, and
generation / serial / backward intervals from transmission trees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize, special

from ._glm import poisson_irls
from ._rng import make_rng
from .core import INFECTION, EventLog
from .errors import DomainError

_LAGUERRE_NODES = 256


@dataclass(frozen=True)
class IncidenceSeries:
    counts: np.ndarray
    period: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.counts)
        if np.any(c < 0) or np.any(c != np.round(c)):
            raise DomainError("counts must be nonnegative integers")
        if not self.period > 0:
            raise DomainError("period length must be > 0")
        object.__setattr__(self, "counts", c.astype(np.int64))

    def __len__(self):
        return len(self.counts)


def incidence_from_log(log: EventLog, period: float = 1.0, t_end: Optional[float] = None) -> IncidenceSeries:
    """Infection counts per reporting period of length ``period``."""
    t = log.time[log.kind == INFECTION]
    t_end = log.end_time if t_end is None else t_end
    n_bins = max(1, int(math.floor(t_end / period)) + 1)
    idx = np.minimum((t / period).astype(np.int64), n_bins - 1)
    return IncidenceSeries(np.bincount(idx, minlength=n_bins), period)


@dataclass(frozen=True)
class GrowthEstimate:
    r: float
    se: float
    method: str = "poisson"


def estimate_growth_rate(series: IncidenceSeries, window=None, method: str = "poisson") -> GrowthEstimate:
    """Exponential growth rate per time unit over ``window`` (a slice or (a, b)).

    ``method="poisson"`` fits a log-linear Poisson regression (zero counts
    allowed); ``"loglinear"`` is least squares on log counts.
    """
    if window is None:
        window = slice(0, len(series))
    elif not isinstance(window, slice):
        window = slice(*window)
    y = series.counts[window].astype(float)
    idx = np.arange(len(series))[window]
    if len(y) < 3:
        raise DomainError("growth-rate window needs at least 3 periods")
    if y.sum() <= 0:
        raise DomainError("growth-rate window contains only zero counts")
    t = idx * series.period
    X = np.column_stack([np.ones_like(t), t - t.mean()])
    if method == "poisson":
        beta, cov, _ = poisson_irls(X, y)
        return GrowthEstimate(float(beta[1]), float(math.sqrt(cov[1, 1])), "poisson")
    if method == "loglinear":
        if np.any(y <= 0):
            raise DomainError("log-linear least squares cannot handle zero counts")
        ly = np.log(y)
        beta, res, _, _ = np.linalg.lstsq(X, ly, rcond=None)
        resid = ly - X @ beta
        sigma2 = resid @ resid / max(1, len(y) - 2)
        cov = sigma2 * np.linalg.inv(X.T @ X)
        return GrowthEstimate(float(beta[1]), float(math.sqrt(cov[1, 1])), "loglinear")
    raise DomainError(f"unknown growth-rate method {method!r}")


@dataclass(frozen=True, eq=False)
class GenerationTimeDist:
    """Generation-time distribution.

    Build with :meth:`exponential`, :meth:`fixed`, :meth:`gamma`,
    :meth:`empirical` or :meth:`custom` (a density callable, integrated by
    Gauss-Laguerre quadrature).
    """

    kind: str
    params: tuple
    sample: Optional[np.ndarray] = None
    density_fn: Optional[Callable] = None

    @classmethod
    def exponential(cls, rate):
        if not rate > 0:
            raise DomainError("rate must be > 0")
        return cls("exponential", (float(rate),))

    @classmethod
    def fixed(cls, t_g):
        if not t_g > 0:
            raise DomainError("fixed generation time must be > 0")
        return cls("fixed", (float(t_g),))

    @classmethod
    def gamma(cls, shape, rate):
        if not (shape > 0 and rate > 0):
            raise DomainError("gamma shape and rate must be > 0")
        return cls("gamma", (float(shape), float(rate)))

    @classmethod
    def empirical(cls, sample):
        s = np.asarray(sample, dtype=float).ravel()
        if len(s) == 0 or not np.all(np.isfinite(s)) or np.any(s < 0):
            raise DomainError("empirical generation times must be finite and nonnegative")
        return cls("empirical", (), sample=s)

    @classmethod
    def custom(cls, density, decay_rate=1.0, shape=1.0):
        """Density on [0, inf).

        ``decay_rate`` sets the quadrature scale; ``shape`` is the power
        ``t**(shape-1)`` the density behaves like near 0, absorbed into
        generalized Laguerre nodes so singular densities integrate accurately.
        """
        if not (decay_rate > 0 and shape > 0):
            raise DomainError("decay_rate and shape must be > 0")
        dist = cls("custom", (float(decay_rate), float(shape)), density_fn=density)
        total = dist._quad(lambda t: np.ones_like(t), 0.0)
        if not np.isfinite(total) or abs(total - 1.0) > 1e-8:
            raise DomainError(f"density does not integrate to 1 (got {total!r})")
        return dist

    @property
    def mean(self) -> float:
        if self.kind == "exponential":
            return 1.0 / self.params[0]
        if self.kind == "fixed":
            return self.params[0]
        if self.kind == "gamma":
            return self.params[0] / self.params[1]
        if self.kind == "empirical":
            return float(self.sample.mean())
        return self._quad(lambda t: t, 0.0)

    @property
    def min_rate(self) -> float:
        """Infimum of r for which the Laplace transform is finite."""
        if self.kind in ("exponential", "gamma"):
            return -self.params[-1]
        if self.kind == "custom":
            return -self.params[0]
        return -math.inf

    def density(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "exponential":
            a = self.params[0]
            return np.where(t >= 0, a * np.exp(-a * t), 0.0)
        if self.kind == "gamma":
            k, b = self.params
            return np.where(t >= 0, np.exp(k * np.log(b) + (k - 1) * np.log(np.where(t > 0, t, 1.0))
                                           - b * t - special.gammaln(k)), 0.0) * (t > 0)
        if self.kind == "custom":
            return self.density_fn(t)
        raise DomainError(f"{self.kind} generation times have point masses, not a density")

    def _quad(self, f, r):
        # integral_0^inf e^{-rt} f(t) g(t) dt with t = x / c, c = decay + r
        c = self.params[0] + r if self.kind == "custom" else None
        if c is None or c <= 0:
            raise DomainError("Laplace transform diverges at this r")
        alpha = self.params[1] - 1.0
        x, w = special.roots_genlaguerre(_LAGUERRE_NODES, alpha)
        keep = w > 0
        x, w = x[keep], w[keep]
        t = x / c
        weight = np.exp(np.log(w) + x - alpha * np.log(x) - r * t) / c
        return float(np.sum(weight * f(t) * self.density_fn(t)))

    def log_laplace(self, r: float) -> float:
        """log of integral e^{-rt} g(t) dt; DomainError when it diverges."""
        if r <= self.min_rate:
            raise DomainError(f"Laplace transform of the {self.kind} generation time diverges at r={r}")
        if self.kind == "exponential":
            a = self.params[0]
            return math.log(a) - math.log(a + r)
        if self.kind == "fixed":
            return -r * self.params[0]
        if self.kind == "gamma":
            k, b = self.params
            return k * (math.log(b) - math.log(b + r))
        if self.kind == "empirical":
            e = -r * self.sample
            top = e.max()
            return float(top + math.log(np.mean(np.exp(e - top))))
        return math.log(self._quad(lambda t: np.ones_like(t), r))

    def laplace(self, r: float) -> float:
        return math.exp(self.log_laplace(r))

    def laplace_quadrature(self, r: float) -> float:
        """Gauss-Laguerre evaluation of the transform (density kinds only)."""
        if self.kind == "custom":
            return self._quad(lambda t: np.ones_like(t), r)
        if self.kind == "exponential":
            dist = GenerationTimeDist.custom(self.density, self.params[0])
        elif self.kind == "gamma":
            dist = GenerationTimeDist("custom", (self.params[1], self.params[0]), density_fn=self.density)
        else:
            raise DomainError("quadrature needs a density")
        return dist._quad(lambda t: np.ones_like(t), r)


def r0_from_growth(r: float, g: GenerationTimeDist) -> float:
    """R0 = 1 / integral e^{-rt} g(t) dt."""
    return math.exp(-g.log_laplace(r))


def euler_lotka_r(r0: float, g: GenerationTimeDist) -> float:
    """Growth rate r solving ``R0 * integral e^{-rt} g(t) dt = 1``.

    Negative when R0 < 1. Solved by bracketed root finding on the
    log of the (decreasing) left side.
    """
    if not r0 > 0:
        raise DomainError("R0 must be > 0")
    if r0 == 1.0:
        return 0.0
    log_r0 = math.log(r0)
    if g.kind == "exponential":
        return g.params[0] * (r0 - 1.0)
    if g.kind == "fixed":
        return log_r0 / g.params[0]

    def f(r):
        return log_r0 + g.log_laplace(r)

    scale = 1.0 / g.mean if g.mean > 0 else 1.0
    if r0 > 1.0:
        lo, hi = 0.0, scale
        while f(hi) > 0:
            hi *= 2.0
    else:
        hi = 0.0
        floor = g.min_rate
        step = scale
        lo = -step if math.isinf(floor) else max(-step, 0.5 * floor)
        while f(lo) < 0:
            if math.isinf(floor):
                step *= 2.0
                lo = -step
            else:
                lo = 0.5 * (lo + floor)
    r = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return float(r)


@dataclass(frozen=True)
class Intervals:
    forward: np.ndarray
    serial: np.ndarray
    backward: np.ndarray
    window: tuple

    def rows(self):
        for kind in ("forward", "serial", "backward"):
            for v in getattr(self, kind).tolist():
                yield kind, v


def growth_phase_window(log: EventLog, low: float = 0.01, high: float = 0.05) -> tuple:
    """Times at which cumulative incidence first reaches ``low*n`` and ``high*n``."""
    t = np.sort(log.time[log.kind == INFECTION])
    lo_k = max(1, int(math.ceil(low * log.n)))
    hi_k = max(1, int(math.ceil(high * log.n)))
    if len(t) < hi_k:
        return (math.nan, math.nan)
    return (float(t[lo_k - 1]), float(t[hi_k - 1]))


def extract_intervals(
    log: EventLog,
    onset_offsets=None,
    window=None,
    seed=None,
) -> Intervals:
    """Forward generation, serial and backward intervals from an event log.

    Forward intervals belong to infectors infected inside ``window``
    (all of their infectees, whenever infected); backward intervals belong to
    infectees infected inside ``window``. ``window`` defaults to the growth
    phase (cumulative incidence between 1% and 5% of n); pass ``"all"`` for
    every pair. ``onset_offsets`` is an array indexed by individual id or a
    callable ``(rng, size) -> offsets`` drawn with ``seed``; serial intervals
    are computed for the forward pairs.
    """
    inf = log.kind == INFECTION
    subj = log.subject[inf]
    src = log.infector[inf]
    t_inf = np.full(log.n, np.nan)
    t_inf[subj] = log.time[inf]
    pairs = src >= 0
    if len(subj) > 1 and np.sum(src < 0) != 1:
        raise DomainError("event log lacks infector attribution")
    infectee = subj[pairs]
    infector = src[pairs]
    gen = t_inf[infectee] - t_inf[infector]

    if window is None:
        window = growth_phase_window(log)
    elif isinstance(window, str) and window == "all":
        window = (-math.inf, math.inf)
    a, b = window
    if math.isnan(a):
        fwd_mask = np.zeros(len(gen), dtype=bool)
        bwd_mask = fwd_mask
    else:
        fwd_mask = (t_inf[infector] >= a) & (t_inf[infector] <= b)
        bwd_mask = (t_inf[infectee] >= a) & (t_inf[infectee] <= b)

    if onset_offsets is None:
        serial = np.array([])
    else:
        if callable(onset_offsets):
            offsets = np.asarray(onset_offsets(make_rng(seed), log.n), dtype=float)
        else:
            offsets = np.asarray(onset_offsets, dtype=float)
        if offsets.shape != (log.n,):
            raise DomainError("onset offsets must have one entry per individual")
        onset = t_inf + offsets
        serial = (onset[infectee] - onset[infector])[fwd_mask]
    return Intervals(gen[fwd_mask], serial, gen[bwd_mask], (a, b))


def pooled_interval_comparison(backward: Sequence[float], forward: Sequence[float]):
    """One-sided Welch test of mean backward < mean forward.

    Returns ``(difference, z, p_value)`` with ``difference = mean_b - mean_f``.
    """
    bw = np.asarray(backward, dtype=float)
    fw = np.asarray(forward, dtype=float)
    diff = bw.mean() - fw.mean()
    se = math.sqrt(bw.var(ddof=1) / len(bw) + fw.var(ddof=1) / len(fw))
    z = diff / se
    return diff, z, float(special.ndtr(z))

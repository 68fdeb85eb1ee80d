"""Household epidemics and spatial (patch) models.

Household model: a susceptible in household h is infected at rate
``lam_h * I_h(t) + (lam_g / n) * I(t)``. The temporal log-likelihood for
(lam_h, lam_g) given observed infection and recovery times is concave and is
maximized over the nonnegative quadrant.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from . import kernels
from ._rng import make_rng
from .core import INFECTION, RECOVERY, EventLog, simulate
from .errors import ConvergenceError, DomainError
from .final_size import Estimate


class ImpossibleDataWarning(UserWarning):
    """Observed event has zero intensity under the given parameters."""


@dataclass(frozen=True)
class HouseholdParams:
    lam_h: float
    lam_g: float
    gamma: float
    sizes: tuple

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if self.lam_h < 0 or self.lam_g < 0:
            raise DomainError("transmission rates must be >= 0")
        if not self.gamma > 0:
            raise DomainError("gamma must be > 0")
        if not sizes or min(sizes) < 1:
            raise DomainError("household sizes must be >= 1")

    @property
    def n(self) -> int:
        return sum(self.sizes)


def simulate_households(params: HouseholdParams, seed, index_household: Optional[int] = None) -> EventLog:
    """Exact simulation of the household epidemic from one index case.

    The index case is placed uniformly at random over individuals unless
    ``index_household`` fixes its household.
    """
    rng = make_rng(seed)
    sizes = np.asarray(params.sizes, dtype=np.int64)
    if index_household is not None and not 0 <= index_household < len(sizes):
        raise DomainError("index_household out of range")
    t, k, s, i = kernels.household_events(
        rng,
        sizes,
        float(params.lam_h),
        float(params.lam_g),
        float(params.gamma),
        -1 if index_household is None else int(index_household),
    )
    home = np.repeat(np.arange(len(sizes), dtype=np.int64), sizes)
    return EventLog(t, k, s, i, int(sizes.sum()), household=home)


simulate.register(HouseholdParams, lambda p, seed: simulate_households(p, seed))


# --- observed household data and likelihood --------------------------------

EVENT_INDEX = "index"
EVENT_INFECTION = "infection"
EVENT_RECOVERY = "recovery"
_EVENT_KINDS = (EVENT_INDEX, EVENT_INFECTION, EVENT_RECOVERY)


@dataclass(frozen=True, eq=False)
class HouseholdOutbreakData:
    """Household-level infection/recovery times observed on ``[0, t_obs]``.

    ``sizes[h]`` is the size of household h; events reference households by
    index. Exactly one event is the ``index`` infection.
    """

    household: np.ndarray
    event: tuple
    time: np.ndarray
    sizes: np.ndarray
    t_obs: float

    def __post_init__(self):
        household = np.asarray(self.household, dtype=np.int64)
        time = np.asarray(self.time, dtype=float)
        sizes = np.asarray(self.sizes, dtype=np.int64)
        event = tuple(self.event)
        if not (len(household) == len(time) == len(event)):
            raise DomainError("event columns must have equal length")
        if any(e not in _EVENT_KINDS for e in event):
            raise DomainError(f"event must be one of {_EVENT_KINDS}")
        if np.any(sizes < 1):
            raise DomainError("household sizes must be >= 1")
        if len(household) and (household.min() < 0 or household.max() >= len(sizes)):
            raise DomainError("event references an unknown household")
        if np.any(time < 0) or np.any(time > self.t_obs):
            raise DomainError("event times must lie in [0, t_obs]")
        order = np.argsort(time, kind="stable")
        object.__setattr__(self, "household", household[order])
        object.__setattr__(self, "time", time[order])
        object.__setattr__(self, "event", tuple(event[i] for i in order))
        object.__setattr__(self, "sizes", sizes)
        self._replay()

    @property
    def n(self) -> int:
        return int(self.sizes.sum())

    @classmethod
    def from_log(cls, log: EventLog, t_obs: Optional[float] = None):
        if log.household is None:
            raise DomainError("event log carries no household annotation")
        sizes = np.bincount(log.household, minlength=int(log.household.max()) + 1)
        t_obs = log.end_time if t_obs is None else float(t_obs)
        keep = log.time <= t_obs
        events = []
        for k, src in zip(log.kind[keep].tolist(), log.infector[keep].tolist()):
            if k == INFECTION:
                events.append(EVENT_INDEX if src < 0 else EVENT_INFECTION)
            elif k == RECOVERY:
                events.append(EVENT_RECOVERY)
            else:
                raise DomainError("household data do not support latency events")
        return cls(log.household[log.subject[keep]], tuple(events), log.time[keep], sizes, t_obs)

    def _replay(self):
        s_h = self.sizes.copy()
        i_h = np.zeros_like(s_h)
        n_index = 0
        for h, e in zip(self.household.tolist(), self.event):
            if e == EVENT_RECOVERY:
                i_h[h] -= 1
            else:
                n_index += e == EVENT_INDEX
                s_h[h] -= 1
                i_h[h] += 1
            if s_h[h] < 0 or i_h[h] < 0:
                raise DomainError(f"household {h}: event sequence makes S or I negative")
        if n_index > 1:
            raise DomainError("at most one index event is allowed")

    def sufficient_statistics(self):
        """Per-infection coefficients and exposure integrals of the log-likelihood.

        Returns ``(a, b, A_h, A_g)`` with loglik ``sum log(lam_h*a + lam_g*b)
        - lam_h*A_h - lam_g*A_g``: ``a = S_i I_i`` and ``b = S_i I / n`` just
        before each non-index infection, ``A_h`` the integral of
        ``sum_i S_i I_i`` and ``A_g`` that of ``S I / n`` over ``[0, t_obs]``.
        """
        n = self.n
        s_h = self.sizes.astype(np.int64).copy()
        i_h = np.zeros_like(s_h)
        s_tot = n
        i_tot = 0
        w = 0
        a, b = [], []
        area_h = 0.0
        area_g = 0.0
        t_prev = 0.0
        for h, e, t in zip(self.household.tolist(), self.event, self.time.tolist()):
            dt = t - t_prev
            area_h += w * dt
            area_g += s_tot * i_tot * dt / n
            t_prev = t
            if e == EVENT_INFECTION:
                a.append(float(s_h[h] * i_h[h]))
                b.append(float(s_h[h]) * i_tot / n)
            w -= s_h[h] * i_h[h]
            if e == EVENT_RECOVERY:
                i_h[h] -= 1
                i_tot -= 1
            else:
                s_h[h] -= 1
                i_h[h] += 1
                s_tot -= 1
                i_tot += 1
            w += s_h[h] * i_h[h]
        dt = self.t_obs - t_prev
        area_h += w * dt
        area_g += s_tot * i_tot * dt / n
        return np.array(a), np.array(b), area_h, area_g


def _loglik_from_stats(stats, lam_h, lam_g):
    a, b, area_h, area_g = stats
    rate = lam_h * a + lam_g * b
    if np.any(rate <= 0):
        return -math.inf
    return float(np.sum(np.log(rate)) - lam_h * area_h - lam_g * area_g)


def household_loglik(data: HouseholdOutbreakData, lam_h: float, lam_g: float, n: Optional[int] = None) -> float:
    """Temporal log-likelihood of (lam_h, lam_g).

    The index case is conditioned on: it adds no event term but counts as
    infective. Integrals are exact over the piecewise-constant counts.
    Returns ``-inf`` (with an ImpossibleDataWarning) if an observed infection
    has zero intensity.
    """
    if lam_h < 0 or lam_g < 0:
        raise DomainError("rates must be >= 0")
    if n is not None and n != data.n:
        stats = _rescaled_stats(data, n)
    else:
        stats = data.sufficient_statistics()
    ll = _loglik_from_stats(stats, lam_h, lam_g)
    if ll == -math.inf:
        warnings.warn("observed infection with zero intensity: data impossible under these rates",
                      ImpossibleDataWarning, stacklevel=2)
    return ll


def _rescaled_stats(data, n):
    a, b, area_h, area_g = data.sufficient_statistics()
    scale = data.n / n
    return a, b * scale, area_h, area_g * scale


def _loglik_grad(stats, theta):
    a, b, area_h, area_g = stats
    rate = theta[0] * a + theta[1] * b
    return np.array([np.sum(a / rate) - area_h, np.sum(b / rate) - area_g])


@dataclass(frozen=True)
class HouseholdFit:
    lam_h: Estimate
    lam_g: Estimate
    loglik: float
    covariance: np.ndarray
    boundary: tuple


def _fd_hessian(grad, theta, h=1e-5):
    """Central differences of the gradient; one-sided at the boundary."""
    k = len(theta)
    hess = np.zeros((k, k))
    for j in range(k):
        step = h * max(1.0, abs(theta[j]))
        e = np.zeros(k)
        e[j] = step
        if theta[j] - step > 0:
            hess[:, j] = (grad(theta + e) - grad(theta - e)) / (2 * step)
        else:
            hess[:, j] = (grad(theta + e) - grad(theta)) / step
    return 0.5 * (hess + hess.T)


def household_mle(data: HouseholdOutbreakData, starts: Sequence = ((1.0, 1.0), (0.1, 2.0), (2.0, 0.1))) -> HouseholdFit:
    """Maximum-likelihood (lam_h, lam_g) on the nonnegative quadrant.

    Bound-constrained quasi-Newton from several deterministic starts; the
    objective is concave, so starts only guard against numerical stalls.
    Standard errors come from the observed information, computed by finite
    differences of the analytic score.
    """
    stats = data.sufficient_statistics()
    a, b, _, _ = stats
    if len(a) == 0:
        raise DomainError("household MLE needs at least one non-index infection")
    if np.any((a == 0) & (b == 0)):
        raise DomainError("an observed infection has no infective source: data impossible")

    def negll(theta):
        ll = _loglik_from_stats(stats, theta[0], theta[1])
        return 1e300 if ll == -math.inf else -ll

    def neggrad(theta):
        rate = theta[0] * a + theta[1] * b
        if np.any(rate <= 0):
            return np.zeros(2)
        return -_loglik_grad(stats, theta)

    best = None
    for start in starts:
        res = optimize.minimize(
            negll, np.asarray(start, dtype=float), jac=neggrad, method="L-BFGS-B",
            bounds=[(0.0, None), (0.0, None)], options={"ftol": 1e-15, "gtol": 1e-10, "maxiter": 1000},
        )
        if best is None or res.fun < best.fun:
            best = res
    theta = best.x
    if not np.isfinite(best.fun) or best.fun >= 1e300:
        raise ConvergenceError("household MLE: no start reached a feasible point")
    boundary = tuple(name for name, v in zip(("lam_h", "lam_g"), theta) if v <= 1e-9)
    theta = np.where(theta <= 1e-9, 0.0, theta)
    grad = lambda th: _loglik_grad(stats, th)  # noqa: E731
    info = -_fd_hessian(grad, theta)
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        cov = np.full((2, 2), np.inf)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, np.inf))
    return HouseholdFit(
        Estimate(float(theta[0]), float(se[0]), "household-mle-lam_h"),
        Estimate(float(theta[1]), float(se[1]), "household-mle-lam_g"),
        -float(best.fun),
        cov,
        boundary,
    )


def household_final_size_enum(size: int, p: float) -> np.ndarray:
    """Exact final-size distribution of one isolated household.

    One initial infective, exponential infectious periods, no outside
    infection. ``p = lam_h/(lam_h + gamma)`` is the probability an infective
    infects a given housemate. Entry ``z`` of the result is P(Z = z),
    z = 0..size (entry 0 is always 0).
    """
    if size < 1 or size > 5:
        raise DomainError("enumeration supports household sizes 1..5")
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must lie in [0, 1]")
    dist = np.zeros(size + 1)
    # mass over transient states (s, i); embedded jump chain
    mass = {(size - 1, 1): 1.0}
    while mass:
        nxt = {}
        for (s, i), w in mass.items():
            if p == 1.0:
                p_inf = 1.0 if s > 0 else 0.0
            else:
                rho = p / (1.0 - p)
                p_inf = rho * s / (rho * s + 1.0)
            if p_inf > 0:
                key = (s - 1, i + 1)
                nxt[key] = nxt.get(key, 0.0) + w * p_inf
            if p_inf < 1:
                if i - 1 == 0:
                    dist[size - s] += w * (1.0 - p_inf)
                else:
                    key = (s, i - 1)
                    nxt[key] = nxt.get(key, 0.0) + w * (1.0 - p_inf)
        mass = nxt
    return dist


# --- two-patch model -------------------------------------------------------


@dataclass(frozen=True)
class PatchParams:
    lam: float
    gamma: float
    m_move: float
    n: float
    initial: tuple  # (S1, I1, S2, I2)

    def __post_init__(self):
        if min(self.lam, self.gamma, self.m_move) < 0:
            raise DomainError("rates must be >= 0")
        if len(self.initial) != 4 or min(self.initial) < 0:
            raise DomainError("initial state is (S1, I1, S2, I2) with nonnegative entries")
        if not self.n > 0:
            raise DomainError("n must be > 0")


@dataclass(frozen=True)
class PatchTrajectory:
    t: np.ndarray
    s1: np.ndarray
    i1: np.ndarray
    r1: np.ndarray
    s2: np.ndarray
    i2: np.ndarray
    r2: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.t, self.s1, self.i1, self.r1, self.s2, self.i2, self.r2])


def _patch_rhs(y, lam, gamma, m, n):
    s1, i1, s2, i2, _, _ = y
    inf1 = lam * s1 * i1 / n
    inf2 = lam * s2 * i2 / n
    return np.array([
        -inf1 + m * (s2 - s1),
        inf1 - gamma * i1 + m * (i2 - i1),
        -inf2 + m * (s1 - s2),
        inf2 - gamma * i2 + m * (i1 - i2),
        gamma * i1,
        gamma * i2,
    ])


def simulate_two_patch(params: PatchParams, t_end: float, dt: float = 0.01) -> PatchTrajectory:
    """Classical RK4 on the two-patch SIR system with movement rate ``m_move``.

    Recovered counts accumulate ``gamma * I_i``; R does not move between
    patches. Output is sampled at every step.
    """
    if not dt > 0 or not t_end >= dt:
        raise DomainError("need dt > 0 and t_end >= dt")
    steps = int(math.ceil(t_end / dt - 1e-9))
    lam, gamma, m, n = params.lam, params.gamma, params.m_move, params.n
    y = np.array(list(params.initial[:2]) + list(params.initial[2:]) + [0.0, 0.0], dtype=float)
    out = np.empty((steps + 1, 6))
    times = np.empty(steps + 1)
    out[0] = y
    times[0] = 0.0
    t = 0.0
    for k in range(1, steps + 1):
        h = min(dt, t_end - t) if k == steps else dt
        k1 = _patch_rhs(y, lam, gamma, m, n)
        k2 = _patch_rhs(y + 0.5 * h * k1, lam, gamma, m, n)
        k3 = _patch_rhs(y + 0.5 * h * k2, lam, gamma, m, n)
        k4 = _patch_rhs(y + h * k3, lam, gamma, m, n)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t_end if k == steps else k * dt
        out[k] = y
        times[k] = t
    return PatchTrajectory(times, out[:, 0], out[:, 1], out[:, 4], out[:, 2], out[:, 3], out[:, 5])


# --- gravity coupling ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GravityConfig:
    """Generalized gravity coupling between communities.

    ``distances[j, k]`` is the distance between communities j and k;
    ``theta`` is the proportionality constant.
    """

    tau1: float
    tau2: float
    rho: float
    distances: np.ndarray
    sizes: np.ndarray
    theta: float = 1.0

    def __post_init__(self):
        if min(self.tau1, self.tau2, self.rho) <= 0:
            raise DomainError("gravity exponents must be > 0")
        if not self.theta > 0:
            raise DomainError("theta must be > 0")
        object.__setattr__(self, "distances", np.atleast_2d(np.asarray(self.distances, dtype=float)))
        object.__setattr__(self, "sizes", np.asarray(self.sizes, dtype=float).ravel())


def _distance(cfg, j, k):
    d = cfg.distances[j, k]
    if not d > 0:
        raise DomainError(f"distance d[{j},{k}] must be > 0")
    return d


def gravity_movement(cfg: GravityConfig, j: int, k: int) -> float:
    """Movement volume between communities k and j: theta n_k^tau1 n_j^tau2 / d^rho."""
    d = _distance(cfg, j, k)
    return cfg.theta * cfg.sizes[k] ** cfg.tau1 * cfg.sizes[j] ** cfg.tau2 / d**cfg.rho


def gravity_force(cfg: GravityConfig, I_j: float, j: int, k: int) -> float:
    """Force of infection from I_j infectives in j on susceptibles in k."""
    if I_j < 0:
        raise DomainError("I_j must be >= 0")
    d = _distance(cfg, j, k)
    return cfg.theta * cfg.sizes[k] ** cfg.tau1 * I_j**cfg.tau2 / d**cfg.rho

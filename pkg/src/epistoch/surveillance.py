"""Outbreak detection and count-panel modelling.

Contains a negative-binomial toolkit (mean ``mu``, dispersion ``phi`` with
variance ``mu * (1 + phi * mu)``; ``phi = 0`` is Poisson), a Farrington-type
threshold detector, the endemic-epidemic panel model, and predictive scores.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize, special, stats

from ._glm import poisson_irls
from ._rng import make_rng
from .errors import ConvergenceError, DomainError

_POISSON_PHI = 1e-10  # below this cdf/ppf/rvs use the Poisson limit


class ZeroMassWarning(UserWarning):
    """The predictive assigns zero probability to the observed count."""


# negative binomial ----------------------------------------------------------

def nb_logpmf(y, mu, phi):
    """log P(Y=y) for NegBin(size 1/phi, prob 1/(1+phi*mu)).

    Written through ``betaln`` so that it tends to the Poisson log mass
    smoothly as phi -> 0.
    """
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    phi = np.asarray(phi, dtype=float)
    y, mu, phi = np.broadcast_arrays(y, mu, phi)
    out = np.empty(y.shape)
    pois = phi <= 0
    if np.any(pois):
        out[pois] = stats.poisson.logpmf(y[pois], mu[pois])
    nb = ~pois
    if np.any(nb):
        yy, mm, k = y[nb], mu[nb], 1.0 / phi[nb]
        pos = yy > 0
        ysafe = np.where(pos, yy, 1.0)
        head = np.where(pos, -np.log(ysafe) - special.betaln(ysafe, k), 0.0)
        out[nb] = head - k * np.log1p(mm / k) + special.xlogy(yy, mm) - yy * np.log(k + mm)
    return out if out.ndim else float(out)


def _scipy_nb(mu, phi):
    k = 1.0 / phi
    return stats.nbinom(k, k / (k + mu))


def nb_cdf(y, mu, phi):
    if phi < _POISSON_PHI:
        return stats.poisson.cdf(y, mu)
    return _scipy_nb(mu, phi).cdf(y)


def nb_ppf(q, mu, phi):
    if phi < _POISSON_PHI:
        return stats.poisson.ppf(q, mu)
    return _scipy_nb(mu, phi).ppf(q)


def nb_rvs(rng, mu, phi, size=None):
    mu = np.asarray(mu, dtype=float)
    if np.all(np.asarray(phi) < _POISSON_PHI):
        return rng.poisson(mu, size)
    k = 1.0 / np.asarray(phi, dtype=float)
    return rng.negative_binomial(k, k / (k + mu), size)


@dataclass(frozen=True)
class NegBinPredictive:
    mean: float
    phi: float

    def logpmf(self, y):
        return nb_logpmf(y, self.mean, self.phi)

    def cdf(self, y):
        return nb_cdf(y, self.mean, self.phi)

    def ppf(self, q):
        return nb_ppf(q, self.mean, self.phi)

    def rvs(self, rng, size=None):
        return nb_rvs(rng, self.mean, self.phi, size)


@dataclass(frozen=True)
class PointMass:
    value: int

    def logpmf(self, y):
        return np.where(np.asarray(y) == self.value, 0.0, -np.inf)

    def cdf(self, y):
        return np.where(np.asarray(y) >= self.value, 1.0, 0.0)

    def ppf(self, q):
        return float(self.value)


def log_score(predictive, y_obs) -> float:
    """``-log P(Y = y_obs)``; +inf (with :class:`ZeroMassWarning`) at zero mass."""
    lp = float(np.asarray(predictive.logpmf(y_obs)))
    if lp == -math.inf:
        warnings.warn(f"predictive puts zero mass on y={y_obs}", ZeroMassWarning, stacklevel=2)
        return math.inf
    return -lp


def mean_log_score(predictives: Sequence, ys) -> float:
    return float(np.mean([log_score(p, y) for p, y in zip(predictives, ys)]))


def randomized_pit(predictives: Sequence, ys, seed) -> np.ndarray:
    """Randomized probability integral transform for count predictives."""
    rng = make_rng(seed)
    ys = np.asarray(ys)
    lo = np.array([p.cdf(y - 1) if y > 0 else 0.0 for p, y in zip(predictives, ys)], dtype=float)
    hi = np.array([p.cdf(y) for p, y in zip(predictives, ys)], dtype=float)
    return lo + rng.random(len(ys)) * (hi - lo)


# panel ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CountPanel:
    """Counts ``y[unit, period]`` with optional week/year labels and weights.

    ``weights[j, i]`` is the weight from unit j to unit i (zero diagonal).
    """

    y: np.ndarray
    week: Optional[np.ndarray] = None
    year: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    units: Optional[tuple] = None

    def __post_init__(self):
        y = np.atleast_2d(np.asarray(self.y))
        if np.any(y < 0) or np.any(y != np.round(y)):
            raise DomainError("counts must be nonnegative integers")
        y = y.astype(np.int64)
        y.setflags(write=False)
        object.__setattr__(self, "y", y)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (self.m, self.m):
                raise DomainError("weights must be an m x m matrix")
            if np.any(w < 0):
                raise DomainError("weights must be nonnegative")
            if np.any(np.diag(w) != 0):
                raise DomainError("weights must have a zero diagonal")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)
        for name in ("week", "year"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=np.int64)
                if v.shape != (self.T,):
                    raise DomainError(f"{name} labels must have length T")
                object.__setattr__(self, name, v)

    @property
    def m(self) -> int:
        return self.y.shape[0]

    @property
    def T(self) -> int:
        return self.y.shape[1]

    def permuted(self, perm) -> "CountPanel":
        perm = np.asarray(perm)
        w = None if self.weights is None else self.weights[np.ix_(perm, perm)]
        units = None if self.units is None else tuple(self.units[i] for i in perm)
        return CountPanel(self.y[perm], self.week, self.year, w, units)


# Farrington-type detector -----------------------------------------------------

FARRINGTON_FORMULA_ID = "farrington-loglinear-negbin"


@dataclass(frozen=True)
class FarringtonConfig:
    b: int = 5
    w_half: int = 3
    q: float = 0.995
    min_total: int = 5
    period: int = 52
    trend: bool = True

    def __post_init__(self):
        if self.b < 1:
            raise DomainError("b must be >= 1")
        if self.w_half < 0:
            raise DomainError("w_half must be >= 0")
        if not 0.5 < self.q < 1.0:
            raise DomainError("q must lie in (0.5, 1)")
        if self.period < 2 * self.w_half + 1:
            raise DomainError("reference window wider than a season")


@dataclass(frozen=True)
class Threshold:
    """Detector output at one index; ``status`` is "alarm", "ok" or "not-assessable"."""

    s: int
    y_s: int
    mu_s: float
    g_s: float
    status: str
    phi: float = math.nan
    reason: str = ""

    @property
    def alarm(self) -> bool:
        return self.status == "alarm"

    @property
    def assessable(self) -> bool:
        return self.status != "not-assessable"


def reference_indices(s: int, cfg: FarringtonConfig) -> np.ndarray:
    idx = [s - yr * cfg.period + d for yr in range(1, cfg.b + 1) for d in range(-cfg.w_half, cfg.w_half + 1)]
    return np.array(sorted(idx), dtype=np.int64)


def farrington_threshold(series, s: int, cfg: FarringtonConfig = FarringtonConfig()) -> Threshold:
    """Upper threshold for the count at index ``s`` from its reference values.

    A log-linear Poisson regression with a linear time trend is fitted to the
    counts at the same week +- ``w_half`` in the ``b`` previous seasons. The
    trend is dropped when it is not significant at 5% or pushes the
    prediction above the largest reference value. The dispersion ``phi`` is
    a moment estimate; the threshold ``g_s`` is the ``q`` quantile of a
    negative binomial with mean ``mu_s`` whose variance also carries the
    estimation variance of ``mu_s``.
    """
    y = np.asarray(series)
    y_s = int(y[s])
    idx = reference_indices(s, cfg)
    if idx[0] < 0:
        return Threshold(s, y_s, math.nan, math.nan, "not-assessable", reason="insufficient history")
    ref = y[idx].astype(float)
    if ref.sum() < cfg.min_total:
        return Threshold(s, y_s, math.nan, math.nan, "not-assessable", reason="reference total below minimum")

    t = (idx - s).astype(float) / cfg.period
    n_ref = len(ref)

    def fit(with_trend):
        X = np.column_stack([np.ones(n_ref), t]) if with_trend else np.ones((n_ref, 1))
        beta, cov, mu = poisson_irls(X, ref)
        p = X.shape[1]
        pearson = float(np.sum((ref - mu) ** 2 / mu)) / max(1, n_ref - p)
        return beta, cov * max(1.0, pearson), mu

    use_trend = cfg.trend
    if use_trend:
        beta, cov, mu = fit(True)
        z = beta[1] / math.sqrt(cov[1, 1]) if cov[1, 1] > 0 else math.inf
        if abs(z) < 1.96 or math.exp(beta[0]) > ref.max():
            use_trend = False
    if not use_trend:
        beta, cov, mu = fit(False)
    # prediction at offset 0: intercept only
    mu_s = float(math.exp(beta[0]))
    var_eta = float(cov[0, 0])
    k = n_ref - len(beta)
    phi = max(0.0, float(np.sum((ref - mu) ** 2 - ref)) / float(np.sum(mu**2))) * n_ref / max(1, k)
    phi_pred = phi + math.expm1(var_eta)
    g_s = float(nb_ppf(cfg.q, mu_s, phi_pred))
    status = "alarm" if y_s > g_s else "ok"
    return Threshold(s, y_s, mu_s, g_s, status, phi=phi)


@dataclass(frozen=True)
class DetectorResult:
    alarm_time: Optional[int]
    table: tuple

    def rows(self):
        for th in self.table:
            yield th.s, th.y_s, th.mu_s, th.g_s, th.status


def run_detector(series, cfg: FarringtonConfig = FarringtonConfig(), start: Optional[int] = None,
                 stop_at_alarm: bool = False) -> DetectorResult:
    """Assess every index from ``start`` on; alarm time is the first alarm (or None)."""
    y = np.asarray(series)
    if np.any(y < 0):
        raise DomainError("counts must be nonnegative")
    first = 0 if start is None else int(start)
    table = []
    alarm_time = None
    for s in range(first, len(y)):
        th = farrington_threshold(y, s, cfg)
        table.append(th)
        if th.alarm and alarm_time is None:
            alarm_time = s
            if stop_at_alarm:
                break
    return DetectorResult(alarm_time, tuple(table))


# endemic-epidemic model -----------------------------------------------------

@dataclass(frozen=True)
class EEModelSpec:
    """Endemic-epidemic model structure.

    ``mu[i,t] = lam * y[i,t-1] + nu_i * sum_j w[j,i] y[j,t-lag] + exp(eta[i,t])``
    with ``eta[i,t] = alpha_i + sum_s beta_s sin(w_s t) + delta_s cos(w_s t)``,
    ``w_s = 2 pi s / period`` and t the 0-based period index.
    """

    S: int = 0
    include_ar: bool = True
    include_neighbor: bool = False
    shared_alpha: bool = True
    shared_nu: bool = True
    period: int = 52
    lag: int = 1

    def __post_init__(self):
        if self.S < 0:
            raise DomainError("S must be >= 0")
        if self.lag < 1:
            raise DomainError("lag must be >= 1")
        if self.period <= 0:
            raise DomainError("period must be > 0")

    def first_t(self) -> int:
        return max(1, self.lag)

    def n_params(self, m: int) -> int:
        n_alpha = 1 if self.shared_alpha else m
        n_nu = (1 if self.shared_nu else m) if self.include_neighbor else 0
        return n_alpha + 2 * self.S + int(self.include_ar) + n_nu + 1

    def param_names(self, m: int) -> list:
        names = ["alpha"] if self.shared_alpha else [f"alpha[{i}]" for i in range(m)]
        names += [f"beta[{s + 1}]" for s in range(self.S)] + [f"delta[{s + 1}]" for s in range(self.S)]
        if self.include_ar:
            names.append("lambda")
        if self.include_neighbor:
            names += ["nu"] if self.shared_nu else [f"nu[{i}]" for i in range(m)]
        names.append("phi")
        return names

    def positive_mask(self, m: int) -> np.ndarray:
        names = self.param_names(m)
        return np.array([n.startswith(("lambda", "nu", "phi")) for n in names])


@dataclass(frozen=True)
class EEParams:
    alpha: np.ndarray
    beta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    delta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lam: float = 0.0
    nu: np.ndarray = field(default_factory=lambda: np.zeros(0))
    phi: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "delta", "nu"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        if self.lam < 0 or self.phi < 0 or np.any(self.nu < 0):
            raise DomainError("lambda, nu and phi must be nonnegative")

    def to_vector(self, spec: EEModelSpec) -> np.ndarray:
        """Natural-scale vector in :meth:`EEModelSpec.param_names` order."""
        parts = [self.alpha, self.beta[: spec.S], self.delta[: spec.S]]
        if spec.include_ar:
            parts.append([self.lam])
        if spec.include_neighbor:
            parts.append(self.nu)
        parts.append([self.phi])
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])

    @classmethod
    def from_vector(cls, spec: EEModelSpec, m: int, v) -> "EEParams":
        v = np.asarray(v, dtype=float)
        pos = 0
        n_alpha = 1 if spec.shared_alpha else m
        alpha = v[pos:pos + n_alpha]
        pos += n_alpha
        beta = v[pos:pos + spec.S]
        pos += spec.S
        delta = v[pos:pos + spec.S]
        pos += spec.S
        lam = 0.0
        if spec.include_ar:
            lam = float(v[pos])
            pos += 1
        nu = np.zeros(0)
        if spec.include_neighbor:
            n_nu = 1 if spec.shared_nu else m
            nu = v[pos:pos + n_nu]
            pos += n_nu
        return cls(alpha, beta, delta, lam, nu, float(v[pos]))


def _design(spec: EEModelSpec, T: int):
    t = np.arange(T, dtype=float)
    cols = [np.sin(2 * math.pi * (s + 1) * t / spec.period) for s in range(spec.S)]
    cols += [np.cos(2 * math.pi * (s + 1) * t / spec.period) for s in range(spec.S)]
    return np.array(cols).reshape(2 * spec.S, T)


def _components(panel: CountPanel, spec: EEModelSpec, p: EEParams):
    """Per-term arrays over the fitted window ``t = first_t .. T-1``."""
    m, T = panel.m, panel.T
    t0 = spec.first_t()
    y = panel.y.astype(float)
    seas = _design(spec, T)[:, t0:]
    alpha = np.broadcast_to(p.alpha, (m,))
    eta = alpha[:, None] + (p.beta @ seas[: spec.S] + p.delta @ seas[spec.S:])[None, :]
    endemic = np.exp(eta)
    ar = y[:, t0 - 1:T - 1] if spec.include_ar else np.zeros_like(endemic)
    if spec.include_neighbor:
        if panel.weights is None:
            raise DomainError("neighbour term needs a weight matrix")
        nb_in = panel.weights.T @ y[:, t0 - spec.lag:T - spec.lag]
        nu = np.broadcast_to(p.nu, (m,))
    else:
        nb_in = np.zeros_like(endemic)
        nu = np.zeros(m)
    mu = p.lam * ar + nu[:, None] * nb_in + endemic
    return y[:, t0:], mu, endemic, ar, nb_in, seas


def _check_panel(panel: CountPanel, spec: EEModelSpec):
    if panel.T < spec.first_t() + 1:
        raise DomainError("panel too short for the chosen lag")
    if not spec.shared_nu and spec.include_neighbor:
        if panel.m * panel.T < 50 * spec.n_params(panel.m):
            raise DomainError("per-unit nu needs m*T >= 50 * number of parameters")


def ee_loglik(panel: CountPanel, spec: EEModelSpec, params: EEParams) -> float:
    """NegBin log-likelihood summed over units and periods ``max(1, lag) .. T-1``."""
    _check_panel(panel, spec)
    y, mu, *_ = _components(panel, spec, params)
    return float(np.sum(nb_logpmf(y, mu, params.phi)))


def _to_theta(spec, m, params: EEParams):
    v = params.to_vector(spec)
    pos = spec.positive_mask(m)
    th = v.copy()
    th[pos] = np.log(np.maximum(v[pos], 1e-300))
    return th


def _from_theta(spec, m, theta):
    v = np.array(theta, dtype=float)
    pos = spec.positive_mask(m)
    v[pos] = np.exp(v[pos])
    return EEParams.from_vector(spec, m, v)


def _negll_and_grad(theta, panel, spec):
    m = panel.m
    p = _from_theta(spec, m, theta)
    y, mu, endemic, ar, nb_in, seas = _components(panel, spec, p)
    phi = p.phi
    ll = float(np.sum(nb_logpmf(y, mu, phi)))
    k = 1.0 / phi
    dmu = y / mu - (y + k) / (k + mu)
    dk = special.digamma(y + k) - special.digamma(k) + np.log(k / (k + mu)) + 1.0 - (y + k) / (k + mu)
    g = []
    de = dmu * endemic
    if spec.shared_alpha:
        g.append([de.sum()])
    else:
        g.append(de.sum(axis=1))
    if spec.S:
        g.append(seas @ de.sum(axis=0))
    if spec.include_ar:
        g.append([np.sum(dmu * ar) * p.lam])
    if spec.include_neighbor:
        dn = dmu * nb_in
        g.append([dn.sum() * p.nu[0]] if spec.shared_nu else dn.sum(axis=1) * p.nu)
    g.append([np.sum(dk) * (-k)])
    grad = np.concatenate([np.asarray(x, dtype=float) for x in g])
    return -ll, -grad


@dataclass(frozen=True, eq=False)
class EEFit:
    """Endemic-epidemic fit.

    ``theta`` and ``cov_theta`` are on the optimisation scale (log for
    lambda, nu, phi); ``params``/``cov`` are natural-scale with a delta-method
    covariance.
    """

    spec: EEModelSpec
    names: tuple
    params: EEParams
    theta: np.ndarray
    cov_theta: np.ndarray
    cov: np.ndarray
    loglik: float
    converged: bool
    grad_norm: float
    iterations: int
    boundary: tuple
    message: str = ""

    @property
    def estimates(self) -> np.ndarray:
        return self.params.to_vector(self.spec)

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.maximum(np.diag(self.cov), 0.0))

    def interval(self, name: str, z: float = 1.96) -> tuple:
        """Wald interval; for positive parameters it is built on the log scale.

        A positive parameter flagged at the boundary gets ``(0, est + z*se)``
        on the natural scale instead, since its log-scale curvature is
        meaningless there.
        """
        j = self.names.index(name)
        if name in self.boundary:
            est = float(self.estimates[j])
            return 0.0, est + z * float(self.se[j])
        se = math.sqrt(max(self.cov_theta[j, j], 0.0))
        lo, hi = self.theta[j] - z * se, self.theta[j] + z * se
        if name.startswith(("lambda", "nu", "phi")):
            return math.exp(lo), (math.exp(hi) if hi < 700 else math.inf)
        return lo, hi

    def report(self) -> dict:
        return {
            "names": list(self.names),
            "estimates": self.estimates.tolist(),
            "se": self.se.tolist(),
            "loglik": self.loglik,
            "converged": self.converged,
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "boundary": list(self.boundary),
            "message": self.message,
        }


def _default_start(panel, spec):
    m = panel.m
    mean = max(float(panel.y.mean()), 0.5)
    alpha = np.full(1 if spec.shared_alpha else m, math.log(mean / 2.0 if spec.include_ar else mean))
    nu = np.full((1 if spec.shared_nu else m) if spec.include_neighbor else 0, 0.05)
    return EEParams(alpha, np.zeros(spec.S), np.zeros(spec.S), 0.3 if spec.include_ar else 0.0, nu, 0.1)


def _fd_jacobian(fun, x, h=1e-5):
    n = len(x)
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (fun(x + e) - fun(x - e)) / (2 * h)
    return 0.5 * (J + J.T)


def ee_fit(panel: CountPanel, spec: EEModelSpec, start: Optional[EEParams] = None,
           gtol: float = 1e-6, maxiter: int = 2000) -> EEFit:
    """Maximum likelihood by BFGS on log-transformed positive parameters."""
    _check_panel(panel, spec)
    if panel.T < 3 + spec.lag:
        raise DomainError("need T >= 3 + lag")
    if panel.y.sum() == 0:
        raise DomainError("all counts are zero")
    m = panel.m
    start = _default_start(panel, spec) if start is None else start
    th0 = _to_theta(spec, m, start)
    res = optimize.minimize(_negll_and_grad, th0, args=(panel, spec), jac=True, method="BFGS",
                            options={"gtol": gtol, "maxiter": maxiter})
    theta = res.x
    negll, grad = _negll_and_grad(theta, panel, spec)
    gnorm = float(np.max(np.abs(grad)))
    names = tuple(spec.param_names(m))
    pos = spec.positive_mask(m)
    boundary = tuple(n for n, p_, th in zip(names, pos, theta) if p_ and th < math.log(1e-6))
    converged = bool(res.success) or gnorm < 1e-4 * max(1.0, abs(negll)) ** 0.5
    if not converged and not boundary:
        raise ConvergenceError(f"endemic-epidemic fit did not converge: {res.message} (gradient norm {gnorm:.3g})")
    H = _fd_jacobian(lambda th: _negll_and_grad(th, panel, spec)[1], theta)
    try:
        cov_theta = np.linalg.inv(H)
        if np.any(np.diag(cov_theta) < 0):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        cov_theta = np.linalg.pinv(H)
    params = _from_theta(spec, m, theta)
    jac = np.where(pos, params.to_vector(spec), 1.0)
    cov = cov_theta * np.outer(jac, jac)
    return EEFit(spec, names, params, theta, cov_theta, cov, -float(negll), converged, gnorm,
                 int(res.nit), boundary, str(res.message))


def ee_mean(panel: CountPanel, spec: EEModelSpec, params: EEParams, t: int) -> np.ndarray:
    """Conditional mean of every unit at period ``t`` given the history."""
    if not spec.first_t() <= t < panel.T + 1:
        raise DomainError("t outside the predictable range")
    m = panel.m
    y = panel.y.astype(float)
    seas = _design(spec, t + 1)[:, t]
    alpha = np.broadcast_to(params.alpha, (m,))
    eta = alpha + params.beta @ seas[: spec.S] + params.delta @ seas[spec.S:]
    mu = np.exp(eta)
    if spec.include_ar:
        mu = mu + params.lam * y[:, t - 1]
    if spec.include_neighbor:
        mu = mu + np.broadcast_to(params.nu, (m,)) * (panel.weights.T @ y[:, t - spec.lag])
    return mu


def ee_predict_one_step(fit: EEFit, panel: CountPanel, t: int) -> list:
    """Plug-in NegBin predictive for each unit at period ``t``."""
    mu = ee_mean(panel, fit.spec, fit.params, t)
    return [NegBinPredictive(float(v), fit.params.phi) for v in mu]


def ee_simulate(spec: EEModelSpec, params: EEParams, m: int, T: int, seed,
                weights=None, y0=None) -> CountPanel:
    """Simulate a panel from the endemic-epidemic model.

    The first ``max(1, lag)`` periods are drawn from the endemic part alone
    unless ``y0`` supplies them.
    """
    rng = make_rng(seed)
    t0 = spec.first_t()
    y = np.zeros((m, T), dtype=np.int64)
    w = None if weights is None else np.asarray(weights, dtype=float)
    alpha = np.broadcast_to(params.alpha, (m,))
    seas = _design(spec, T)
    eta = alpha[:, None] + (params.beta @ seas[: spec.S] + params.delta @ seas[spec.S:])[None, :]
    endemic = np.exp(eta)
    if y0 is not None:
        y[:, :t0] = np.asarray(y0, dtype=np.int64).reshape(m, t0)
    else:
        for t in range(t0):
            y[:, t] = nb_rvs(rng, endemic[:, t], params.phi)
    nu = np.broadcast_to(params.nu, (m,)) if spec.include_neighbor else np.zeros(m)
    for t in range(t0, T):
        mu = endemic[:, t].copy()
        if spec.include_ar:
            mu += params.lam * y[:, t - 1]
        if spec.include_neighbor:
            mu += nu * (w.T @ y[:, t - spec.lag])
        y[:, t] = nb_rvs(rng, mu, params.phi)
    return CountPanel(y, weights=w)

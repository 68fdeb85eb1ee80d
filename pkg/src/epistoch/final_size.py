"""Final-size estimators for R0 and the critical vaccination coverage.

Covers the isolated-pairs experiment, whole-population and sample final
sizes (with the initially-immune correction), and the multitype final-size
system with its next-generation matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, DomainError


@dataclass(frozen=True)
class Estimate:
    point: float
    se: float
    formula_id: str

    def __post_init__(self):
        if not math.isfinite(self.point):
            raise DomainError(f"{self.formula_id}: point estimate is not finite")
        if not self.se >= 0:
            raise DomainError(f"{self.formula_id}: negative standard error")

    def interval(self, z: float = 1.96):
        return self.point - z * self.se, self.point + z * self.se


@dataclass(frozen=True)
class PairExperiment:
    k: int
    Z: int

    def __post_init__(self):
        if self.k < 1 or not 0 <= self.Z <= self.k:
            raise DomainError("need k >= 1 and 0 <= Z <= k")


@dataclass(frozen=True)
class FinalSizeObservation:
    n: int
    Z: int
    n_immune: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("n must be >= 2")
        if not 0 <= self.Z <= self.n:
            raise DomainError("need 0 <= Z <= n")
        if self.n_immune < 0:
            raise DomainError("n_immune must be >= 0")

    @property
    def susceptible_fraction(self) -> float:
        return self.n / (self.n + self.n_immune)


@dataclass(frozen=True)
class SampleObservation:
    n: int
    m: int
    Z_m: int

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise DomainError("need 1 <= m <= n")
        if not 0 <= self.Z_m <= self.m:
            raise DomainError("need 0 <= Z_m <= m")


def estimate_pair_prob(exp: PairExperiment) -> Estimate:
    """Binomial estimate of the per-pair transmission probability."""
    p = exp.Z / exp.k
    return Estimate(p, math.sqrt(p * (1.0 - p) / exp.k), "pair-binomial")


def r0_from_local_contacts(p: float, m_local: int) -> float:
    """R0 = m p when each individual has ``m_local`` neighbours in its habitat."""
    if not 0.0 <= p <= 1.0 or m_local < 0:
        raise DomainError("need 0 <= p <= 1 and m_local >= 0")
    return m_local * p


def _final_size_residual(tau, r0):
    return 1.0 - tau - math.exp(-r0 * tau)


def solve_final_size(r0: float) -> float:
    """Positive root of ``1 - tau = exp(-R0 tau)``; 0 when R0 <= 1.

    Bisection on a bracket excluding the trivial root at 0.
    """
    if r0 < 0 or not math.isfinite(r0):
        raise DomainError("R0 must be finite and >= 0")
    if r0 <= 1.0:
        return 0.0
    hi = 1.0
    # the residual is positive on (0, tau*) and negative above; find a low end
    lo = 0.5
    while _final_size_residual(lo, r0) <= 0.0:
        lo *= 0.5
        if lo < 1e-300:
            return 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _final_size_residual(mid, r0) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo if abs(_final_size_residual(lo, r0)) <= abs(_final_size_residual(hi, r0)) else hi


def _fraction(z, n, what):
    if z <= 0 or z >= n:
        raise DomainError(
            f"{what}: estimator undefined for Z={z} of {n} "
            "(needs 0 < Z < n; log(0) or 0/0 at the boundary)"
        )
    return z / n


def _r0_point(f):
    return -math.log1p(-f) / f


def estimate_r0_final_size(obs: FinalSizeObservation, c_v: float = 1.0) -> Estimate:
    """R0 from a whole-population final size.

    ``c_v`` is the coefficient of variation of the infectious period (1 for
    exponential, 0 for fixed); 1 gives a conservative standard error. With
    initially immune individuals both point and se are divided by the
    susceptible fraction.
    """
    if c_v < 0:
        raise DomainError("c_v must be >= 0")
    f = _fraction(obs.Z, obs.n, "R0 final-size")
    r0 = _r0_point(f)
    se = math.sqrt((1.0 + c_v**2 * (1.0 - f) * r0**2) / (f * (1.0 - f))) / math.sqrt(obs.n)
    if obs.n_immune > 0:
        s = obs.susceptible_fraction
        return Estimate(r0 / s, se / s, "R0-final-size-immune")
    return Estimate(r0, se, "R0-final-size")


def _sample_terms(obs: SampleObservation, c_v: float):
    f = _fraction(obs.Z_m, obs.m, "sample final-size")
    r0 = _r0_point(f)
    outcome = (1.0 + c_v**2 * (1.0 - f) * r0**2) / (obs.n * f * (1.0 - f))
    sampling = (1.0 - obs.m / obs.n) * (1.0 - (1.0 - f) * r0) ** 2 / (obs.m * f * (1.0 - f))
    return f, r0, outcome, sampling


def sample_variance_terms(obs: SampleObservation, c_v: float = 1.0):
    """The two variance components (outcome, sampling) of the sample R0 estimator."""
    _, _, outcome, sampling = _sample_terms(obs, c_v)
    return outcome, sampling


def estimate_r0_sample(obs: SampleObservation, c_v: float = 1.0) -> Estimate:
    """R0 from the infected count in a random sample of size m."""
    if c_v < 0:
        raise DomainError("c_v must be >= 0")
    _, r0, outcome, sampling = _sample_terms(obs, c_v)
    return Estimate(r0, math.sqrt(outcome + sampling), "R0-sample")


def estimate_vc_final_size(obs: FinalSizeObservation, c_v: float = 1.0) -> Estimate:
    """Critical vaccination coverage 1 - 1/R0 from a whole-population final size.

    With initially immune individuals the R0 point is divided by the
    susceptible fraction s and the se multiplied by s.
    """
    if c_v < 0:
        raise DomainError("c_v must be >= 0")
    f = _fraction(obs.Z, obs.n, "vc final-size")
    r0 = _r0_point(f)
    se = math.sqrt((1.0 + c_v**2 * (1.0 - f) * r0**2) / (r0**4 * f * (1.0 - f))) / math.sqrt(obs.n)
    if obs.n_immune > 0:
        s = obs.susceptible_fraction
        return Estimate(1.0 - s / r0, se * s, "vc-final-size-immune")
    return Estimate(1.0 - f / (-math.log1p(-f)), se, "vc-final-size")


def estimate_vc_sample(obs: SampleObservation, c_v: float = 1.0) -> Estimate:
    if c_v < 0:
        raise DomainError("c_v must be >= 0")
    f, r0, outcome, sampling = _sample_terms(obs, c_v)
    se = math.sqrt((outcome + sampling) / r0**4)
    return Estimate(1.0 - f / (-math.log1p(-f)), se, "vc-sample")


# --- multitype -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MultitypeConfig:
    """Multitype SIR: ``lam[i, j]/n`` is the rate at which an infectious
    type-i individual infects a given susceptible of type j."""

    pi: np.ndarray
    lam: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float).ravel()
        lam = np.atleast_2d(np.asarray(self.lam, dtype=float))
        gamma = np.asarray(self.gamma, dtype=float).ravel()
        k = len(pi)
        if lam.shape != (k, k) or gamma.shape != (k,):
            raise DomainError("pi, lam and gamma dimensions disagree")
        if np.any(pi <= 0) or abs(pi.sum() - 1.0) > 1e-9:
            raise DomainError("type fractions must be positive and sum to 1")
        if np.any(lam < 0):
            raise DomainError("contact rates must be >= 0")
        if np.any(gamma <= 0):
            raise DomainError("recovery rates must be > 0")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "gamma", gamma)

    @property
    def k(self) -> int:
        return len(self.pi)

    @classmethod
    def factorized(cls, pi, alpha, beta, gamma):
        """Config with ``lam[i, j] = alpha[i] * beta[j]`` (infectivity x susceptibility)."""
        return cls(pi, np.outer(alpha, beta), gamma)

    def next_generation_matrix(self) -> np.ndarray:
        return self.lam * self.pi[None, :] / self.gamma[:, None]


def _multitype_map(cfg: MultitypeConfig, tau):
    force = (cfg.lam * (cfg.pi * tau / cfg.gamma)[:, None]).sum(axis=0)
    return 1.0 - np.exp(-force)


def ngm_r0(cfg: MultitypeConfig, tol: float = 1e-13, max_iter: int = 20_000) -> float:
    """Perron root of the next-generation matrix by power iteration.

    Iterates on ``M + I`` so that periodic (e.g. bipartite) matrices converge,
    stopping when the Rayleigh quotient settles. Reducible matrices with a
    repeated dominant root can converge very slowly; after ``max_iter`` steps
    the spectral radius is taken from a dense eigenvalue solve instead.
    """
    m = cfg.next_generation_matrix()
    k = m.shape[0]
    a = m + np.eye(k)
    x = np.ones(k) / math.sqrt(k)
    rq_old = math.inf
    for _ in range(max_iter):
        y = a @ x
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return 0.0
        y /= norm
        rq = float(y @ (a @ y))
        if abs(rq - rq_old) <= tol * max(1.0, rq) and np.max(np.abs(y - x)) <= 1e-7:
            return max(0.0, rq - 1.0)
        rq_old = rq
        x = y
    return float(np.max(np.abs(np.linalg.eigvals(m))))


def multitype_final_size_solve(
    cfg: MultitypeConfig, tol: float = 1e-12, max_iter: int = 100_000
) -> np.ndarray:
    """Largest solution of ``1 - tau_j = exp(-sum_i lam_ij pi_i tau_i / gamma_i)``.

    Fixed-point iteration from the all-ones vector decreases monotonically
    to the largest fixed point; a Newton polish finishes it. Returns the zero
    vector iff the next-generation R0 is at most one.
    """
    if ngm_r0(cfg) <= 1.0:
        return np.zeros(cfg.k)
    tau = np.ones(cfg.k)
    for _ in range(max_iter):
        new = _multitype_map(cfg, tau)
        done = np.max(np.abs(new - tau)) < 1e-6
        tau = new
        if done:
            break
    for _ in range(50):
        res = tau - _multitype_map(cfg, tau)
        if np.max(np.abs(res)) < tol:
            break
        e = np.exp(-(cfg.lam * (cfg.pi * tau / cfg.gamma)[:, None]).sum(axis=0))
        # d map_j / d tau_i = e_j * lam_ij pi_i / gamma_i
        jac = np.eye(cfg.k) - (e[None, :] * (cfg.lam * (cfg.pi / cfg.gamma)[:, None])).T
        tau = tau - np.linalg.solve(jac, res)
    res = np.max(np.abs(tau - _multitype_map(cfg, tau)))
    if res >= 1e-10:
        raise ConvergenceError(f"multitype final-size system: residual {res:.3e} after iteration cap")
    return tau


@dataclass(frozen=True)
class CalibrationResult:
    params: np.ndarray
    config: MultitypeConfig
    r0: float
    residual: float
    free: tuple = field(default=())


def _with_slots(template: MultitypeConfig, free, values):
    lam = template.lam.copy()
    gamma = template.gamma.copy()
    for (name, idx), v in zip(free, values):
        if name == "lam":
            lam[tuple(idx)] = v
        elif name == "gamma":
            gamma[int(idx)] = v
        else:
            raise DomainError(f"unknown parameter slot {name!r}")
    return MultitypeConfig(template.pi, lam, gamma)


def multitype_calibrate(
    tau_obs: Sequence[float],
    template: Optional[MultitypeConfig] = None,
    free: Sequence = (),
    builder: Optional[Callable[[np.ndarray], MultitypeConfig]] = None,
    x0: Optional[Sequence[float]] = None,
    tol: float = 1e-8,
) -> CalibrationResult:
    """Solve the k final-size equations for k free parameters.

    Free parameters are either slots of ``template`` given as
    ``("lam", (i, j))`` / ``("gamma", i)`` pairs, or the argument vector of a
    ``builder`` callable returning a config (e.g. a factorized
    ``alpha_i * beta_j`` template). Parameters are solved on the log scale.
    """
    tau = np.asarray(tau_obs, dtype=float)
    k = len(tau)
    if np.any(tau < 0) or np.any(tau >= 1):
        raise DomainError("observed fractions must lie in [0, 1)")
    if np.all(tau == 0):
        raise DomainError("observed outbreak is subcritical (all fractions 0): parameters unidentifiable")
    if builder is None:
        if template is None:
            raise DomainError("either template+free or builder is required")
        free = tuple((name, idx) for name, idx in free)
        n_free = len(free)

        def builder(x):
            return _with_slots(template, free, x)

        if x0 is None:
            x0 = [template.lam[tuple(i)] if nm == "lam" else template.gamma[int(i)] for nm, i in free]
    else:
        if x0 is None:
            raise DomainError("x0 is required with a builder")
        n_free = len(x0)
    if n_free != k:
        raise DomainError(f"need exactly {k} free parameters, got {n_free}")
    x0 = np.asarray(x0, dtype=float)
    x0 = np.where(x0 > 0, x0, 1.0)

    def residual(logx):
        cfg = builder(np.exp(logx))
        return 1.0 - tau - np.exp(-(cfg.lam * (cfg.pi * tau / cfg.gamma)[:, None]).sum(axis=0))

    sol = optimize.root(residual, np.log(x0), method="hybr", options={"xtol": 1e-14})
    res = float(np.max(np.abs(residual(sol.x))))
    # hybr may report stalled progress at machine precision; the residual decides
    if not np.isfinite(res) or res >= tol:
        raise ConvergenceError(
            f"calibration failed ({sol.message.strip()}); residual {res:.3e}, "
            "the Jacobian may be singular for this choice of free parameters"
        )
    params = np.exp(sol.x)
    cfg = builder(params)
    jac = np.atleast_2d(optimize.approx_fprime(sol.x, residual, 1e-7))
    if np.linalg.cond(jac) > 1e12:
        raise ConvergenceError("singular Jacobian at the solution: free parameters not identifiable")
    return CalibrationResult(params, cfg, ngm_r0(cfg), res, tuple(free))

"""Complete-data likelihood, ABC rejection and data-augmented MCMC for the
general stochastic epidemic, plus posterior summaries.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy import special, stats

from . import kernels
from ._rng import as_seed_sequence, make_rng
from .core import INFECTION, RECOVERY, EventLog
from .errors import DomainError, EmptyPosteriorError


class DegenerateChainWarning(UserWarning):
    """A chain coordinate never moved, so its ESS is undefined."""


# priors ---------------------------------------------------------------------

@dataclass(frozen=True)
class Prior:
    """Gamma(shape a, rate b) or Uniform(lo, hi) prior for one parameter."""

    kind: str
    a: float
    b: float

    def __post_init__(self):
        if self.kind == "gamma":
            if not (self.a > 0 and self.b > 0):
                raise DomainError("gamma prior needs shape > 0 and rate > 0")
        elif self.kind == "uniform":
            if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
                raise DomainError("uniform prior needs finite lo < hi")
        else:
            raise DomainError(f"unknown prior kind {self.kind!r}")

    @classmethod
    def gamma(cls, shape, rate):
        return cls("gamma", float(shape), float(rate))

    @classmethod
    def uniform(cls, lo, hi):
        return cls("uniform", float(lo), float(hi))

    @property
    def dist(self):
        if self.kind == "gamma":
            return stats.gamma(self.a, scale=1.0 / self.b)
        return stats.uniform(self.a, self.b - self.a)

    def sample(self, rng, size=None):
        if self.kind == "gamma":
            return rng.gamma(self.a, 1.0 / self.b, size)
        return rng.uniform(self.a, self.b, size)

    def logpdf(self, x):
        return self.dist.logpdf(x)

    def cdf(self, x):
        return self.dist.cdf(x)

    @classmethod
    def parse(cls, text: str):
        """``"gamma:a,b"`` or ``"uniform:lo,hi"``."""
        try:
            kind, rest = text.split(":", 1)
            a, b = (float(v) for v in rest.split(","))
        except ValueError as exc:
            raise DomainError(f"cannot parse prior {text!r}; expected kind:a,b") from exc
        return cls(kind.strip().lower(), a, b)


class PriorSpec(dict):
    """Ordered mapping of parameter name to :class:`Prior`."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        if not self:
            raise DomainError("prior needs at least one parameter")
        for name, p in self.items():
            if not isinstance(p, Prior):
                raise DomainError(f"prior for {name!r} is not a Prior")

    @property
    def names(self) -> tuple:
        return tuple(self.keys())

    def sample(self, rng, size: int) -> np.ndarray:
        return np.column_stack([p.sample(rng, size) for p in self.values()])

    def logpdf(self, theta) -> float:
        return float(sum(p.logpdf(v) for p, v in zip(self.values(), theta)))


# complete-data likelihood ---------------------------------------------------

@dataclass(frozen=True)
class _SirStats:
    feasible: bool
    n_infections: int  # non-index
    n_recoveries: int
    log_si: float  # sum over non-index infections of log(S I / n) just before
    int_si: float  # integral of S I / n
    int_i: float  # integral of I


def _sir_stats(inf_times, rem_times, n: int) -> _SirStats:
    """Sufficient statistics of an SIR path given infection / removal times.

    The earliest infection is the index case. Removal times may be shorter
    than infection times (individuals still infectious at the end are
    simply absent from ``rem_times``).
    """
    inf_times = np.asarray(inf_times, dtype=float)
    rem_times = np.asarray(rem_times, dtype=float)
    m = len(inf_times)
    if m == 0:
        return _SirStats(True, 0, 0, 0.0, 0.0, 0.0)
    t = np.concatenate([inf_times, rem_times])
    step = np.concatenate([np.ones(m, dtype=np.int64), -np.ones(len(rem_times), dtype=np.int64)])
    order = np.lexsort((-step, t))  # infections first at tied times
    t, step = t[order], step[order]
    i_after = np.cumsum(step)
    s_after = n - np.cumsum(step > 0)
    i_before = np.concatenate([[0], i_after[:-1]])
    s_before = np.concatenate([[n], s_after[:-1]])
    is_inf = step > 0
    nonindex = is_inf.copy()
    nonindex[0] = False
    if not is_inf[0] or np.any(i_after < 0):
        return _SirStats(False, m - 1, len(rem_times), -math.inf, math.nan, math.nan)
    if np.any(i_before[nonindex] <= 0) or np.any(i_after[:-1] == 0):
        return _SirStats(False, m - 1, len(rem_times), -math.inf, math.nan, math.nan)
    dt = np.diff(t)
    int_si = float(np.sum(s_after[:-1] * i_after[:-1] * dt) / n)
    int_i = float(np.sum(i_after[:-1] * dt))
    log_si = float(np.sum(np.log(s_before[nonindex] * i_before[nonindex] / n)))
    return _SirStats(True, int(nonindex.sum()), len(rem_times), log_si, int_si, int_i)


def _xlogy(k, x):
    return 0.0 if k == 0 else (k * math.log(x) if x > 0 else -math.inf)


def _loglik_from_stats(st: _SirStats, lam, gamma) -> float:
    if not st.feasible:
        return -math.inf
    ll = _xlogy(st.n_infections, lam) + st.log_si - lam * st.int_si
    ll += _xlogy(st.n_recoveries, gamma) - gamma * st.int_i
    return ll


def complete_data_loglik(log: EventLog, lam: float, gamma: float) -> float:
    """Log-likelihood of a fully observed SIR event log.

    Returns ``-inf`` when the log contains an event of zero intensity
    (e.g. an infection while no one is infectious, or any infection at
    ``lam == 0``).
    """
    if log.has_latency:
        raise DomainError("complete-data likelihood is defined for SIR logs only")
    if lam < 0 or gamma < 0:
        raise DomainError("rates must be nonnegative")
    inf = log.kind == INFECTION
    rec = log.kind == RECOVERY
    t_inf = log.time[inf]
    t_rec = log.time[rec]
    # when infectives remain, the observation window ends at the last event
    return _loglik_from_stats(_sir_stats(t_inf, t_rec, log.n), lam, gamma)


# ABC ------------------------------------------------------------------------

SUMMARY_NAMES = ("final_size", "duration", "peak_incidence", "peak_time")


@dataclass(frozen=True)
class AbcConfig:
    summaries: tuple = ("final_size",)
    epsilon: float = 0.0
    n_draws: int = 10_000
    n_pilot: int = 200
    standardize: bool = True

    def __post_init__(self):
        if self.n_draws < 1:
            raise DomainError("ABC needs at least one prior draw")
        if len(self.summaries) == 0:
            raise DomainError("ABC needs at least one summary")
        if not self.epsilon >= 0:
            raise DomainError("epsilon must be >= 0")


def epidemic_summaries(log: EventLog) -> dict:
    """Final size, duration, and peak/peak time of incidence in unit bins."""
    t = log.time[log.kind == INFECTION]
    counts = np.bincount(t.astype(np.int64)) if len(t) else np.zeros(1, dtype=np.int64)
    peak = int(np.argmax(counts))
    return {
        "final_size": float(len(t)),
        "duration": float(log.end_time),
        "peak_incidence": float(counts[peak]),
        "peak_time": float(peak),
    }


def gse_summary_simulator(n: int, summaries: Sequence[str] = ("final_size",)):
    """Simulator ``(theta=(lam, gamma), rng) -> summaries`` for ABC."""
    names = tuple(summaries)

    def simulate(theta, rng):
        t, k, s, i = kernels.gse_events(rng, int(n), float(theta[0]), float(theta[1]), 0.0, False)
        s_all = epidemic_summaries(EventLog(t, k, s, i, int(n)))
        return [s_all[name] for name in names]

    return simulate


@dataclass(frozen=True, eq=False)
class PosteriorSample:
    """Posterior draws, one row per retained draw."""

    names: tuple
    draws: np.ndarray
    acceptance: dict
    latent: Optional[np.ndarray] = None
    distances: Optional[np.ndarray] = None
    invalid_proposals: int = 0
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.draws)

    def column(self, name: str) -> np.ndarray:
        return self.draws[:, self.names.index(name)]

    @property
    def ess(self) -> np.ndarray:
        return np.array([effective_sample_size(self.draws[:, j]) for j in range(self.draws.shape[1])])


def _select(values, names):
    if isinstance(values, Mapping):
        return np.array([float(values[k]) for k in names])
    return np.atleast_1d(np.asarray(values, dtype=float))


def abc_rejection(
    simulator: Callable,
    observed,
    prior: PriorSpec,
    cfg: AbcConfig,
    seed,
) -> PosteriorSample:
    """ABC rejection sampling.

    ``simulator(theta, rng)`` returns summaries either as a mapping (filtered
    by ``cfg.summaries``) or as a sequence. Summaries are scaled by their
    standard deviation over ``cfg.n_pilot`` prior-predictive simulations
    drawn from a separate stream. Draw ``theta`` is kept when the Euclidean
    distance of scaled summaries is ``<= cfg.epsilon``.
    """
    ss = as_seed_sequence(seed)
    prior_ss, sim_ss, pilot_ss = ss.spawn(3)
    obs = _select(observed, cfg.summaries)

    scale = np.ones_like(obs)
    if cfg.standardize and cfg.n_pilot > 1:
        rng_p = make_rng(pilot_ss)
        th = prior.sample(rng_p, cfg.n_pilot)
        pilot = np.array([_select(simulator(row, rng_p), cfg.summaries) for row in th])
        sd = pilot.std(axis=0, ddof=1)
        scale = np.where(sd > 0, sd, 1.0)

    rng_prior = make_rng(prior_ss)
    rng_sim = make_rng(sim_ss)
    theta = prior.sample(rng_prior, cfg.n_draws)
    dist = np.empty(cfg.n_draws)
    for k in range(cfg.n_draws):
        s = _select(simulator(theta[k], rng_sim), cfg.summaries)
        if s.shape != obs.shape:
            raise DomainError("simulated and observed summaries differ in length")
        dist[k] = math.sqrt(float(np.sum(((s - obs) / scale) ** 2)))
    keep = dist <= cfg.epsilon
    n_acc = int(keep.sum())
    if n_acc == 0:
        raise EmptyPosteriorError(
            f"no draws accepted at epsilon={cfg.epsilon}; the smallest distance was "
            f"{dist.min():.6g}, so try a larger epsilon or more draws"
        )
    return PosteriorSample(
        names=prior.names,
        draws=theta[keep],
        acceptance={"rate": n_acc / cfg.n_draws, "accepted": n_acc, "draws": cfg.n_draws},
        distances=dist,
        diagnostics={"scale": scale.tolist(), "epsilon": cfg.epsilon},
    )


# data-augmented MCMC --------------------------------------------------------

def _initial_infection_times(rem, lower, index):
    m = len(rem)
    span = float(np.min(rem) - lower)
    eps = span / (4.0 * (m + 1))
    inf = np.empty(m)
    others = [j for j in range(m) if j != index]
    inf[index] = lower
    for rank, j in enumerate(others):
        inf[j] = lower + eps * (rank + 1)
    return inf


def da_mcmc_gse(
    removal_times,
    n: int,
    prior: PriorSpec,
    iterations: int,
    seed,
    index: Optional[int] = None,
    index_time: Optional[float] = None,
    time_origin: Optional[float] = None,
    update_infection_times: bool = True,
    infection_times=None,
    burn_in: float = 0.2,
    thin: int = 1,
    latent_updates: int = 1,
    rw_scale: float = 0.3,
    keep_latent: bool = False,
) -> PosteriorSample:
    """Data-augmented MCMC for (lambda, gamma) given removal times.

    Either ``index_time`` (the known infection time of individual ``index``,
    default the earliest removal) or ``time_origin`` (a lower bound on all
    infection times, with a flat prior on each) must be supplied. Each
    iteration proposes ``latent_updates`` infection times, each uniform on
    (lower bound, own removal time) and accepted by the complete-data
    likelihood ratio; proposals giving an infeasible path are rejected and
    counted. Gamma priors give Gibbs updates for the rates; uniform priors
    fall back to a log random-walk Metropolis step.
    """
    rem = np.asarray(removal_times, dtype=float)
    m = len(rem)
    if m == 0:
        raise DomainError("need at least one removal time")
    if m > n:
        raise DomainError("more removals than individuals")
    if set(prior.names) != {"lambda", "gamma"}:
        raise DomainError("prior must specify 'lambda' and 'gamma'")
    if iterations < 1:
        raise DomainError("iterations must be >= 1")
    if (index_time is None) == (time_origin is None):
        raise DomainError("supply exactly one of index_time or time_origin")

    if index_time is not None:
        index = int(np.argmin(rem)) if index is None else int(index)
        lower = float(index_time)
        if np.any(rem <= lower):
            raise DomainError("removal times must follow the index infection time")
        movable = np.array([j for j in range(m) if j != index], dtype=np.int64)
    else:
        index = None
        lower = float(time_origin)
        if np.any(rem <= lower):
            raise DomainError("removal times must follow the time origin")
        movable = np.arange(m)

    if infection_times is None:
        inf = _initial_infection_times(rem, lower, index if index is not None else int(np.argmin(rem)))
    else:
        inf = np.array(infection_times, dtype=float)
        if inf.shape != rem.shape:
            raise DomainError("infection_times must match removal_times")
    if index is not None:
        inf[index] = lower
    st = _sir_stats(inf, rem, n)
    if not st.feasible:
        raise DomainError("initial infection times give an infeasible path")

    p_lam, p_gam = prior["lambda"], prior["gamma"]
    rng = make_rng(seed)
    lam = p_lam.sample(rng) if p_lam.kind == "uniform" else (p_lam.a + st.n_infections) / (p_lam.b + st.int_si)
    gam = p_gam.sample(rng) if p_gam.kind == "uniform" else (p_gam.a + st.n_recoveries) / (p_gam.b + st.int_i)
    ll = _loglik_from_stats(st, lam, gam)

    n_keep_from = int(math.floor(burn_in * iterations))
    out = []
    latent_out = []
    counts = {"latent_accepted": 0, "latent_proposed": 0, "lambda_accepted": 0, "gamma_accepted": 0}
    invalid = 0

    def rate_step(value, which, prior_r, stats_now):
        if prior_r.kind == "gamma":
            shape = prior_r.a + (stats_now.n_infections if which == "lambda" else stats_now.n_recoveries)
            rate = prior_r.b + (stats_now.int_si if which == "lambda" else stats_now.int_i)
            new = rng.gamma(shape, 1.0 / rate)
            counts[which + "_accepted"] += 1
            return new
        prop = value * math.exp(rw_scale * rng.standard_normal())
        if not prior_r.a <= prop <= prior_r.b:
            return value
        if which == "lambda":
            ll_new = _loglik_from_stats(stats_now, prop, gam)
        else:
            ll_new = _loglik_from_stats(stats_now, lam, prop)
        log_a = ll_new - ll + math.log(prop) - math.log(value)
        if math.log(rng.random()) < log_a:
            counts[which + "_accepted"] += 1
            return prop
        return value

    for it in range(iterations):
        if update_infection_times and len(movable):
            for _ in range(latent_updates):
                j = movable[int(rng.integers(len(movable)))]
                old = inf[j]
                inf[j] = rng.uniform(lower, rem[j])
                counts["latent_proposed"] += 1
                st_new = _sir_stats(inf, rem, n)
                u = rng.random()
                if not st_new.feasible:
                    invalid += 1
                    inf[j] = old
                    continue
                ll_new = _loglik_from_stats(st_new, lam, gam)
                if math.log(u) < ll_new - ll:
                    st, ll = st_new, ll_new
                    counts["latent_accepted"] += 1
                else:
                    inf[j] = old
        lam = rate_step(lam, "lambda", p_lam, st)
        ll = _loglik_from_stats(st, lam, gam)
        gam = rate_step(gam, "gamma", p_gam, st)
        ll = _loglik_from_stats(st, lam, gam)
        if it >= n_keep_from and (it - n_keep_from) % thin == 0:
            out.append((lam, gam))
            if keep_latent:
                latent_out.append(inf.copy())

    if not out:
        raise EmptyPosteriorError("burn-in discards every iteration")
    draws = np.array(out)
    acc = {
        "latent": counts["latent_accepted"] / counts["latent_proposed"] if counts["latent_proposed"] else math.nan,
        "lambda": counts["lambda_accepted"] / iterations,
        "gamma": counts["gamma_accepted"] / iterations,
    }
    return PosteriorSample(
        names=("lambda", "gamma"),
        draws=draws,
        acceptance=acc,
        latent=np.array(latent_out) if keep_latent else None,
        invalid_proposals=invalid,
        diagnostics={"iterations": iterations, "burn_in": n_keep_from, "thin": thin},
    )


# summaries ------------------------------------------------------------------

def _autocorr(x):
    x = x - x.mean()
    nfft = 1 << (2 * len(x) - 1).bit_length()
    f = np.fft.rfft(x, nfft)
    ac = np.fft.irfft(f * np.conj(f), nfft)[: len(x)]
    return ac / ac[0]


def effective_sample_size(x) -> float:
    """ESS from the autocorrelation sum, truncated at the first negative lag.

    Returns NaN (with :class:`DegenerateChainWarning`) for a constant chain.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 2 or np.all(x == x[0]):
        warnings.warn("chain is constant; effective sample size undefined", DegenerateChainWarning, stacklevel=2)
        return math.nan
    rho = _autocorr(x)
    neg = np.nonzero(rho[1:] < 0)[0]
    k = neg[0] + 1 if len(neg) else n
    tau = 1.0 + 2.0 * float(np.sum(rho[1:k]))
    return float(min(n, n / tau))


@dataclass(frozen=True)
class ParameterSummary:
    name: str
    mean: float
    lower: float
    upper: float
    ess: float
    degenerate: bool


def posterior_summary(sample: PosteriorSample, level: float = 0.95) -> list:
    """Mean, equal-tailed credible interval and ESS per coordinate."""
    if len(sample) == 0:
        raise EmptyPosteriorError("empty posterior sample")
    alpha = (1.0 - level) / 2.0
    out = []
    for j, name in enumerate(sample.names):
        x = sample.draws[:, j]
        ess = effective_sample_size(x)
        lo, hi = np.quantile(x, [alpha, 1.0 - alpha])
        out.append(ParameterSummary(name, float(x.mean()), float(lo), float(hi), ess, bool(math.isnan(ess))))
    return out


def monte_carlo_se(x) -> float:
    """Standard error of the mean of a chain, using its ESS."""
    x = np.asarray(x, dtype=float)
    ess = effective_sample_size(x)
    return float(x.std(ddof=1) / math.sqrt(ess))


def rank_uniformity_pvalue(ranks, n_bins: int, n_max: int) -> float:
    """Chi-square p-value that integer ranks in ``0..n_max`` are uniform."""
    ranks = np.asarray(ranks)
    edges = np.linspace(0, n_max + 1, n_bins + 1)
    obs, _ = np.histogram(ranks, bins=edges)
    exp = np.diff(np.floor(edges)) * len(ranks) / (n_max + 1)
    return float(special.chdtrc(n_bins - 1, np.sum((obs - exp) ** 2 / exp)))

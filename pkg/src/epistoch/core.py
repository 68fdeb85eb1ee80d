"""Model parameterizations, event-driven simulators and event logs.

The general stochastic epidemic is a continuous-time Markov chain on
(S, I, R): infections occur at rate ``lam*S*I/n`` and recoveries at rate
``gamma*I``. Variants with a fixed infectious period (continuous-time
Reed-Frost) and an exponential latent stage (SEIR) share the same kernel.
"""
from __future__ import annotations

import functools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from ._rng import make_rng, replicate_seed
from .errors import DomainError

INFECTION = kernels.INFECTION
END_LATENCY = kernels.END_LATENCY
RECOVERY = kernels.RECOVERY
KIND_NAMES = {INFECTION: "infection", END_LATENCY: "end-latency", RECOVERY: "recovery"}
KIND_CODES = {v: k for k, v in KIND_NAMES.items()}

DEFAULT_MAJOR_CUTOFF = 0.1


def basic_reproduction_number(lam: float, gamma: float) -> float:
    """R0 = lam / gamma for the general stochastic epidemic."""
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    return lam / gamma


def vaccinated_reproduction_number(r0: float, v: float) -> float:
    """Reproduction number after immunizing a fraction ``v`` before the outbreak."""
    if not 0.0 <= v <= 1.0:
        raise DomainError("vaccination fraction must lie in [0, 1]")
    return (1.0 - v) * r0


def critical_vaccination_coverage(r0: float) -> float:
    """Smallest immunized fraction that prevents a major outbreak; 0 when R0 <= 1."""
    if r0 <= 0:
        raise DomainError("R0 must be positive")
    return max(0.0, 1.0 - 1.0 / r0)


@dataclass(frozen=True)
class GseParams:
    """Parameters of the general stochastic epidemic and its variants.

    ``latent_rate=None`` gives SIR dynamics; a positive value adds an
    exponential latent stage (SEIR). ``infectious_period`` is
    ``"exponential"`` (rate ``gamma``) or ``"fixed"`` (length ``1/gamma``).
    """

    lam: float
    gamma: float
    n: int
    infectious_period: str = "exponential"
    latent_rate: Optional[float] = None

    def __post_init__(self):
        if not self.lam >= 0:
            raise DomainError("lam must be >= 0")
        if not self.gamma > 0:
            raise DomainError("gamma must be > 0")
        if int(self.n) != self.n or self.n < 2:
            raise DomainError("n must be an integer >= 2")
        if self.infectious_period not in ("exponential", "fixed"):
            raise DomainError("infectious_period must be 'exponential' or 'fixed'")
        if self.latent_rate is not None and not self.latent_rate > 0:
            raise DomainError("latent_rate must be > 0 when given")

    @property
    def r0(self) -> float:
        return self.lam / self.gamma


@dataclass(frozen=True)
class ReedFrostParams:
    n: int
    p: float
    i0: int = 1

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DomainError("p must lie in [0, 1]")
        if not 1 <= self.i0 < self.n:
            raise DomainError("need 1 <= i0 < n")


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EventLog:
    """Time-ordered infection, end-of-latency and recovery events.

    ``infector`` is -1 for the index case and for non-infection events.
    ``household`` optionally maps each individual id to a household id.
    """

    time: np.ndarray
    kind: np.ndarray
    subject: np.ndarray
    infector: np.ndarray
    n: int
    household: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "time", _frozen(self.time, np.float64))
        object.__setattr__(self, "kind", _frozen(self.kind, np.int8))
        object.__setattr__(self, "subject", _frozen(self.subject, np.int64))
        object.__setattr__(self, "infector", _frozen(self.infector, np.int64))
        if self.household is not None:
            object.__setattr__(self, "household", _frozen(self.household, np.int64))
        lengths = {len(self.time), len(self.kind), len(self.subject), len(self.infector)}
        if len(lengths) != 1:
            raise DomainError("event arrays must have equal length")

    def __len__(self):
        return len(self.time)

    def __eq__(self, other):
        if not isinstance(other, EventLog):
            return NotImplemented
        same_house = (self.household is None and other.household is None) or (
            self.household is not None
            and other.household is not None
            and np.array_equal(self.household, other.household)
        )
        return (
            self.n == other.n
            and np.array_equal(self.time, other.time)
            and np.array_equal(self.kind, other.kind)
            and np.array_equal(self.subject, other.subject)
            and np.array_equal(self.infector, other.infector)
            and same_house
        )

    @property
    def end_time(self) -> float:
        return float(self.time[-1]) if len(self.time) else 0.0

    @property
    def has_latency(self) -> bool:
        return bool(np.any(self.kind == END_LATENCY))

    def infection_times(self) -> dict:
        mask = self.kind == INFECTION
        return dict(zip(self.subject[mask].tolist(), self.time[mask].tolist()))

    def tobytes(self) -> bytes:
        parts = [self.time, self.kind, self.subject, self.infector]
        if self.household is not None:
            parts.append(self.household)
        return np.int64(self.n).tobytes() + b"".join(p.tobytes() for p in parts)

    def counts(self):
        """Compartment counts just after each event.

        Returns ``(time, S, E, I, R)``. Individuals in a latent stage count
        as E; without latency E is identically zero.
        """
        latent = self.has_latency
        inf = self.kind == INFECTION
        lat = self.kind == END_LATENCY
        rec = self.kind == RECOVERY
        d_s = -inf.astype(np.int64)
        if latent:
            d_e = inf.astype(np.int64) - lat
            d_i = lat.astype(np.int64) - rec
        else:
            d_e = np.zeros(len(self), dtype=np.int64)
            d_i = inf.astype(np.int64) - rec
        s = self.n + np.cumsum(d_s)
        e = np.cumsum(d_e)
        i = np.cumsum(d_i)
        r = np.cumsum(rec.astype(np.int64))
        return self.time, s, e, i, r

    def validate(self) -> None:
        """Check the structural invariants; raises DomainError on violation."""
        t = self.time
        if len(t) == 0:
            raise DomainError("empty event log")
        if np.any(np.diff(t) < 0) or t[0] < 0:
            raise DomainError("event times must be nonnegative and nondecreasing")
        infected_at = {}
        infectious_from = {}
        recovered_at = {}
        latent = self.has_latency
        index_seen = False
        for time, kind, subj, src in zip(
            t.tolist(), self.kind.tolist(), self.subject.tolist(), self.infector.tolist()
        ):
            if not 0 <= subj < self.n:
                raise DomainError(f"subject {subj} outside 0..n-1")
            if kind == INFECTION:
                if subj in infected_at:
                    raise DomainError(f"individual {subj} infected twice")
                if src < 0:
                    if index_seen:
                        raise DomainError("more than one index case")
                    index_seen = True
                elif not (
                    src in infectious_from
                    and infectious_from[src] <= time
                    and (src not in recovered_at or recovered_at[src] > time)
                ):
                    raise DomainError(f"infector {src} not infectious at t={time}")
                infected_at[subj] = time
                if not latent:
                    infectious_from[subj] = time
            elif kind == END_LATENCY:
                if subj not in infected_at or subj in infectious_from:
                    raise DomainError(f"bad end-latency event for {subj}")
                infectious_from[subj] = time
            elif kind == RECOVERY:
                if subj not in infectious_from or subj in recovered_at:
                    raise DomainError(f"bad recovery event for {subj}")
                if not time > infected_at[subj]:
                    raise DomainError(f"recovery of {subj} precedes its infection")
                recovered_at[subj] = time
            else:
                raise DomainError(f"unknown event kind {kind}")
        _, s, e, i, r = self.counts()
        if np.any(s + e + i + r != self.n) or np.any(np.minimum.reduce([s, e, i, r]) < 0):
            raise DomainError("compartment counts inconsistent with n")


def simulate_gse(params: GseParams, seed) -> EventLog:
    """Run one outbreak from a single index case (id 0) until no infectives remain."""
    rng = make_rng(seed)
    latent = params.latent_rate if params.latent_rate is not None else 0.0
    t, k, s, i = kernels.gse_events(
        rng,
        int(params.n),
        float(params.lam),
        float(params.gamma),
        float(latent),
        params.infectious_period == "fixed",
    )
    return EventLog(t, k, s, i, int(params.n))


def simulate_reed_frost(params: ReedFrostParams, seed) -> list:
    """Chain-binomial generation sizes ``[i0, I_1, ...]`` up to extinction.

    Each susceptible escapes all ``I_t`` current infectives with probability
    ``(1-p)**I_t``.
    """
    rng = make_rng(seed)
    sizes = [int(params.i0)]
    susceptible = int(params.n) - int(params.i0)
    infectives = int(params.i0)
    q = 1.0 - params.p
    while infectives > 0 and susceptible > 0:
        new = int(rng.binomial(susceptible, 1.0 - q**infectives))
        if new == 0:
            break
        sizes.append(new)
        susceptible -= new
        infectives = new
    return sizes


def final_size(log: EventLog) -> int:
    """Number of individuals ever infected, index case included.

    Raises DomainError when some infected individual never recovers.
    """
    infected = log.subject[log.kind == INFECTION]
    recovered = log.subject[log.kind == RECOVERY]
    if len(infected) != len(recovered) or set(infected.tolist()) != set(recovered.tolist()):
        raise DomainError("incomplete event log: some infective never recovers")
    return int(len(infected))


def classify_major(z: int, n: int, cutoff_fraction: float = DEFAULT_MAJOR_CUTOFF) -> bool:
    """True iff ``z > cutoff_fraction * n`` (strict)."""
    if not 0 <= z <= n:
        raise DomainError("need 0 <= Z <= n")
    if not 0.0 < cutoff_fraction < 1.0:
        raise DomainError("cutoff_fraction must lie in (0, 1)")
    return z > cutoff_fraction * n


@functools.singledispatch
def simulate(params, seed):
    """Run one replicate of the model described by ``params``."""
    raise TypeError(f"no simulator registered for {type(params).__name__}")


simulate.register(GseParams, simulate_gse)
simulate.register(ReedFrostParams, simulate_reed_frost)


@dataclass(frozen=True)
class ReplicateSummary:
    final_sizes: np.ndarray
    major_fraction: float
    grid: np.ndarray
    mean_s: np.ndarray
    mean_i: np.ndarray
    mean_r: np.ndarray


def _run_one(params, seed):
    out = simulate(params, seed)
    if isinstance(out, EventLog):
        t, s, e, i, r = out.counts()
        return final_size(out), (t, s, e + i, r, out.n)
    sizes = np.asarray(out, dtype=np.int64)
    return int(sizes.sum()), sizes


def _trajectory_on_grid(traj, grid):
    t, s, i, r, n = traj
    idx = np.searchsorted(t, grid, side="right") - 1
    # before the first event the state is (n-1, 1, 0); idx >= 0 since t[0] = 0
    idx = np.clip(idx, 0, len(t) - 1)
    return s[idx], i[idx], r[idx]


def replicate(
    params,
    R: int,
    master_seed,
    cutoff_fraction: float = DEFAULT_MAJOR_CUTOFF,
    n_grid: int = 101,
    workers: Optional[int] = None,
) -> ReplicateSummary:
    """Run ``R`` independent replicates; replicate i uses seed ``(master_seed, i)``.

    The mean trajectory is reported on ``n_grid`` equally spaced times from 0
    to the longest outbreak (event-log models) or per generation (Reed-Frost).
    """
    if R < 1:
        raise DomainError("R must be >= 1")
    seeds = [replicate_seed(master_seed, i) for i in range(R)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, [params] * R, seeds, chunksize=max(1, R // (4 * workers))))
    else:
        results = [_run_one(params, s) for s in seeds]
    sizes = np.array([z for z, _ in results], dtype=np.int64)
    n = int(params.n)
    major = float(np.mean([classify_major(int(z), n, cutoff_fraction) for z in sizes]))
    trajs = [tr for _, tr in results]
    if isinstance(trajs[0], tuple):
        t_max = max(float(tr[0][-1]) for tr in trajs)
        grid = np.linspace(0.0, t_max, n_grid)
        acc = np.zeros((3, n_grid))
        for tr in trajs:
            acc += np.array(_trajectory_on_grid(tr, grid), dtype=float)
        acc /= R
        return ReplicateSummary(sizes, major, grid, acc[0], acc[1], acc[2])
    gens = max(len(tr) for tr in trajs)
    grid = np.arange(gens, dtype=float)
    acc_i = np.zeros(gens)
    for tr in trajs:
        acc_i[: len(tr)] += tr
    acc_i /= R
    cum = np.cumsum(acc_i)
    return ReplicateSummary(sizes, major, grid, n - cum, acc_i, cum - acc_i)


def equilibrium_gap_fraction(sizes, n: int, low: float = 0.05, high: float = 0.3) -> float:
    """Fraction of final sizes falling strictly between ``low*n`` and ``high*n``.

    A near-zero value with mass on both sides indicates the bimodal
    minor/major split of a supercritical epidemic.
    """
    z = np.asarray(sizes, dtype=float)
    return float(np.mean((z >= low * n) & (z <= high * n)))

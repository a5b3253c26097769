"""Generalized counting process (GCP): analytic quantities and samplers.

A GCP with rates ``lambda_1..lambda_k`` jumps by ``j`` at rate ``lambda_j``;
equivalently ``M(t) = sum_j j N_j(t)`` with independent Poisson ``N_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .core import DomainError, PmfVector, chernoff_upper_tail, gaussian_cutoff
from .kernels import enumerate_weighted_partitions


@dataclass(frozen=True)
class GcpParams:
    """Rates ``(lambda_1, ..., lambda_k)``; ``lambda_j`` drives jumps of size ``j``."""

    rates: tuple[float, ...]

    def __init__(self, rates: Sequence[float]):
        rates = tuple(float(r) for r in np.atleast_1d(rates))
        if len(rates) < 1:
            raise DomainError("a GCP needs at least one rate")
        if not all(math.isfinite(r) and r > 0 for r in rates):
            raise DomainError(f"GCP rates must be finite and positive, got {rates}")
        object.__setattr__(self, "rates", rates)

    @property
    def k(self) -> int:
        return len(self.rates)

    @property
    def total_rate(self) -> float:
        return math.fsum(self.rates)

    @property
    def jumps(self) -> np.ndarray:
        return np.arange(1, self.k + 1)

    @property
    def mean_rate(self) -> float:
        """``sum_j j lambda_j``."""
        return math.fsum(j * r for j, r in enumerate(self.rates, 1))

    @property
    def second_rate(self) -> float:
        """``sum_j j^2 lambda_j``."""
        return math.fsum(j * j * r for j, r in enumerate(self.rates, 1))

    def log_mgf(self, theta: float, t: float) -> float:
        return t * math.fsum(r * math.expm1(j * theta) for j, r in enumerate(self.rates, 1))


# ---------------------------------------------------------------------------
# analytic
# ---------------------------------------------------------------------------

def gcp_pmf(params: GcpParams, n: int, t: float) -> float:
    """``Pr{M(t) = n}`` as the sum over ``Omega(k, n)`` of Poisson products."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if n < 0:
        return 0.0
    if t == 0:
        return 1.0 if n == 0 else 0.0
    lam = params.rates
    log_t = math.log(t)
    terms = []
    for x in enumerate_weighted_partitions(params.k, n):
        lt = -params.total_rate * t
        for xj, rj in zip(x, lam):
            if xj:
                lt += xj * (math.log(rj) + log_t) - math.lgamma(xj + 1)
        terms.append(math.exp(lt))
    return math.fsum(terms)


def gcp_tail_bound(params: GcpParams, n_max: int, t: float) -> float:
    """Chernoff bound on ``Pr{M(t) > n_max}``."""
    if t == 0:
        return 0.0
    return chernoff_upper_tail(lambda th: params.log_mgf(th, t), n_max + 1,
                               theta_max=min(20.0, 700.0 / params.k))


def gcp_cutoff(params: GcpParams, t: float) -> int:
    mean, var = gcp_moments(params, t)
    return gaussian_cutoff(mean, var)


def gcp_pmf_vector(params: GcpParams, t: float, n_max: int | None = None) -> PmfVector:
    """``Pr{M(t) = n}`` for ``n = 0..n_max`` by the compound-Poisson recursion.

    ``p(n) = (t/n) sum_j j lambda_j p(n-j)``; evaluated in log space when
    ``lambda t`` is large enough for ``exp(-lambda t)`` to underflow.
    ``tail_bound`` is a Chernoff bound on the mass above ``n_max``.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    if n_max is None:
        n_max = gcp_cutoff(params, t)
    if t == 0:
        probs = np.zeros(n_max + 1)
        probs[0] = 1.0
        return PmfVector(probs, 0.0, {"t": 0.0})
    lam = np.asarray(params.rates)
    k = params.k
    jl = params.jumps * lam
    total = params.total_rate
    if total * t < 500.0:
        p = np.zeros(n_max + 1)
        p[0] = math.exp(-total * t)
        for n in range(1, n_max + 1):
            lo = max(0, n - k)
            # p[n-j] for j=1..min(k,n)
            prev = p[lo:n][::-1]
            p[n] = t / n * float(np.dot(jl[: len(prev)], prev))
    else:
        logp = np.full(n_max + 1, -np.inf)
        logp[0] = -total * t
        log_jl = np.log(jl)
        for n in range(1, n_max + 1):
            lo = max(0, n - k)
            prev = logp[lo:n][::-1]
            logp[n] = math.log(t / n) + special.logsumexp(log_jl[: len(prev)] + prev)
        p = np.exp(logp)
    return PmfVector(p, gcp_tail_bound(params, n_max, t), {"t": float(t)})


def gcp_pgf(params: GcpParams, u: complex, t: float):
    """``exp(-t sum_j lambda_j (1 - u^j))``."""
    if abs(u) > 1 + 1e-15:
        raise DomainError("|u| must not exceed 1")
    val = np.exp(-t * sum(r * (1 - u ** j) for j, r in enumerate(params.rates, 1)))
    return complex(val) if isinstance(u, complex) else float(val)


def gcp_moments(params: GcpParams, t: float) -> tuple[float, float]:
    if t < 0:
        raise DomainError("t must be non-negative")
    return params.mean_rate * t, params.second_rate * t


# ---------------------------------------------------------------------------
# rate schedules for the non-homogeneous layer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateSchedule:
    """Piecewise-constant rates ``mu_{j0}(t)`` on ``[breaks[i], breaks[i+1])``.

    ``rates`` has shape ``(k0, len(breaks) - 1)``; ``breaks[0]`` must be 0.
    The cumulative rate ``rho_{j0}`` is exact (piecewise linear).
    """

    breaks: np.ndarray
    rates: np.ndarray
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        b = np.asarray(self.breaks, dtype=float)
        r = np.atleast_2d(np.asarray(self.rates, dtype=float))
        if b.ndim != 1 or len(b) < 2 or b[0] != 0.0 or np.any(np.diff(b) <= 0):
            raise DomainError("breaks must start at 0 and increase strictly")
        if r.shape[1] != len(b) - 1:
            raise DomainError("rates must have one column per interval")
        if np.any(r < 0) or not np.all(np.isfinite(r)):
            raise DomainError("scheduled rates must be finite and non-negative")
        cum = np.zeros((r.shape[0], len(b)))
        cum[:, 1:] = np.cumsum(r * np.diff(b), axis=1)
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "rates", r)
        object.__setattr__(self, "_cum", cum)

    @classmethod
    def constant(cls, rates: Sequence[float], horizon: float) -> "RateSchedule":
        return cls(np.array([0.0, float(horizon)]), np.asarray(rates, dtype=float)[:, None])

    @classmethod
    def from_functions(cls, funcs: Sequence[Callable[[float], float]], grid: Sequence[float]) -> "RateSchedule":
        """Approximate rate functions by their midpoint values on ``grid``."""
        g = np.asarray(grid, dtype=float)
        mids = 0.5 * (g[:-1] + g[1:])
        return cls(g, np.array([[f(m) for m in mids] for f in funcs]))

    @property
    def k0(self) -> int:
        return self.rates.shape[0]

    @property
    def horizon(self) -> float:
        return float(self.breaks[-1])

    def _check(self, t: float) -> None:
        if t < 0 or t > self.horizon * (1 + 1e-12):
            raise DomainError(f"t={t} outside schedule support [0, {self.horizon}]")

    def mu(self, t: float) -> np.ndarray:
        self._check(t)
        i = min(int(np.searchsorted(self.breaks, t, side="right")) - 1, self.rates.shape[1] - 1)
        return self.rates[:, i].copy()

    def rho(self, t: float) -> np.ndarray:
        """Cumulative rates ``rho_{j0}(t)``, one per amplitude."""
        self._check(t)
        t = min(t, self.horizon)
        i = min(int(np.searchsorted(self.breaks, t, side="right")) - 1, self.rates.shape[1] - 1)
        return self._cum[:, i] + self.rates[:, i] * (t - self.breaks[i])

    def rho_between(self, v: float, t_end: float) -> np.ndarray:
        """``rho(t_end) - rho(v)``."""
        return self.rho(t_end) - self.rho(v)


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

@dataclass
class GcpPath:
    """Right-continuous step path given by its event times and jump sizes."""

    event_times: np.ndarray
    jump_sizes: np.ndarray
    horizon: float

    def __post_init__(self) -> None:
        self.event_times = np.asarray(self.event_times, dtype=float)
        self.jump_sizes = np.asarray(self.jump_sizes, dtype=np.int64)

    def value_at(self, t: float) -> int:
        i = int(np.searchsorted(self.event_times, t, side="right"))
        return int(self.jump_sizes[:i].sum())

    def values_at(self, ts: Sequence[float]) -> np.ndarray:
        cum = np.concatenate([[0], np.cumsum(self.jump_sizes)])
        return cum[np.searchsorted(self.event_times, np.asarray(ts, dtype=float), side="right")]

    def integral(self, t: float, alpha: float = 1.0) -> float:
        """``(1/Gamma(alpha)) int_0^t (t-s)^{alpha-1} X(s) ds``, exact for a step path."""
        mask = self.event_times <= t
        w = (t - self.event_times[mask]) ** alpha
        return float(np.dot(self.jump_sizes[mask], w)) / math.gamma(alpha + 1)


def sample_gcp_path(params: GcpParams, horizon: float, rng: np.random.Generator) -> GcpPath:
    """Superpose the amplitude-``j`` Poisson streams on ``[0, horizon]``."""
    if horizon < 0:
        raise DomainError("horizon must be non-negative")
    n = rng.poisson(params.total_rate * horizon)
    times = np.sort(rng.uniform(0.0, horizon, size=n))
    probs = np.asarray(params.rates) / params.total_rate
    sizes = rng.choice(params.jumps, size=n, p=probs)
    return GcpPath(times, sizes, horizon)


def sample_gcp_values(params: GcpParams, t, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw ``M(t)``; ``t`` may be an array of (random) times, one draw each."""
    t = np.asarray(t, dtype=float)
    if size is not None:
        t = np.broadcast_to(t, (size,))
    out = np.zeros(t.shape, dtype=np.int64)
    for j, r in enumerate(params.rates, 1):
        out += j * rng.poisson(r * t)
    return out


def sample_nh_gcp_value(schedule: RateSchedule, t: float, rng: np.random.Generator,
                        size: int | None = None):
    """Non-homogeneous GCP at ``t``: ``sum_{j0} j0 * Poisson(rho_{j0}(t))``."""
    rho = schedule.rho(t)
    shape = () if size is None else (size,)
    out = np.zeros(shape, dtype=np.int64)
    for j0, r in enumerate(rho, 1):
        out = out + j0 * rng.poisson(r, size=shape)
    return int(out) if size is None else out


def sample_nh_gcp_path(schedule: RateSchedule, horizon: float, rng: np.random.Generator) -> GcpPath:
    """Exact event path for a piecewise-constant schedule, piece by piece."""
    schedule._check(horizon)
    times, sizes = [], []
    b = schedule.breaks
    for i in range(len(b) - 1):
        lo, hi = b[i], min(b[i + 1], horizon)
        if hi <= lo:
            break
        for j0, r in enumerate(schedule.rates[:, i], 1):
            n = rng.poisson(r * (hi - lo))
            times.append(rng.uniform(lo, hi, size=n))
            sizes.append(np.full(n, j0))
    t = np.concatenate(times) if times else np.zeros(0)
    s = np.concatenate(sizes) if sizes else np.zeros(0, dtype=np.int64)
    order = np.argsort(t, kind="stable")
    return GcpPath(t[order], s[order], horizon)

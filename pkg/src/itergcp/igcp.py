"""Iterated GCP ``M(M0(t))``.

Analytic pmf (Bell-polynomial form and a direct conditioning series), pgf,
Kolmogorov forward system, Levy measure, moments, first passage,
martingale functionals, Riemann-Liouville integrals and the variant driven by
a non-homogeneous inner process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .core import (DEFAULT_WORK_BUDGET, BudgetExceeded, DomainError, IntegrationError,
                   PmfVector, SeriesResult, TruncationError, chernoff_upper_tail,
                   gaussian_cutoff)
from .gcp import (GcpParams, GcpPath, RateSchedule, gcp_cutoff, gcp_pmf, gcp_pmf_vector,
                  gcp_tail_bound)
from .kernels import (bell_polynomials, count_compositions, enumerate_compositions,
                      enumerate_weighted_partitions)


@dataclass(frozen=True)
class IgcpParams:
    """Outer GCP ``M`` (rates ``lambda_j``) evaluated at inner GCP ``M0`` (rates ``mu_{j0}``)."""

    outer: GcpParams
    inner: GcpParams

    @classmethod
    def from_rates(cls, outer: Sequence[float], inner: Sequence[float]) -> "IgcpParams":
        return cls(GcpParams(outer), GcpParams(inner))

    @property
    def S(self) -> float:
        return self.outer.mean_rate * self.inner.mean_rate

    @property
    def T(self) -> float:
        return (self.outer.mean_rate ** 2 * self.inner.second_rate
                + self.outer.second_rate * self.inner.mean_rate)

    def log_mgf(self, theta: float, t: float) -> float:
        """``log E exp(theta M(M0(t)))``."""
        a = self.outer.log_mgf(theta, 1.0)
        return t * math.fsum(mu * math.expm1(j0 * a) for j0, mu in enumerate(self.inner.rates, 1))


# ---------------------------------------------------------------------------
# Bell-polynomial form
# ---------------------------------------------------------------------------

def inner_weighted_moment(intensities: Sequence[float], decay: float, z: int,
                          budget: int = DEFAULT_WORK_BUDGET) -> float:
    """``E[M0^z exp(-decay M0)]`` for ``M0 = sum_{j0} j0 Poisson(a_{j0})``.

    Multinomial expansion of ``M0^z`` over compositions of ``z`` and the Bell
    identity ``E[N^r e^{-cN}] = e^{-a(1-e^{-c})} B_r(a e^{-c})``.
    """
    k0 = len(intensities)
    if count_compositions(z, k0) > budget:
        raise BudgetExceeded(f"{count_compositions(z, k0)} compositions exceed the work budget")
    log_fact = [math.lgamma(r + 1) for r in range(z + 1)]
    # per-amplitude factor j0^r / r! * B_r(a e^{-j0 c}), r = 0..z
    tables = []
    log_atom = 0.0
    for j0, a in enumerate(intensities, 1):
        shrink = math.exp(-j0 * decay)
        log_atom += -a * (1.0 - shrink)
        bells = bell_polynomials(z, a * shrink)
        tables.append([math.exp(r * math.log(j0) - log_fact[r]) * bells[r] for r in range(z + 1)])
    terms = []
    for comp in enumerate_compositions(z, k0):
        prod = 1.0
        for j0, r in enumerate(comp):
            prod *= tables[j0][r]
        terms.append(prod)
    return math.exp(log_fact[z] + log_atom) * math.fsum(terms)


def _bell_form_pmf(outer: GcpParams, intensities: Sequence[float], n: int,
                   budget: int = DEFAULT_WORK_BUDGET) -> float:
    if n < 0:
        return 0.0
    parts = enumerate_weighted_partitions(outer.k, n)
    work = sum(count_compositions(sum(x), len(intensities)) for x in parts)
    if work > budget:
        raise BudgetExceeded(f"Bell-form pmf needs {work} terms (budget {budget})")
    lam = outer.rates
    total = outer.total_rate
    moment_cache: dict[int, float] = {}
    terms = []
    for x in parts:
        z = sum(x)
        if z not in moment_cache:
            moment_cache[z] = inner_weighted_moment(intensities, total, z, budget)
        lw = math.fsum(xj * math.log(rj) - math.lgamma(xj + 1) for xj, rj in zip(x, lam) if xj)
        terms.append(math.exp(lw) * moment_cache[z])
    return math.fsum(terms)


def igcp_pmf(params: IgcpParams, n: int, t: float, budget: int = DEFAULT_WORK_BUDGET) -> SeriesResult:
    """``Pr{M(M0(t)) = n}`` in Bell-polynomial form.

    Finite sums only: partitions of ``n`` with bounded parts times
    compositions of their part counts.  ``BudgetExceeded`` is raised before
    any work when the term count exceeds ``budget``.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    if t == 0:
        return SeriesResult(1.0 if n == 0 else 0.0, 1, 0.0)
    a = [mu * t for mu in params.inner.rates]
    val = _bell_form_pmf(params.outer, a, n, budget)
    return SeriesResult(val, len(enumerate_weighted_partitions(params.outer.k, max(n, 0))), 0.0)


def inner_cutoff(inner: GcpParams, t: float, tol: float = 1e-14) -> int:
    """Smallest convenient ``s_max`` with certified ``Pr{M0(t) > s_max} <= tol``."""
    s_max = gcp_cutoff(inner, t)
    while gcp_tail_bound(inner, s_max, t) > tol:
        s_max = int(s_max * 1.25) + 5
    return s_max


def igcp_pmf_series_oracle(params: IgcpParams, n: int, t: float, s_max: int | None = None) -> SeriesResult:
    """Conditioning series ``sum_{s<=s_max} Pr{M(s)=n} Pr{M0(t)=s}``.

    Outer probabilities come from the partition sum, inner ones from the
    recursion; the neglected mass is at most ``Pr{M0(t) > s_max}``.
    """
    if t == 0:
        return SeriesResult(1.0 if n == 0 else 0.0, 1, 0.0)
    if s_max is None:
        s_max = inner_cutoff(params.inner, t)
    inner = gcp_pmf_vector(params.inner, t, s_max)
    terms = [gcp_pmf(params.outer, n, s) * inner[s] for s in range(s_max + 1)]
    return SeriesResult(math.fsum(terms), s_max + 1, inner.tail_bound)


def levy_weights(params: IgcpParams, n_max: int) -> np.ndarray:
    """``c(m) = sum_{j0} mu_{j0} Pr{M(j0) = m}`` for ``m = 0..n_max``."""
    c = np.zeros(n_max + 1)
    for j0, mu in enumerate(params.inner.rates, 1):
        c += mu * gcp_pmf_vector(params.outer, float(j0), n_max).probs
    return c


def igcp_tail_bound(params: IgcpParams, n_max: int, t: float) -> float:
    if t == 0:
        return 0.0
    return chernoff_upper_tail(lambda th: params.log_mgf(th, t), n_max + 1, theta_max=5.0)


def igcp_cutoff(params: IgcpParams, t: float, tol: float = 1e-12) -> int:
    mean, var = igcp_moments(params, 0.0, t)[:2]
    n_max = gaussian_cutoff(mean, var)
    while igcp_tail_bound(params, n_max, t) > tol:
        n_max = int(n_max * 1.25) + 5
    return n_max


def igcp_pmf_vector(params: IgcpParams, t: float, n_max: int | None = None) -> PmfVector:
    """``Pr{M(M0(t)) = n}``, ``n = 0..n_max``, via the compound-Poisson recursion.

    The IGCP is compound Poisson with Levy weights ``c(m)``;
    ``p(n) = (t/n) sum_m m c(m) p(n-m)`` started from the ``n = 0`` atom.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    if n_max is None:
        n_max = igcp_cutoff(params, t)
    p = np.zeros(n_max + 1)
    if t == 0:
        p[0] = 1.0
        return PmfVector(p, 0.0, {"t": 0.0})
    c = levy_weights(params, n_max)
    mass = levy_total_mass(params)
    if mass * t > 700:
        raise DomainError("t too large for the direct recursion (atom underflows)")
    p[0] = math.exp(-mass * t)
    mc = np.arange(n_max + 1) * c
    for n in range(1, n_max + 1):
        p[n] = t / n * float(np.dot(mc[1:n + 1], p[n - 1::-1]))
    return PmfVector(p, igcp_tail_bound(params, n_max, t), {"t": float(t)})


def igcp_pgf(params: IgcpParams, u, t: float):
    """``exp(-sum mu_{j0} t (1 - exp(-j0 sum_j lambda_j (1 - u^j))))``."""
    if abs(u) > 1 + 1e-15:
        raise DomainError("|u| must not exceed 1")
    phi = sum(r * (1 - u ** j) for j, r in enumerate(params.outer.rates, 1))
    val = np.exp(-t * sum(mu * (1 - np.exp(-j0 * phi)) for j0, mu in enumerate(params.inner.rates, 1)))
    return complex(val) if isinstance(u, complex) else float(np.real(val))


def igcp_transition_rates(params: IgcpParams, m: int) -> float:
    """Generator coefficient of a jump of size ``m`` (``m = 0``: minus the exit rate)."""
    if m < 0:
        raise DomainError("m must be non-negative")
    total = params.outer.total_rate
    if m == 0:
        return -params.inner.total_rate + math.fsum(
            mu * math.exp(-j0 * total) for j0, mu in enumerate(params.inner.rates, 1))
    return igcp_levy_measure(params, m)


def igcp_levy_measure(params: IgcpParams, n: int) -> float:
    """Mass of the Levy measure at ``n >= 1``: ``sum_{j0} mu_{j0} Pr{M(j0) = n}``."""
    if n < 1:
        raise DomainError("the Levy measure lives on n >= 1")
    return math.fsum(mu * gcp_pmf(params.outer, n, float(j0))
                     for j0, mu in enumerate(params.inner.rates, 1))


def levy_total_mass(params: IgcpParams) -> float:
    """``sum mu_{j0} (1 - exp(-j0 lambda))``."""
    lam = params.outer.total_rate
    return math.fsum(-mu * math.expm1(-j0 * lam) for j0, mu in enumerate(params.inner.rates, 1))


def igcp_moments(params: IgcpParams, s: float, t: float) -> tuple[float, float, float]:
    """``(S t, T t, T s)``: mean and variance at ``t`` and ``Cov(M(s), M(t))``."""
    if not 0 <= s <= t:
        raise DomainError("need 0 <= s <= t")
    mean, var = params.S * t, params.T * t
    if t > 0:
        assert var > mean, "overdispersion must hold"
    return mean, var, params.T * s


# ---------------------------------------------------------------------------
# forward equations
# ---------------------------------------------------------------------------

def _generator_matrix(c: np.ndarray, exit_rate: float) -> np.ndarray:
    n = len(c)
    A = np.zeros((n, n))
    for i in range(n):
        A[i, : i + 1] = c[i::-1]
        A[i, i] -= exit_rate
    return A


def igcp_ode_solve(params: IgcpParams, n_max: int, t_eval: np.ndarray,
                   atol: float = 1e-12, rtol: float = 1e-10) -> np.ndarray:
    """Integrate the forward system for states ``0..n_max`` from ``delta_0``.

    ``dp(n)/dt = -mu p(n) + sum_{m<=n} c(m) p(n-m)``; the truncated system is
    closed because jumps only move upwards.  Explicit adaptive Runge-Kutta.
    Returns an array of shape ``(len(t_eval), n_max + 1)``.
    """
    c = levy_weights(params, n_max)
    A = _generator_matrix(c, params.inner.total_rate)
    p0 = np.zeros(n_max + 1)
    p0[0] = 1.0
    t_eval = np.asarray(t_eval, dtype=float)
    sol = integrate.solve_ivp(lambda _t, p: A @ p, (0.0, float(t_eval[-1])), p0,
                              method="RK45", t_eval=t_eval, atol=atol, rtol=rtol)
    if not sol.success:
        raise IntegrationError(sol.message)
    return sol.y.T


def igcp_ode_verify(params: IgcpParams, n_max: int, t_end: float, n_grid: int = 21) -> float:
    """Max ``|ODE solution - Bell-form pmf|`` over ``n <= n_max`` and a time grid."""
    grid = np.linspace(0.0, t_end, n_grid)
    sol = igcp_ode_solve(params, n_max, grid)
    err = 0.0
    for i, t in enumerate(grid):
        for n in range(n_max + 1):
            err = max(err, abs(sol[i, n] - igcp_pmf(params, n, float(t)).value))
    return err


# ---------------------------------------------------------------------------
# first passage
# ---------------------------------------------------------------------------

def _inner_pmf_partition(inner: GcpParams, r: int, s: float) -> float:
    return gcp_pmf(inner, r, s)


def first_passage_density(params: IgcpParams, n: int, s: float, r_max: int | None = None) -> SeriesResult:
    """Density of ``T_n = inf{s : M(M0(s)) = n}`` (defective: ``n`` may be jumped over).

    ``sum_{j0} mu_{j0} sum_{m=1}^{n} sum_{r<=r_max} Pr{M(r)=n-m} Pr{M(j0)=m} Pr{M0(s)=r}``.
    The neglected ``r`` mass is bounded by ``mu Pr{M0(s) > r_max}``.
    """
    if n < 1:
        raise DomainError("first passage needs n >= 1")
    if s < 0:
        raise DomainError("s must be non-negative")
    if r_max is None:
        mean, var = params.inner.mean_rate * s, params.inner.second_rate * s
        r_max = gaussian_cutoff(mean, var)
    if s == 0:
        inner = np.zeros(r_max + 1)
        inner[0] = 1.0
        tail = 0.0
    else:
        inner = np.array([_inner_pmf_partition(params.inner, r, s) for r in range(r_max + 1)])
        tail = gcp_tail_bound(params.inner, r_max, s)
    jump_probs = {(j0, m): gcp_pmf(params.outer, m, float(j0))
                  for j0 in range(1, params.inner.k + 1) for m in range(1, n + 1)}
    below = {(r, m): gcp_pmf(params.outer, n - m, float(r))
             for r in range(r_max + 1) for m in range(1, n + 1)}
    terms = []
    for j0, mu in enumerate(params.inner.rates, 1):
        for m in range(1, n + 1):
            w = mu * jump_probs[(j0, m)]
            for r in range(r_max + 1):
                terms.append(w * below[(r, m)] * inner[r])
    return SeriesResult(math.fsum(terms), len(terms), params.inner.total_rate * tail)


def first_passage_probability(params: IgcpParams, tol: float = 1e-15) -> SeriesResult:
    """``Pr{T_1 < infinity}`` as a series over embedded inner-chain levels ``r``.

    ``sum_{j0} (mu_{j0}/mu) Pr{M(j0)=1} sum_r e^{-r lambda} h(r)`` with
    ``h(r) = sum_{Omega(k0, r)} z! prod (mu_{j0}/mu)^{x}/x!`` the probability
    that the embedded jump chain of ``M0`` visits ``r``; ``h <= 1`` gives the
    geometric tail bound.
    """
    lam = params.outer.total_rate
    mu = params.inner.total_rate
    w = params.inner.rates
    first = math.fsum((m / mu) * j0 * params.outer.rates[0] * math.exp(-j0 * lam)
                      for j0, m in enumerate(w, 1))
    r_max = 0
    while math.exp(-(r_max + 1) * lam) / -math.expm1(-lam) > tol:
        r_max += 1
    terms = []
    for r in range(r_max + 1):
        h_terms = []
        for x in enumerate_weighted_partitions(params.inner.k, r):
            z = sum(x)
            lt = math.lgamma(z + 1) + math.fsum(
                xi * math.log(wi / mu) - math.lgamma(xi + 1) for xi, wi in zip(x, w) if xi)
            h_terms.append(math.exp(lt))
        terms.append(math.exp(-r * lam) * math.fsum(h_terms))
    tail = first * math.exp(-(r_max + 1) * lam) / -math.expm1(-lam)
    return SeriesResult(first * math.fsum(terms), r_max + 1, tail)


def first_passage_cdf_table(params: IgcpParams, n: int, s_grid: np.ndarray) -> np.ndarray:
    """``Pr{T_n <= s}`` on an increasing grid starting at 0 (cumulative Simpson)."""
    s_grid = np.asarray(s_grid, dtype=float)
    dens = np.array([first_passage_density(params, n, float(s)).value for s in s_grid])
    return integrate.cumulative_simpson(dens, x=s_grid, initial=0.0)


def sample_first_passage(params: IgcpParams, n: int, size: int, rng: np.random.Generator,
                         block: int = 16) -> np.ndarray:
    """First time each simulated path sits exactly at ``n``; ``inf`` if it jumps over."""
    out = np.full(size, np.inf)
    time = np.zeros(size)
    level = np.zeros(size, dtype=np.int64)
    active = np.arange(size)
    mu = params.inner.total_rate
    probs = np.asarray(params.inner.rates) / mu
    while active.size:
        m = active.size
        dt = rng.exponential(1.0 / mu, size=(m, block))
        j0 = rng.choice(params.inner.jumps, size=(m, block), p=probs)
        jumps = np.zeros((m, block), dtype=np.int64)
        for j, lam in enumerate(params.outer.rates, 1):
            jumps += j * rng.poisson(lam * j0)
        times = time[active, None] + np.cumsum(dt, axis=1)
        levels = level[active, None] + np.cumsum(jumps, axis=1)
        reached = levels >= n
        any_reached = reached.any(axis=1)
        first = np.argmax(reached, axis=1)
        idx = np.arange(m)
        hit = any_reached & (levels[idx, first] == n)
        out[active[hit]] = times[idx, first][hit]
        time[active] = times[:, -1]
        level[active] = levels[:, -1]
        active = active[~any_reached]
    return out


# ---------------------------------------------------------------------------
# sampling and martingale functionals
# ---------------------------------------------------------------------------

def sample_igcp_value(params: IgcpParams, t: float, rng: np.random.Generator, size: int | None = None):
    """Draw ``M(M0(t))``: inner value first, then the outer GCP at that integer time."""
    shape = 1 if size is None else size
    s = np.zeros(shape, dtype=np.int64)
    for j0, mu in enumerate(params.inner.rates, 1):
        s += j0 * rng.poisson(mu * t, size=shape)
    out = np.zeros(shape, dtype=np.int64)
    for j, lam in enumerate(params.outer.rates, 1):
        out += j * rng.poisson(lam * s)
    return int(out[0]) if size is None else out


@dataclass
class PathBatch:
    """Flattened event lists of many step paths (``path`` holds the owning index)."""

    path: np.ndarray
    times: np.ndarray
    jumps: np.ndarray
    size: int
    horizon: float

    def values_at(self, t: float) -> np.ndarray:
        mask = self.times <= t
        return np.bincount(self.path[mask], weights=self.jumps[mask], minlength=self.size).astype(np.int64)

    def integrals(self, t: float, alpha: float = 1.0) -> np.ndarray:
        """Riemann-Liouville integral of order ``alpha`` of every path at ``t`` (exact)."""
        mask = self.times <= t
        w = self.jumps[mask] * (t - self.times[mask]) ** alpha / math.gamma(alpha + 1)
        return np.bincount(self.path[mask], weights=w, minlength=self.size)

    def get(self, i: int) -> GcpPath:
        sel = (self.path == i) & (self.jumps > 0)
        return GcpPath(self.times[sel], self.jumps[sel], self.horizon)


def sample_igcp_paths(params: IgcpParams, horizon: float, size: int, rng: np.random.Generator) -> PathBatch:
    """Paths on ``[0, horizon]`` built from inner events feeding outer increments.

    Each inner jump of size ``j0`` advances the outer clock by ``j0``, so the
    outer increment is an independent GCP value at time ``j0``.
    """
    counts = rng.poisson(params.inner.total_rate * horizon, size=size)
    total = int(counts.sum())
    path = np.repeat(np.arange(size), counts)
    times = rng.uniform(0.0, horizon, size=total)
    probs = np.asarray(params.inner.rates) / params.inner.total_rate
    j0 = rng.choice(params.inner.jumps, size=total, p=probs)
    jumps = np.zeros(total, dtype=np.int64)
    for j, lam in enumerate(params.outer.rates, 1):
        jumps += j * rng.poisson(lam * j0)
    return PathBatch(path, times, jumps, size, horizon)


def sample_igcp_path(params: IgcpParams, horizon: float, rng: np.random.Generator) -> GcpPath:
    batch = sample_igcp_paths(params, horizon, 1, rng)
    order = np.argsort(batch.times)
    keep = batch.jumps[order] > 0
    return GcpPath(batch.times[order][keep], batch.jumps[order][keep], horizon)


def martingale_residual(path_value, params: IgcpParams, t: float):
    """``M(M0(t)) - S t``."""
    return np.asarray(path_value) - params.S * t if np.ndim(path_value) else path_value - params.S * t


def exponential_martingale(path_value, params: IgcpParams, u: float, t: float):
    """``exp(u X(t) - t sum mu_{j0} (exp(-j0 sum lambda_j (1 - e^{uj})) - 1))``."""
    return np.exp(u * np.asarray(path_value, dtype=float) - params.log_mgf(u, t))


# ---------------------------------------------------------------------------
# Riemann-Liouville fractional integral
# ---------------------------------------------------------------------------

def fractional_integral_moments(params: IgcpParams, alpha: float, t: float) -> tuple[float, float, float]:
    """Mean, variance and ``Cov(X(t), I^alpha X(t))`` of the fractional integral.

    The covariance is ``T t^{alpha+1} / Gamma(alpha+2)``, i.e. ``T t^2 / 2`` at ``alpha = 1``.
    """
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if t < 0:
        raise DomainError("t must be non-negative")
    mean = params.S * t ** (alpha + 1) / math.gamma(alpha + 2)
    var = params.T * t ** (2 * alpha + 1) / ((2 * alpha + 1) * math.gamma(alpha + 1) ** 2)
    cov = params.T * t ** (alpha + 1) / math.gamma(alpha + 2)
    return mean, var, cov


def _count_weights(params: IgcpParams, n_max: int, x_max: int) -> np.ndarray:
    """``A[r, R] = sum_x Pr{M(x)=r} sum_{Omega(k0,x), |parts|=R} prod mu^{r_j}/r_j!``."""
    mu = params.inner.rates
    A = np.zeros((n_max + 1, x_max + 1))
    for x in range(x_max + 1):
        outer = gcp_pmf_vector(params.outer, float(x), n_max).probs
        for parts in enumerate_weighted_partitions(params.inner.k, x):
            R = sum(parts)
            w = math.exp(math.fsum(p * math.log(m) - math.lgamma(p + 1) for p, m in zip(parts, mu) if p))
            A[:, R] += w * outer
    return A


def fractional_integral_conditional_means(params: IgcpParams, alpha: float, t: float, n_max: int,
                                          x_max: int | None = None,
                                          budget: int = DEFAULT_WORK_BUDGET) -> tuple[np.ndarray, np.ndarray, float]:
    """Numerators ``E[I^alpha X(t) 1{X(t)=n}]`` for ``n <= n_max``.

    Returns ``(numerators, pmf, tail)``: dividing gives the conditional
    means; ``tail`` bounds the absolute error of every numerator.
    """
    if alpha <= 0 or t <= 0:
        raise DomainError("need alpha > 0 and t > 0")
    if x_max is None:
        x_max = inner_cutoff(params.inner, t, tol=1e-15)
    work = (x_max + 1) ** 2 * (n_max + 1)
    if work > budget:
        raise BudgetExceeded(f"conditional mean needs about {work} terms (budget {budget})")
    A = _count_weights(params, n_max, x_max)
    R = np.arange(x_max + 1)
    # B[R, L] = t^{R+L} B(R+1, alpha+L)
    B = np.exp((R[:, None] + R[None, :]) * math.log(t)
               + special.betaln(R[:, None] + 1.0, alpha + R[None, :]))
    C = A @ B @ A.T
    pref = math.exp(-params.inner.total_rate * t) * t ** alpha / math.gamma(alpha)
    num = np.zeros(n_max + 1)
    for n in range(n_max + 1):
        r = np.arange(n + 1)
        num[n] = pref * math.fsum(r * C[r, n - r])
    pmf = igcp_pmf_vector(params, t, n_max).probs
    tail = 2.0 * n_max * t ** alpha / math.gamma(alpha + 1) * gcp_tail_bound(params.inner, x_max, t)
    return num, pmf, tail


def fractional_integral_conditional_mean(params: IgcpParams, alpha: float, t: float, n: int,
                                         work_budget: int = DEFAULT_WORK_BUDGET) -> SeriesResult:
    """``E[I^alpha X(t) | X(t) = n]`` with a certified absolute error bound."""
    if n < 0:
        raise DomainError("n must be non-negative")
    if n == 0:
        return SeriesResult(0.0, 1, 0.0)
    num, _, tail = fractional_integral_conditional_means(params, alpha, t, n, budget=work_budget)
    p = igcp_pmf(params, n, t).value
    if p <= 0:
        raise DomainError("conditioning event has zero probability")
    return SeriesResult(num[n] / p, len(num), tail / p)


# ---------------------------------------------------------------------------
# non-homogeneous inner process
# ---------------------------------------------------------------------------

def nh_igcp_pmf(outer: GcpParams, schedule: RateSchedule, n: int, t: float,
                budget: int = DEFAULT_WORK_BUDGET) -> SeriesResult:
    """Bell-form pmf with cumulative rates ``rho_{j0}(t)`` in place of ``mu_{j0} t``."""
    if t == 0:
        return SeriesResult(1.0 if n == 0 else 0.0, 1, 0.0)
    rho = schedule.rho(t)
    return SeriesResult(_bell_form_pmf(outer, rho, n, budget), 1, 0.0)


def nh_igcp_moments(outer: GcpParams, schedule: RateSchedule, t: float) -> tuple[float, float]:
    rho = schedule.rho(t)
    j0 = np.arange(1, len(rho) + 1)
    a, b = outer.mean_rate, outer.second_rate
    m1 = math.fsum(j0 * rho)
    m2 = math.fsum(j0 * j0 * rho)
    return a * m1, a * a * m2 + b * m1


def nh_first_passage_cdf(outer: GcpParams, schedule: RateSchedule, n: int, t: float) -> float:
    """``Pr{X(t) >= n} = 1 - sum_{m<n} pmf(m, t)``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return 1.0 - math.fsum(nh_igcp_pmf(outer, schedule, m, t).value for m in range(n))


def nh_increment_pmf(outer: GcpParams, schedule: RateSchedule, n: int, t: float, v: float,
                     budget: int = DEFAULT_WORK_BUDGET) -> SeriesResult:
    """Pmf of ``X(t+v) - X(v)``: Bell form with ``rho(t+v) - rho(v)``."""
    if v < 0 or t < 0:
        raise DomainError("need t, v >= 0")
    if t == 0:
        return SeriesResult(1.0 if n == 0 else 0.0, 1, 0.0)
    rho = schedule.rho_between(v, t + v)
    return SeriesResult(_bell_form_pmf(outer, rho, n, budget), 1, 0.0)


def nh_ode_verify(outer: GcpParams, schedule: RateSchedule, n_max: int, t_end: float,
                  n_grid: int = 11) -> float:
    """Max deviation between the forward system with ``mu_{j0}(t)`` and the Bell-form pmf."""
    k0 = schedule.k0
    jump = np.array([gcp_pmf_vector(outer, float(j0), n_max).probs for j0 in range(1, k0 + 1)])
    mats = [_generator_matrix(jump[i], 1.0) for i in range(k0)]

    def rhs(t, p):
        mu = schedule.mu(min(t, schedule.horizon))
        return sum(mu[i] * (mats[i] @ p) for i in range(k0))

    grid = np.linspace(0.0, t_end, n_grid)
    p0 = np.zeros(n_max + 1)
    p0[0] = 1.0
    sol = integrate.solve_ivp(rhs, (0.0, t_end), p0, method="RK45", t_eval=grid,
                              atol=1e-12, rtol=1e-10, max_step=float(np.min(np.diff(schedule.breaks))))
    if not sol.success:
        raise IntegrationError(sol.message)
    err = 0.0
    for i, t in enumerate(grid):
        for n in range(n_max + 1):
            err = max(err, abs(sol.y[n, i] - nh_igcp_pmf(outer, schedule, n, float(t)).value))
    return err


def sample_nh_igcp_value(outer: GcpParams, schedule: RateSchedule, t: float,
                         rng: np.random.Generator, size: int) -> np.ndarray:
    rho = schedule.rho(t)
    s = np.zeros(size, dtype=np.int64)
    for j0, r in enumerate(rho, 1):
        s += j0 * rng.poisson(r, size=size)
    out = np.zeros(size, dtype=np.int64)
    for j, lam in enumerate(outer.rates, 1):
        out += j * rng.poisson(lam * s)
    return out


def sample_nh_increment(outer: GcpParams, schedule: RateSchedule, t: float, v: float,
                        rng: np.random.Generator, size: int) -> np.ndarray:
    """``X(t+v) - X(v)`` by simulating both times on common paths."""
    rho_v = schedule.rho(v)
    rho_tv = schedule.rho(t + v)
    s_v = np.zeros(size, dtype=np.int64)
    s_tv = np.zeros(size, dtype=np.int64)
    for j0, (a, b) in enumerate(zip(rho_v, rho_tv), 1):
        first = rng.poisson(a, size=size)
        s_v += j0 * first
        s_tv += j0 * (first + rng.poisson(b - a, size=size))
    # outer process at two ordered integer times, sharing its path
    x_v = np.zeros(size, dtype=np.int64)
    x_tv = np.zeros(size, dtype=np.int64)
    for j, lam in enumerate(outer.rates, 1):
        first = rng.poisson(lam * s_v)
        x_v += j * first
        x_tv += j * (first + rng.poisson(lam * (s_tv - s_v)))
    return x_tv - x_v

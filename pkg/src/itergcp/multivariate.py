"""Multivariate IGCP ``(M_1(M0(t)), ..., M_q(M0(t)))`` with a shared inner clock."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .core import DEFAULT_WORK_BUDGET, BudgetExceeded, DomainError, IntegrationError, SeriesResult
from .gcp import GcpParams, gcp_pmf, gcp_pmf_vector
from .igcp import IgcpParams, inner_cutoff, inner_weighted_moment
from .kernels import count_compositions, enumerate_weighted_partitions


@dataclass(frozen=True)
class MvIgcpParams:
    components: tuple[GcpParams, ...]
    inner: GcpParams

    def __init__(self, components: Sequence, inner):
        comps = tuple(c if isinstance(c, GcpParams) else GcpParams(c) for c in components)
        if not comps:
            raise DomainError("need at least one component")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "inner", inner if isinstance(inner, GcpParams) else GcpParams(inner))

    @property
    def q(self) -> int:
        return len(self.components)

    @property
    def Lambda(self) -> float:
        return math.fsum(c.total_rate for c in self.components)

    def marginal(self, i: int) -> IgcpParams:
        return IgcpParams(self.components[i], self.inner)


def _exponent(params: MvIgcpParams, u: Sequence) -> complex:
    return sum(sum(r * (1 - ui ** j) for j, r in enumerate(c.rates, 1))
               for c, ui in zip(params.components, u))


def mv_pgf(params: MvIgcpParams, u: Sequence, t: float):
    """``exp(-sum mu_{j0} t (1 - exp(-j0 sum_i sum_j lambda_{ij} (1 - u_i^j))))``."""
    if len(u) != params.q:
        raise DomainError("u must have one entry per component")
    if any(abs(x) > 1 + 1e-15 for x in u):
        raise DomainError("all |u_i| must be at most 1")
    phi = _exponent(params, u)
    val = np.exp(-t * sum(mu * (1 - np.exp(-j0 * phi)) for j0, mu in enumerate(params.inner.rates, 1)))
    return complex(val) if any(isinstance(x, complex) for x in u) else float(np.real(val))


def mv_pmf(params: MvIgcpParams, n: Sequence[int], t: float, m_max: int | None = None) -> SeriesResult:
    """Series ``sum_{m <= m_max} Pr{M0(t)=m} prod_i Pr{M_i(m)=n_i}``.

    The omitted mass is at most ``Pr{M0(t) > m_max}``.
    """
    if len(n) != params.q or min(n) < 0:
        raise DomainError("n must be a non-negative vector of length q")
    if t == 0:
        return SeriesResult(1.0 if not any(n) else 0.0, 1, 0.0)
    if m_max is None:
        m_max = inner_cutoff(params.inner, t)
    inner = gcp_pmf_vector(params.inner, t, m_max)
    terms = []
    for m in range(m_max + 1):
        prod = inner[m]
        for c, ni in zip(params.components, n):
            prod *= gcp_pmf(c, ni, float(m))
        terms.append(prod)
    return SeriesResult(math.fsum(terms), m_max + 1, inner.tail_bound)


def mv_pmf_bell(params: MvIgcpParams, n: Sequence[int], t: float,
                budget: int = DEFAULT_WORK_BUDGET) -> SeriesResult:
    """Bell-polynomial form: product partitions over components, compositions of the total count."""
    if len(n) != params.q or min(n) < 0:
        raise DomainError("n must be a non-negative vector of length q")
    if t == 0:
        return SeriesResult(1.0 if not any(n) else 0.0, 1, 0.0)
    per_comp = [enumerate_weighted_partitions(c.k, ni) for c, ni in zip(params.components, n)]
    work = math.prod(len(p) for p in per_comp)
    if work > budget:
        raise BudgetExceeded(f"{work} partition combinations exceed the budget")
    a = [mu * t for mu in params.inner.rates]
    lam_total = params.Lambda
    cache: dict[int, float] = {}
    terms = []
    for combo in itertools.product(*per_comp):
        z = sum(sum(x) for x in combo)
        if z not in cache:
            if count_compositions(z, params.inner.k) > budget:
                raise BudgetExceeded("composition count exceeds the budget")
            cache[z] = inner_weighted_moment(a, lam_total, z, budget)
        lw = 0.0
        for c, x in zip(params.components, combo):
            lw += math.fsum(xj * math.log(rj) - math.lgamma(xj + 1) for xj, rj in zip(x, c.rates) if xj)
        terms.append(math.exp(lw) * cache[z])
    return SeriesResult(math.fsum(terms), len(terms), 0.0)


def _jump_tables(params: MvIgcpParams, n_max: Sequence[int]) -> np.ndarray:
    """``c(m) = sum_{j0} mu_{j0} prod_i Pr{M_i(j0) = m_i}`` on the lattice ``m <= n_max``."""
    shape = tuple(x + 1 for x in n_max)
    c = np.zeros(shape)
    for j0, mu in enumerate(params.inner.rates, 1):
        block = np.array(mu)
        for comp, nm in zip(params.components, n_max):
            block = np.multiply.outer(block, gcp_pmf_vector(comp, float(j0), nm).probs)
        c += block
    return c


def mv_levy_measure(params: MvIgcpParams, n: Sequence[int]) -> float:
    if len(n) != params.q or min(n) < 0 or not any(n):
        raise DomainError("the Levy measure lives on non-negative non-zero lattice points")
    return math.fsum(mu * math.prod(gcp_pmf(c, ni, float(j0)) for c, ni in zip(params.components, n))
                     for j0, mu in enumerate(params.inner.rates, 1))


def mv_levy_total_mass(params: MvIgcpParams) -> float:
    lam = params.Lambda
    return math.fsum(-mu * math.expm1(-j0 * lam) for j0, mu in enumerate(params.inner.rates, 1))


def mv_ode_solve(params: MvIgcpParams, n_max: Sequence[int], t_eval: np.ndarray) -> np.ndarray:
    """Forward system on the lattice ``0 <= m <= n_max``; returns ``(len(t_eval), *shape)``.

    Exit rate ``sum mu_{j0} (1 - e^{-j0 Lambda})``; gains from every ``m > 0``.
    """
    n_max = tuple(int(x) for x in n_max)
    shape = tuple(x + 1 for x in n_max)
    size = math.prod(shape)
    if size > 10 ** 6:
        raise BudgetExceeded("lattice exceeds 1e6 points")
    c = _jump_tables(params, n_max)
    exit_rate = mv_levy_total_mass(params)
    c_flat = c.copy()
    c_flat[(0,) * params.q] = 0.0
    idx = list(np.ndindex(*shape))
    A = np.zeros((size, size))
    for a, n in enumerate(idx):
        A[a, a] -= exit_rate
        for b, m in enumerate(idx):
            diff = tuple(x - y for x, y in zip(n, m))
            if min(diff) >= 0 and any(diff):
                A[a, b] += c_flat[diff]
    p0 = np.zeros(size)
    p0[0] = 1.0
    t_eval = np.asarray(t_eval, dtype=float)
    sol = integrate.solve_ivp(lambda _t, p: A @ p, (0.0, float(t_eval[-1])), p0, method="RK45",
                              t_eval=t_eval, atol=1e-12, rtol=1e-10)
    if not sol.success:
        raise IntegrationError(sol.message)
    return sol.y.T.reshape((len(t_eval),) + shape)


def mv_ode_verify(params: MvIgcpParams, n_max: Sequence[int], t_end: float, n_grid: int = 11) -> float:
    grid = np.linspace(0.0, t_end, n_grid)
    sol = mv_ode_solve(params, n_max, grid)
    err = 0.0
    for i, t in enumerate(grid):
        for n in np.ndindex(*sol.shape[1:]):
            err = max(err, abs(sol[(i,) + n] - mv_pmf(params, n, float(t)).value))
    return err


def mv_covariance(params: MvIgcpParams, i: int, l: int, t: float) -> float:
    """``1{i=l} E[M0(t)] Var M_i(1) + E M_i(1) E M_l(1) Var M0(t)`` (0-based indices)."""
    if not (0 <= i < params.q and 0 <= l < params.q):
        raise DomainError("component index out of range")
    ci, cl = params.components[i], params.components[l]
    m1, m2 = params.inner.mean_rate * t, params.inner.second_rate * t
    diag = m1 * ci.second_rate if i == l else 0.0
    return diag + ci.mean_rate * cl.mean_rate * m2


def mv_covariance_matrix(params: MvIgcpParams, t: float) -> np.ndarray:
    return np.array([[mv_covariance(params, i, l, t) for l in range(params.q)] for i in range(params.q)])


def mv_codifference(params: MvIgcpParams, i: int, l: int, omega: complex, t: float) -> complex:
    """Codifference ``log E e^{w(X_i - X_l)} - log E e^{w X_i} - log E e^{-w X_l}``.

    ``sum mu_{j0} t (2 - e^{A} - e^{B}) - 1{i != l} sum mu_{j0} t (1 - e^{A + B})``
    with ``A = j0 sum_j lambda_{ij}(e^{w j} - 1)`` and ``B = j0 sum_j lambda_{lj}(e^{-w j} - 1)``.
    """
    if not (0 <= i < params.q and 0 <= l < params.q):
        raise DomainError("component index out of range")
    ci, cl = params.components[i], params.components[l]
    a1 = sum(r * (np.exp(omega * j) - 1) for j, r in enumerate(ci.rates, 1))
    b1 = sum(r * (np.exp(-omega * j) - 1) for j, r in enumerate(cl.rates, 1))
    total = 0j
    for j0, mu in enumerate(params.inner.rates, 1):
        A, B = j0 * a1, j0 * b1
        total += mu * t * (2 - np.exp(A) - np.exp(B))
        if i != l:
            total -= mu * t * (1 - np.exp(A + B))
    return complex(total)


def sample_mv_value(params: MvIgcpParams, t: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """One inner value per draw, then ``q`` independent GCPs at that integer time."""
    s = np.zeros(size, dtype=np.int64)
    for j0, mu in enumerate(params.inner.rates, 1):
        s += j0 * rng.poisson(mu * t, size=size)
    out = np.zeros((size, params.q), dtype=np.int64)
    for i, c in enumerate(params.components):
        for j, lam in enumerate(c.rates, 1):
            out[:, i] += j * rng.poisson(lam * s)
    return out


def mv_pmf_lattice(params: MvIgcpParams, n_max: Sequence[int], t: float) -> tuple[np.ndarray, float]:
    """Joint pmf on ``0 <= n <= n_max`` from the conditioning series (vectorised)."""
    m_max = inner_cutoff(params.inner, t)
    inner = gcp_pmf_vector(params.inner, t, m_max)
    out = np.zeros(tuple(x + 1 for x in n_max))
    for m in range(m_max + 1):
        block = np.array(inner[m])
        for c, nm in zip(params.components, n_max):
            block = np.multiply.outer(block, gcp_pmf_vector(c, float(m), nm).probs)
        out += block
    return out, inner.tail_bound

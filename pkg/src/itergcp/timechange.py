"""IGCP time-changed by an inverse alpha-stable subordinator.

``M^alpha(t) = M(M0(Y(t)))`` where ``Y`` is the first-passage time of a
stable subordinator ``D`` with ``E exp(-s D(1)) = exp(-s^alpha)``.  Equivalently
the inner GCP is replaced by its time-fractional version (GFCP).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .core import DEFAULT_WORK_BUDGET, BudgetExceeded, DomainError, PmfVector, SeriesResult
from .gcp import GcpParams, gcp_pmf, sample_gcp_values
from .igcp import IgcpParams, igcp_moments, levy_weights
from .kernels import (count_compositions, enumerate_compositions, enumerate_weighted_partitions,
                      falling_factorial, mittag_leffler_3p, mittag_leffler_3p_array)


@dataclass(frozen=True)
class StableParams:
    alpha: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise DomainError("alpha must lie strictly between 0 and 1")


@dataclass(frozen=True)
class TcIgcpParams:
    base: IgcpParams
    stable: StableParams

    @classmethod
    def from_rates(cls, outer: Sequence[float], inner: Sequence[float], alpha: float) -> "TcIgcpParams":
        return cls(IgcpParams.from_rates(outer, inner), StableParams(alpha))

    @property
    def alpha(self) -> float:
        return self.stable.alpha

    @property
    def S(self) -> float:
        return self.base.S

    @property
    def T(self) -> float:
        return self.base.T

    @property
    def R(self) -> float:
        a = self.alpha
        return self.S ** 2 * (2.0 / math.gamma(2 * a + 1) - 1.0 / math.gamma(a + 1) ** 2)


# ---------------------------------------------------------------------------
# inverse stable subordinator
# ---------------------------------------------------------------------------

def sample_positive_stable(alpha: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Kanter's representation of ``D(1)`` with ``E exp(-s D(1)) = exp(-s^alpha)``."""
    u = rng.uniform(0.0, 1.0, size=size) * math.pi
    e = rng.standard_exponential(size=size)
    a = np.sin(alpha * u) / np.sin(u) ** (1.0 / alpha)
    b = (np.sin((1.0 - alpha) * u) / e) ** ((1.0 - alpha) / alpha)
    return a * b


def sample_inverse_stable(stable: StableParams, t: float, rng: np.random.Generator, size=None):
    """``Y(t)`` via self-similarity: ``Y(t) = (t / D(1))^alpha`` in law."""
    if t < 0:
        raise DomainError("t must be non-negative")
    d = sample_positive_stable(stable.alpha, rng, size)
    y = (t / d) ** stable.alpha
    return float(y) if size is None else y


def inverse_stable_moments(alpha: float, t: float) -> tuple[float, float]:
    mean = t ** alpha / math.gamma(1 + alpha)
    var = t ** (2 * alpha) * (2.0 / math.gamma(2 * alpha + 1) - 1.0 / math.gamma(alpha + 1) ** 2)
    return mean, var


def inverse_stable_product_moment(alpha: float, s: float, t: float) -> float:
    """``E[Y(s) Y(t)]`` for ``s <= t``.

    ``(1 / (Gamma(1+a) Gamma(a))) int_0^s ((t-x)^a + (s-x)^a) x^(a-1) dx``; the first
    integral is ``t^a s^a / a * 2F1(-a, a; a+1; s/t)``.
    """
    if s > t:
        s, t = t, s
    if s == 0:
        return 0.0
    a = alpha
    i1 = t ** a * s ** a / a * special.hyp2f1(-a, a, a + 1, s / t)
    i2 = s ** (2 * a) * special.beta(a, a + 1)
    return (i1 + i2) / (math.gamma(1 + a) * math.gamma(a))


def inverse_stable_covariance(alpha: float, s: float, t: float) -> float:
    return (inverse_stable_product_moment(alpha, s, t)
            - inverse_stable_moments(alpha, s)[0] * inverse_stable_moments(alpha, t)[0])


def sample_ml_waiting_times(rate: float, alpha: float, rng: np.random.Generator, size) -> np.ndarray:
    """Mittag-Leffler waiting times of the fractional Poisson renewal process.

    ``-rate^(-1/a) log U (sin(a pi) / tan(a pi V) - cos(a pi))^(1/a)``.
    """
    u = rng.uniform(0.0, 1.0, size=size)
    v = rng.uniform(0.0, 1.0, size=size)
    ap = alpha * math.pi
    return -rate ** (-1.0 / alpha) * np.log(u) * (math.sin(ap) / np.tan(ap * v) - math.cos(ap)) ** (1.0 / alpha)


# ---------------------------------------------------------------------------
# distribution
# ---------------------------------------------------------------------------

def tc_igcp_pgf(params: TcIgcpParams, u: float, t: float) -> float:
    """``E_{alpha,1}(sum mu_{j0} t^alpha (exp(j0 sum lambda_j (u^j - 1)) - 1))`` for real ``u``."""
    if abs(u) > 1 + 1e-15:
        raise DomainError("|u| must not exceed 1")
    if t < 0:
        raise DomainError("t must be non-negative")
    a = params.alpha
    g = math.fsum(r * (u ** j - 1) for j, r in enumerate(params.base.outer.rates, 1))
    x = math.fsum(mu * t ** a * math.expm1(j0 * g) for j0, mu in enumerate(params.base.inner.rates, 1))
    return mittag_leffler_3p(a, 1.0, 1.0, x, tol=1e-15).value


def fractional_poisson_pmf(rate: float, alpha: float, t: float, z_max: int) -> np.ndarray:
    """``Pr{N(Y(t)) = z} = (rate t^a)^z E^{z+1}_{a, a z + 1}(-rate t^a)``, ``z <= z_max``."""
    out = np.zeros(z_max + 1)
    if t == 0:
        out[0] = 1.0
        return out
    x = rate * t ** alpha
    for z in range(z_max + 1):
        ml = mittag_leffler_3p(alpha, alpha * z + 1.0, z + 1.0, -x, tol=1e-15).value
        out[z] = math.exp(z * math.log(x)) * ml
    return out


def _fractional_poisson_table(rate: float, alpha: float, t: float, tol: float = 1e-16,
                              z_cap: int = 5000) -> np.ndarray:
    """pmf of the fractional Poisson count up to the point where the remaining mass is below ``tol``.

    The tail is summed term by term; once terms fall geometrically (ratio < 1/2)
    below ``tol`` the remaining mass is at most twice the last term.
    """
    if t == 0:
        return np.array([1.0])
    x = rate * t ** alpha
    vals = []
    for z in range(z_cap):
        ml = mittag_leffler_3p(alpha, alpha * z + 1.0, z + 1.0, -x, tol=1e-15).value
        p = math.exp(z * math.log(x)) * max(ml, 0.0)
        vals.append(p)
        if z > x and p < tol * 1e-3 and len(vals) > 2 and p < 0.5 * vals[-2]:
            return np.array(vals)
    raise BudgetExceeded("fractional Poisson table did not converge")


def _upper_tails(p: np.ndarray) -> np.ndarray:
    """``tails[z] = sum_{z' > z} p[z']`` summed from the small end, plus the geometric remainder."""
    rev = np.cumsum(p[::-1])[::-1]
    return np.concatenate([rev[1:], [0.0]]) + 2.0 * p[-1]


def gfcp_pmf(inner: GcpParams, alpha: float, m: int, t: float) -> float:
    """``Pr{M0(Y(t)) = m}`` as a Mittag-Leffler weighted partition sum."""
    if m < 0:
        return 0.0
    if t == 0:
        return 1.0 if m == 0 else 0.0
    ta = t ** alpha
    mu = inner.total_rate
    terms = []
    for x in enumerate_weighted_partitions(inner.k, m):
        r = sum(x)
        lw = math.lgamma(r + 1) + math.fsum(
            xj * math.log(rj * ta) - math.lgamma(xj + 1) for xj, rj in zip(x, inner.rates) if xj)
        ml = mittag_leffler_3p(alpha, alpha * r + 1.0, r + 1.0, -mu * ta, tol=1e-15).value
        terms.append(math.exp(lw) * ml)
    return math.fsum(terms)


def tc_igcp_pmf(params: TcIgcpParams, n: int, t: float, budget: int = DEFAULT_WORK_BUDGET,
                tol: float = 1e-14) -> SeriesResult:
    """``Pr{M^alpha(t) = n}`` from the Mittag-Leffler weighted multiple sum.

    Outer partitions ``Omega(k, n)`` with part count ``z``, compositions
    ``r`` of ``z`` over the inner amplitudes and the lattice ``x`` of inner
    event counts, cut at total count ``Z_max``.  The dropped lattice mass is
    bounded by ``sup_{m > Z_max} m^z e^{-lambda m}`` times the fractional
    Poisson tail beyond ``Z_max``.
    """
    if n < 0:
        raise DomainError("n must be non-negative")
    if t < 0:
        raise DomainError("t must be non-negative")
    if t == 0:
        return SeriesResult(1.0 if n == 0 else 0.0, 1, 0.0)
    outer, inner = params.base.outer, params.base.inner
    a = params.alpha
    ta = t ** a
    lam = outer.total_rate
    mu = inner.total_rate
    k0 = inner.k

    fp = _fractional_poisson_table(mu, a, t)
    tails = _upper_tails(fp)
    partitions = enumerate_weighted_partitions(outer.k, n)
    z_max_needed = max(sum(x) for x in partitions)

    def sup_weight(z: int, m_lo: int) -> float:
        m_star = z / lam
        m = max(float(m_lo), m_star)
        return math.exp(z * math.log(m) - lam * m) if m > 0 else 1.0

    log_coef = [math.fsum(xj * math.log(rj) - math.lgamma(xj + 1) for xj, rj in zip(x, outer.rates) if xj)
                for x in partitions]
    coef_bound = math.fsum(math.exp(lc) for lc in log_coef)
    # smallest lattice cut whose certified tail is below tol
    cut = None
    for zc in range(len(fp)):
        if tails[zc] * coef_bound * max(sup_weight(z, zc + 1) for z in range(z_max_needed + 1)) <= tol:
            cut = zc
            break
    if cut is None:
        cut = len(fp) - 1
    tail = tails[cut] * math.fsum(math.exp(lc) * sup_weight(sum(x), cut + 1)
                                  for lc, x in zip(log_coef, partitions))

    lattice = [np.array(enumerate_compositions(zc, k0), dtype=float).reshape(-1, k0) for zc in range(cut + 1)]
    work = sum(len(b) for b in lattice) * sum(count_compositions(sum(x), k0) for x in partitions)
    if work > budget:
        raise BudgetExceeded(f"time-changed pmf needs {work} terms")
    X = np.vstack(lattice)
    Z = X.sum(axis=1).astype(int)
    j0 = np.arange(1, k0 + 1, dtype=float)
    log_a = np.log(np.asarray(inner.rates) * ta) - j0 * lam
    log_ml = np.array([math.log(mittag_leffler_3p(a, a * z + 1.0, z + 1.0, -mu * ta, tol=1e-15).value)
                       for z in range(cut + 1)])
    log_g = (special.gammaln(Z + 1) + log_ml[Z]
             + (X * log_a).sum(axis=1) - special.gammaln(X + 1).sum(axis=1))
    g = np.exp(log_g)

    inner_cache: dict[int, float] = {}
    terms = []
    for lc, x in zip(log_coef, partitions):
        z = sum(x)
        if z not in inner_cache:
            acc = []
            for r in enumerate_compositions(z, k0):
                r_arr = np.asarray(r, dtype=float)
                lf = math.lgamma(z + 1) - math.fsum(math.lgamma(ri + 1) for ri in r)
                # prod_{j0} (j0 x_{j0})^{r_{j0}} with 0^0 = 1
                prod = np.prod(np.power(j0 * X, r_arr), axis=1)
                acc.append(math.exp(lf) * math.fsum(prod * g))
            inner_cache[z] = math.fsum(acc)
        terms.append(math.exp(lc) * inner_cache[z])
    return SeriesResult(math.fsum(terms), len(X), float(tail))


def tc_igcp_pmf_oracle(params: TcIgcpParams, n: int, t: float, m_max: int | None = None) -> SeriesResult:
    """Conditioning series ``sum_{m <= m_max} Pr{M(m) = n} Pr{M0(Y(t)) = m}``.

    Inner probabilities come from the GFCP partition sum; the dropped mass is at
    most the fractional Poisson tail beyond ``m_max // k0`` events.
    """
    if t == 0:
        return SeriesResult(1.0 if n == 0 else 0.0, 1, 0.0)
    outer, inner = params.base.outer, params.base.inner
    fp = _fractional_poisson_table(inner.total_rate, params.alpha, t)
    tails = _upper_tails(fp)
    if m_max is None:
        z = int(np.argmax(tails < 1e-15)) if np.any(tails < 1e-15) else len(fp) - 1
        m_max = inner.k * z + inner.k - 1
    terms = [gcp_pmf(outer, n, float(m)) * gfcp_pmf(inner, params.alpha, m, t) for m in range(m_max + 1)]
    zc = min((m_max + 1) // inner.k - 1, len(tails) - 1)
    tail = float(tails[zc]) if zc >= 0 else 1.0
    return SeriesResult(math.fsum(terms), m_max + 1, tail)


def _jump_law(params: TcIgcpParams, n_max: int) -> np.ndarray:
    """Increment law per inner event: ``g(m) = sum_{j0} (mu_{j0}/mu) Pr{M(j0) = m}``."""
    return levy_weights(params.base, n_max) / params.base.inner.total_rate


def tc_igcp_pmf_grid(params: TcIgcpParams, t_grid: Sequence[float], n_max: int,
                     tol: float = 1e-15) -> tuple[np.ndarray, np.ndarray]:
    """pmf on ``0..n_max`` at every time in ``t_grid`` (shape ``(len(t_grid), n_max + 1)``).

    Compound fractional Poisson form ``sum_z Pr{N(Y(t)) = z} g^{*z}(n)``.
    Returns the pmf table and a per-time bound on the mass above ``n_max``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0):
        raise DomainError("times must be non-negative")
    a = params.alpha
    mu = params.base.inner.total_rate
    fp_max = _fractional_poisson_table(mu, a, float(t_grid.max()), tol)
    z_max = len(fp_max) - 1
    x = mu * t_grid ** a
    g = _jump_law(params, n_max)
    conv = np.zeros(n_max + 1)
    conv[0] = 1.0
    out = np.zeros((len(t_grid), n_max + 1))
    mass = np.zeros(len(t_grid))
    dropped = np.zeros(len(t_grid))
    safe = np.where(x > 0, x, 1.0)
    for z in range(z_max + 1):
        ml = mittag_leffler_3p_array(a, a * z + 1.0, z + 1.0, -x)
        pz = np.where(x > 0, np.exp(z * np.log(safe)) * ml, 1.0 if z == 0 else 0.0)
        out += np.outer(pz, conv)
        mass += pz
        dropped += pz * max(0.0, 1.0 - conv.sum())
        conv = np.convolve(conv, g)[: n_max + 1]
    tail = dropped + np.maximum(0.0, 1.0 - mass) + tol
    return out, tail


def tc_igcp_pmf_vector(params: TcIgcpParams, t: float, n_max: int) -> PmfVector:
    table, tail = tc_igcp_pmf_grid(params, [t], n_max)
    return PmfVector(table[0], float(tail[0]), {"t": float(t), "alpha": params.alpha})


# ---------------------------------------------------------------------------
# fractional forward equation
# ---------------------------------------------------------------------------

def caputo_l1(values: np.ndarray, h: float, alpha: float) -> np.ndarray:
    """L1 approximation of the Caputo derivative on a uniform grid (axis 0 is time).

    ``(h^-a / Gamma(2-a)) sum_j b_j (f_{i-j} - f_{i-j-1})`` with
    ``b_j = (j+1)^(1-a) - j^(1-a)``; the entry at ``t = 0`` is 0.
    """
    f = np.asarray(values, dtype=float)
    n = f.shape[0]
    j = np.arange(n - 1, dtype=float)
    b = (j + 1) ** (1 - alpha) - j ** (1 - alpha)
    d = np.diff(f, axis=0)
    out = np.zeros_like(f)
    scale = h ** (-alpha) / math.gamma(2 - alpha)
    flat = d.reshape(n - 1, -1)
    res = np.empty_like(flat)
    for c in range(flat.shape[1]):
        res[:, c] = np.convolve(b, flat[:, c])[: n - 1]
    out[1:] = scale * res.reshape(d.shape)
    return out


def tc_fractional_rhs(params: TcIgcpParams, q: np.ndarray) -> np.ndarray:
    """``-mu q(n) + sum_{j0} mu_{j0} sum_{m <= n} Pr{M(j0) = m} q(n - m)`` along the last axis."""
    n_max = q.shape[-1] - 1
    c = levy_weights(params.base, n_max)
    mu = params.base.inner.total_rate
    gain = np.apply_along_axis(lambda row: np.convolve(c, row)[: n_max + 1], -1, q)
    return -mu * q + gain


def tc_fractional_ode_residual(params: TcIgcpParams, n_max: int, t_grid: Sequence[float],
                               t_min: float | None = None) -> float:
    """Max ``|D^alpha q - rhs|`` over ``n <= n_max`` and grid times ``>= t_min``.

    ``t_grid`` must be uniform and start at 0; ``t_min`` defaults to half the
    horizon, away from the ``t^alpha`` layer at the origin.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) < 3 or t_grid[0] != 0.0:
        raise DomainError("need a uniform grid starting at 0 with at least 3 points")
    h = t_grid[1] - t_grid[0]
    if not np.allclose(np.diff(t_grid), h, rtol=1e-9, atol=0.0):
        raise DomainError("t_grid must be uniform")
    if t_min is None:
        t_min = 0.5 * t_grid[-1]
    q, _ = tc_igcp_pmf_grid(params, t_grid, n_max)
    resid = caputo_l1(q, h, params.alpha) - tc_fractional_rhs(params, q)
    mask = t_grid >= t_min
    return float(np.abs(resid[mask]).max())


# ---------------------------------------------------------------------------
# moments and dependence
# ---------------------------------------------------------------------------

def tc_igcp_moments(params: TcIgcpParams, t: float) -> tuple[float, float]:
    """Mean ``S t^a / Gamma(a+1)`` and variance ``S^2 Var Y(t) + T E Y(t)``.

    The variance is ``R t^(2a) + T t^a / Gamma(a+1)``.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    ey, vy = inverse_stable_moments(params.alpha, t)
    return params.S * ey, params.S ** 2 * vy + params.T * ey


def tc_covariance(params: TcIgcpParams, s: float, t: float) -> float:
    """Exact ``Cov(M^a(s), M^a(t)) = T E Y(min) + S^2 Cov(Y(s), Y(t))``."""
    lo = min(s, t)
    return params.T * inverse_stable_moments(params.alpha, lo)[0] + params.S ** 2 * inverse_stable_covariance(
        params.alpha, s, t)


def tc_covariance_asymptotic(params: TcIgcpParams, s: float, t: float) -> float:
    """Large-``t`` covariance with ``s`` fixed."""
    a = params.alpha
    g = math.gamma(a + 1)
    return (params.T * s ** a / g
            + params.S ** 2 / g ** 2 * (a * s ** (2 * a) * special.beta(a, a + 1)
                                        - a * a / (a + 1) * s ** (a + 1) / t ** (1 - a)))


def tc_correlation_asymptotic(params: TcIgcpParams, s: float, t: float) -> float:
    return tc_covariance_asymptotic(params, s, t) / math.sqrt(
        tc_igcp_moments(params, s)[1] * tc_igcp_moments(params, t)[1])


def lrd_exponent(params: TcIgcpParams, s: float, t_grid: Sequence[float]) -> float:
    """Minus the least-squares slope of log correlation against log t."""
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) < 2 or np.any(t_grid <= s):
        raise DomainError("need at least two times, all larger than s")
    if np.log10(t_grid.max() / t_grid.min()) < 1.0:
        raise DomainError("t grid must span at least a decade")
    corr = np.array([tc_correlation_asymptotic(params, s, t) for t in t_grid])
    if np.any(corr <= 0):
        raise DomainError("non-positive correlation on the grid")
    slope = np.polyfit(np.log(t_grid), np.log(corr), 1)[0]
    return float(-slope)


def tc_increment_covariance(params: TcIgcpParams, h: float, s: float, t: float) -> float:
    """Exact ``Cov(Z_h(s), Z_h(t))`` for the increments ``Z_h(x) = M^a(x+h) - M^a(x)``."""
    C = lambda x, y: tc_covariance(params, x, y)  # noqa: E731
    return C(s + h, t + h) - C(s + h, t) - C(s, t + h) + C(s, t)


def tc_increment_correlation(params: TcIgcpParams, h: float, s: float, t: float) -> float:
    v1 = tc_increment_covariance(params, h, s, s)
    v2 = tc_increment_covariance(params, h, t, t)
    return tc_increment_covariance(params, h, s, t) / math.sqrt(v1 * v2)


# ---------------------------------------------------------------------------
# factorial moments
# ---------------------------------------------------------------------------

def _positive_compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    return [tuple(x + 1 for x in c) for c in enumerate_compositions(total - parts, parts)]


def _factorial_kernel(params: TcIgcpParams, m: int) -> float:
    """``sum_{j0} mu_{j0} sum_{s=1}^m j0^s / s! sum_{x_i >= 1, sum x = m} prod (1/x_i!) sum_j lambda_j (j)_{x_i}``."""
    rates = params.base.outer.rates
    f = [math.fsum(r * falling_factorial(j, x) for j, r in enumerate(rates, 1)) for x in range(m + 1)]
    inner_terms = []
    for s in range(1, m + 1):
        acc = math.fsum(math.prod(f[x] / math.factorial(x) for x in comp) for comp in _positive_compositions(m, s))
        inner_terms.append((s, acc))
    return math.fsum(mu * math.fsum(j0 ** s / math.factorial(s) * acc for s, acc in inner_terms)
                     for j0, mu in enumerate(params.base.inner.rates, 1))


def tc_factorial_moment(params: TcIgcpParams, r: int, t: float, budget: int = DEFAULT_WORK_BUDGET) -> SeriesResult:
    """``E[M (M-1) ... (M-r+1)]`` at time ``t`` as a finite composition sum."""
    if r < 1:
        raise DomainError("r must be at least 1")
    if t < 0:
        raise DomainError("t must be non-negative")
    if 2 ** (r - 1) * r > budget:
        raise BudgetExceeded("factorial moment order too large for the budget")
    if t == 0:
        return SeriesResult(0.0, 0, 0.0)
    a = params.alpha
    c = {m: _factorial_kernel(params, m) for m in range(1, r + 1)}
    terms = []
    for n in range(1, r + 1):
        s = math.fsum(math.prod(c[m] for m in comp) for comp in _positive_compositions(r, n))
        terms.append(math.factorial(r) / math.gamma(n * a + 1) * t ** (n * a) * s)
    return SeriesResult(math.fsum(terms), r, 0.0)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def sample_tc_igcp_value(params: TcIgcpParams, t: float, rng: np.random.Generator, size: int | None = None):
    """``Y(t)`` first, then the IGCP at that random time."""
    shape = 1 if size is None else size
    y = sample_inverse_stable(params.stable, t, rng, shape)
    s = np.zeros(shape, dtype=np.int64)
    for j0, mu in enumerate(params.base.inner.rates, 1):
        s += j0 * rng.poisson(mu * y)
    out = sample_gcp_values(params.base.outer, s.astype(float), rng)
    return int(out[0]) if size is None else out


def sample_tc_igcp_at(params: TcIgcpParams, times: Sequence[float], rng: np.random.Generator,
                      size: int, block: int = 64) -> np.ndarray:
    """Values at several times along common paths, shape ``(size, len(times))``.

    Uses the renewal form: inner events arrive after Mittag-Leffler waiting
    times at total rate ``mu``; each event has amplitude ``j0`` with
    probability ``mu_{j0}/mu`` and moves the outer GCP forward by ``j0``.
    """
    times = np.asarray(times, dtype=float)
    horizon = float(times.max()) if len(times) else 0.0
    inner = params.base.inner
    outer = params.base.outer
    mu = inner.total_rate
    probs = np.asarray(inner.rates) / mu
    out = np.zeros((size, len(times)), dtype=np.int64)
    clock = np.zeros(size)
    active = np.arange(size)
    while active.size:
        w = sample_ml_waiting_times(mu, params.alpha, rng, (active.size, block))
        ev = clock[active, None] + np.cumsum(w, axis=1)
        amp = rng.choice(np.arange(1, inner.k + 1), size=ev.shape, p=probs)
        inc = np.zeros(ev.shape, dtype=np.int64)
        for j, lam in enumerate(outer.rates, 1):
            inc += j * rng.poisson(lam * amp)
        for c, tau in enumerate(times):
            out[active, c] += np.where(ev <= tau, inc, 0).sum(axis=1)
        clock[active] = ev[:, -1]
        active = active[clock[active] <= horizon]
    return out


def srd_increment_diagnostic(params: TcIgcpParams, h: float, s: float, t_grid: Sequence[float],
                             rng: np.random.Generator, size: int = 100_000, n_boot: int = 200) -> dict:
    """Fit the decay exponent of ``Corr(Z_h(s), Z_h(t))`` from common-path Monte Carlo.

    Returns the fitted exponent, a 95% interval from a bootstrap over paths,
    the per-time correlations and an ``inconclusive`` flag set when any
    correlation is not significantly positive.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if h <= 0:
        raise DomainError("h must be positive")
    if len(t_grid) < 2 or np.any(t_grid < s + h):
        raise DomainError("need at least two times beyond s + h")
    times = np.concatenate([[s, s + h], t_grid, t_grid + h])
    vals = sample_tc_igcp_at(params, times, rng, size).astype(float)
    g = len(t_grid)
    zs = vals[:, 1] - vals[:, 0]
    zt = vals[:, 2 + g:] - vals[:, 2:2 + g]

    def fit(zs_, zt_):
        zc = zs_ - zs_.mean()
        tc = zt_ - zt_.mean(axis=0)
        denom = np.sqrt((zc ** 2).sum() * (tc ** 2).sum(axis=0))
        corr = (zc[:, None] * tc).sum(axis=0) / np.where(denom > 0, denom, np.inf)
        if np.any(corr <= 0):
            return corr, math.nan
        # weights ~ 1 / sd(log corr) since sd(corr) is roughly 1/sqrt(n) for weak correlation
        return corr, float(-np.polyfit(np.log(t_grid), np.log(corr), 1, w=corr)[0])

    corr, theta = fit(zs, zt)
    boot = []
    for _ in range(n_boot):
        idx = rng.integers(0, size, size)
        boot.append(fit(zs[idx], zt[idx])[1])
    boot = np.asarray(boot)
    finite = boot[np.isfinite(boot)]
    ci = (float(np.percentile(finite, 2.5)), float(np.percentile(finite, 97.5))) if finite.size else (math.nan, math.nan)
    se = 1.0 / math.sqrt(size)
    inconclusive = bool(np.any(corr < 2 * se) or not math.isfinite(theta))
    return {"alpha": params.alpha, "h": h, "s": s, "grid": t_grid.tolist(), "correlations": corr.tolist(),
            "fitted_exponent": theta, "ci": ci, "inconclusive": inconclusive}

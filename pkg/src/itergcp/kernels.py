"""Numerical and combinatorial primitives.

Bell (Touchard) polynomials, the three-parameter Mittag-Leffler function,
incomplete gamma, falling factorials, bounded-part partition enumeration and
discrete convolution powers.  Everything here is pure and thread-safe.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .core import DomainError, PmfVector, SeriesResult, TruncationError

_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# Bell polynomials
# ---------------------------------------------------------------------------

def bell_polynomials(n_max: int, x: float) -> list[float]:
    """All Bell polynomials ``B_0(x) .. B_{n_max}(x)`` via the Touchard recurrence.

    ``B_{n+1}(x) = x * sum_m C(n, m) B_m(x)``; finite and free of truncation.
    """
    if n_max < 0:
        raise DomainError("n must be non-negative")
    if x < 0:
        raise DomainError("x must be non-negative")
    out = [1.0]
    for n in range(n_max):
        acc = math.fsum(math.comb(n, m) * out[m] for m in range(n + 1))
        val = x * acc
        if not math.isfinite(val):
            raise OverflowError(f"Bell polynomial B_{n + 1}({x}) overflows double precision")
        out.append(val)
    return out


def bell_polynomial(n: int, x: float) -> float:
    """Bell polynomial ``B_n(x) = exp(-x) sum_r r^n x^r / r!``."""
    return _bell_cached(int(n), float(x))


@lru_cache(maxsize=65536)
def _bell_cached(n: int, x: float) -> float:
    return bell_polynomials(n, x)[n]


def bell_series(n: int, x: float, tol: float = 1e-15, max_terms: int = 100_000) -> SeriesResult:
    """Bell polynomial from its defining exponential series (reference evaluator)."""
    if n < 0 or x < 0:
        raise DomainError("bell_series needs n >= 0 and x >= 0")
    if x == 0.0:
        return SeriesResult(1.0 if n == 0 else 0.0, 1, 0.0)
    log_x = math.log(x)
    terms: list[float] = []

    def log_term(r: int) -> float:
        if r == 0:
            return -x if n == 0 else -math.inf
        return n * math.log(r) + r * log_x - math.lgamma(r + 1) - x

    # terms rise until r ~ x + n/..., then decay super-geometrically
    for r in range(max_terms):
        terms.append(math.exp(log_term(r)))
        if r > x and r > 1:
            ratio = math.exp(log_term(r + 1) - log_term(r))
            if ratio < 0.5 and terms[-1] < tol * max(terms):
                tail = math.exp(log_term(r + 1)) / (1.0 - ratio)
                return SeriesResult(math.fsum(terms), r + 1, tail)
    raise TruncationError("Bell series did not converge", math.fsum(terms))


# ---------------------------------------------------------------------------
# Mittag-Leffler
# ---------------------------------------------------------------------------

def _ml_log_term(j: int, alpha: float, beta: float, delta: float, log_abs_x: float, lg_delta: float) -> float:
    return (math.lgamma(j + delta) - lg_delta - math.lgamma(j + 1.0)
            - math.lgamma(j * alpha + beta) + j * log_abs_x)


def mittag_leffler_3p(alpha: float, beta: float, delta: float, x: float,
                      tol: float = 1e-12, max_terms: int = 10_000) -> SeriesResult:
    """Three-parameter Mittag-Leffler function ``E^delta_{alpha,beta}(x)``.

    Sums ``sum_j Gamma(j+delta) x^j / (Gamma(delta) j! Gamma(j alpha + beta))``
    until ``|term| < tol |partial sum|`` with decreasing terms.  Negative
    arguments use Neumaier-compensated accumulation; the returned
    ``tail_bound`` covers the geometric tail beyond the last term and the
    accumulated rounding of the alternating sum.
    """
    if not (0.0 < alpha <= 1.0):
        raise DomainError("alpha must lie in (0, 1]")
    if beta <= 0 or delta <= 0:
        raise DomainError("beta and delta must be positive")
    x = float(x)
    if x == 0.0:
        return SeriesResult(1.0 / math.gamma(beta), 1, 0.0)

    lg_delta = math.lgamma(delta)
    log_abs_x = math.log(abs(x))
    negative = x < 0

    total = 0.0
    comp = 0.0
    abs_sum = 0.0
    round_err = 0.0
    prev_mag = math.inf
    for j in range(max_terms):
        lt = _ml_log_term(j, alpha, beta, delta, log_abs_x, lg_delta)
        mag = math.exp(lt)
        term = -mag if (negative and j % 2) else mag
        # Neumaier summation
        s = total + term
        if abs(total) >= abs(term):
            comp += (total - s) + term
        else:
            comp += (term - s) + total
        total = s
        abs_sum += mag
        round_err += mag * _EPS * (abs(lt) + 4.0)
        partial = total + comp
        if j > 0 and mag < tol * abs(partial) and mag <= prev_mag:
            lt1 = _ml_log_term(j + 1, alpha, beta, delta, log_abs_x, lg_delta)
            lt2 = _ml_log_term(j + 2, alpha, beta, delta, log_abs_x, lg_delta)
            r1 = math.exp(lt1 - lt)
            r2 = math.exp(lt2 - lt1)
            rho = max(r1, r2)
            if rho < 1.0:
                tail = math.exp(lt1) / (1.0 - rho)
                bound = tail + round_err + 2.0 * _EPS * abs_sum
                return SeriesResult(float(partial), j + 1, float(bound))
        prev_mag = mag
    raise TruncationError(
        f"Mittag-Leffler series did not reach tolerance in {max_terms} terms",
        total + comp,
    )


def mittag_leffler_3p_array(alpha: float, beta: float, delta: float, x: np.ndarray,
                            tol: float = 1e-14, max_terms: int = 10_000) -> np.ndarray:
    """Vectorised ``E^delta_{alpha,beta}`` over an array of moderate arguments.

    Sums a common number of terms for every entry; stops once every entry's
    last term is below ``tol`` times its partial sum.
    """
    if not (0.0 < alpha <= 1.0) or beta <= 0 or delta <= 0:
        raise DomainError("need alpha in (0,1], beta > 0, delta > 0")
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    comp = np.zeros_like(x)
    lg_delta = math.lgamma(delta)
    nz = x != 0
    log_abs = np.where(nz, np.log(np.abs(np.where(nz, x, 1.0))), 0.0)
    sign = np.sign(x)
    prev = np.full_like(x, np.inf)
    for j in range(max_terms):
        coef = (math.lgamma(j + delta) - lg_delta - math.lgamma(j + 1.0)
                - math.lgamma(j * alpha + beta))
        if j == 0:
            term = np.full_like(x, math.exp(coef))
        else:
            term = np.where(nz, np.exp(coef + j * log_abs), 0.0) * sign ** j
        s = out + term
        comp += np.where(np.abs(out) >= np.abs(term), (out - s) + term, (term - s) + out)
        out = s
        mag = np.abs(term)
        if j > 0 and np.all((mag <= tol * np.abs(out + comp)) & (mag <= prev)):
            return out + comp
        prev = mag
    raise TruncationError("vectorised Mittag-Leffler series did not converge")


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def enumerate_weighted_partitions(k: int, n: int) -> list[tuple[int, ...]]:
    """All ``(x_1..x_k)`` with ``sum_j j x_j = n``, ``x_j >= 0``.

    Order is lexicographic descending on ``(x_k, ..., x_1)``, e.g. ``(3, 4)``
    gives ``(1,0,1), (0,2,0), (2,1,0), (4,0,0)``.
    """
    return list(_weighted_partitions(int(k), int(n)))


@lru_cache(maxsize=4096)
def _weighted_partitions(k: int, n: int) -> tuple[tuple[int, ...], ...]:
    if k < 1:
        raise DomainError("k must be >= 1")
    if n < 0:
        raise DomainError("n must be >= 0")
    out: list[tuple[int, ...]] = []
    # stack items: (part size j being fixed, remaining weight, fixed tail x_{j+1..k})
    stack: list[tuple[int, int, tuple[int, ...]]] = [(k, n, ())]
    while stack:
        j, rem, tail = stack.pop()
        if j == 1:
            out.append((rem,) + tail)
            continue
        # push ascending so that the largest x_j pops first
        for xj in range(rem // j + 1):
            stack.append((j - 1, rem - j * xj, (xj,) + tail))
    return tuple(out)


def count_weighted_partitions(k: int, n: int) -> int:
    """``|Omega(k, n)|`` by dynamic programming (no enumeration)."""
    ways = [1] + [0] * n
    for j in range(1, k + 1):
        for m in range(j, n + 1):
            ways[m] += ways[m - j]
    return ways[n]


def enumerate_compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    """All non-negative ``(r_1..r_parts)`` summing to ``total``; ``r_1`` descending."""
    return list(_compositions(int(total), int(parts)))


@lru_cache(maxsize=4096)
def _compositions(total: int, parts: int) -> tuple[tuple[int, ...], ...]:
    if parts < 1:
        raise DomainError("parts must be >= 1")
    if total < 0:
        raise DomainError("total must be >= 0")
    out: list[tuple[int, ...]] = []
    stack: list[tuple[int, int, tuple[int, ...]]] = [(parts, total, ())]
    while stack:
        left, rem, head = stack.pop()
        if left == 1:
            out.append(head + (rem,))
            continue
        for r in range(rem + 1):
            stack.append((left - 1, rem - r, head + (r,)))
    return tuple(out)


def count_compositions(total: int, parts: int) -> int:
    return math.comb(total + parts - 1, parts - 1)


# ---------------------------------------------------------------------------
# Convolution, gamma, factorials
# ---------------------------------------------------------------------------

def pmf_convolution_power(pmf: PmfVector, m: int, max_len: int | None = None) -> PmfVector:
    """Distribution of the sum of ``m`` iid copies of ``pmf``.

    ``m = 0`` gives the point mass at 0.  Without ``max_len`` the full support
    is kept; otherwise mass beyond ``max_len - 1`` is dropped and added to the
    output ``tail_bound`` together with ``m`` times the input bound.
    """
    if m < 0:
        raise DomainError("m must be non-negative")
    base = np.asarray(pmf.probs, dtype=float)
    if m == 0:
        return PmfVector(np.array([1.0]), 0.0)
    dropped = 0.0

    def clip(a: np.ndarray) -> np.ndarray:
        nonlocal dropped
        if max_len is not None and len(a) > max_len:
            dropped += math.fsum(a[max_len:])
            return a[:max_len]
        return a

    result: np.ndarray | None = None
    power = clip(base.copy())
    e = m
    while e:
        if e & 1:
            result = power.copy() if result is None else clip(np.convolve(result, power))
        e >>= 1
        if e:
            power = clip(np.convolve(power, power))
    assert result is not None
    return PmfVector(result, m * pmf.tail_bound + dropped)


def lower_incomplete_gamma(s: float, x: float) -> float:
    """``gamma(s, x) = int_0^x e^{-u} u^{s-1} du`` (scipy's regularised gamma times Gamma(s))."""
    if s <= 0:
        raise DomainError("s must be positive")
    if x < 0:
        raise DomainError("x must be non-negative")
    if x == 0:
        return 0.0
    return float(special.gammainc(s, x) * special.gamma(s))


def regularized_lower_gamma(s: float, x: float) -> float:
    """``gamma(s, x) / Gamma(s)``; stays finite where ``Gamma(s)`` would overflow."""
    if s <= 0:
        raise DomainError("s must be positive")
    return float(special.gammainc(s, max(x, 0.0)))


def falling_factorial(j: int, m: int) -> int:
    """``(j)_m = j (j-1) ... (j-m+1)``, with ``(j)_0 = 1``."""
    if m < 0:
        raise DomainError("m must be non-negative")
    out = 1
    for i in range(m):
        out *= j - i
    return out


def poisson_log_pmf(x: int, rate: float) -> float:
    if rate == 0.0:
        return 0.0 if x == 0 else -math.inf
    return x * math.log(rate) - rate - math.lgamma(x + 1)


def product_poisson(counts: Sequence[int], rates: Sequence[float]) -> float:
    """``prod_j rate_j^{x_j} e^{-rate_j} / x_j!`` in log space."""
    return math.exp(math.fsum(poisson_log_pmf(x, r) for x, r in zip(counts, rates)))


def pgf_coefficients(pgf: Callable[[complex], complex], n_max: int, n_points: int = 1024) -> np.ndarray:
    """First ``n_max + 1`` power-series coefficients of a pgf by the trapezoidal Cauchy integral.

    Samples the unit circle at ``n_points`` roots of unity; the aliasing error for
    coefficient ``n`` is ``sum_{m >= 1} p(n + m * n_points)``.
    """
    if n_points <= n_max:
        raise ValueError("n_points must exceed n_max")
    z = np.exp(2j * np.pi * np.arange(n_points) / n_points)
    vals = np.array([pgf(complex(u)) for u in z])
    coef = np.fft.fft(vals) / n_points
    return coef[: n_max + 1].real

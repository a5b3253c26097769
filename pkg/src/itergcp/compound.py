"""Compound GCP and compound IGCP ``Z(t) = sum_{i <= M(M0(t))} X_i``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import special

from .core import DomainError, PmfVector, SeriesResult, TruncationError
from .gcp import GcpParams, gcp_pmf_vector, sample_gcp_values
from .igcp import IgcpParams, igcp_cutoff, igcp_pmf_vector, sample_igcp_value
from .kernels import pmf_convolution_power

KINDS = ("point_mass", "geometric", "exponential", "gcp_unit", "explicit_discrete")


@dataclass(frozen=True)
class JumpLaw:
    """Law of the iid jumps ``X_i``.

    ``point_mass`` (parameter ``a``), ``geometric`` (``p``, support 1, 2, ...),
    ``exponential`` (``rate``), ``gcp_unit`` (``gcp``: ``X = M(1)``) or
    ``explicit_discrete`` (``pmf`` over 0, 1, ...).
    """

    kind: str
    a: float = 1.0
    p: float = 0.5
    rate: float = 1.0
    gcp: GcpParams | None = None
    pmf: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise DomainError(f"unknown jump law {self.kind!r}; choose from {KINDS}")
        if self.kind == "geometric" and not 0 < self.p <= 1:
            raise DomainError("geometric p must lie in (0, 1]")
        if self.kind == "exponential" and not self.rate > 0:
            raise DomainError("exponential rate must be positive")
        if self.kind == "gcp_unit" and self.gcp is None:
            raise DomainError("gcp_unit needs GCP rates")
        if self.kind == "point_mass" and self.a < 0:
            raise DomainError("point mass location must be non-negative")
        if self.kind == "explicit_discrete":
            pmf = np.asarray(self.pmf, dtype=float)
            if pmf.ndim != 1 or len(pmf) == 0 or np.any(pmf < 0) or abs(pmf.sum() - 1) > 1e-12:
                raise DomainError("explicit pmf must be non-negative and sum to 1 within 1e-12")

    # constructors
    @classmethod
    def point_mass(cls, a: float) -> "JumpLaw":
        return cls("point_mass", a=float(a))

    @classmethod
    def geometric(cls, p: float) -> "JumpLaw":
        return cls("geometric", p=float(p))

    @classmethod
    def exponential(cls, rate: float) -> "JumpLaw":
        return cls("exponential", rate=float(rate))

    @classmethod
    def gcp_unit(cls, rates: Sequence[float]) -> "JumpLaw":
        return cls("gcp_unit", gcp=GcpParams(rates))

    @classmethod
    def explicit(cls, pmf: Sequence[float]) -> "JumpLaw":
        return cls("explicit_discrete", pmf=tuple(float(x) for x in pmf))

    @property
    def discrete(self) -> bool:
        if self.kind == "point_mass":
            return float(self.a).is_integer()
        return self.kind != "exponential"

    @property
    def mean(self) -> float:
        if self.kind == "point_mass":
            return self.a
        if self.kind == "geometric":
            return 1.0 / self.p
        if self.kind == "exponential":
            return 1.0 / self.rate
        if self.kind == "gcp_unit":
            return self.gcp.mean_rate
        pmf = np.asarray(self.pmf)
        return float(np.dot(np.arange(len(pmf)), pmf))

    @property
    def variance(self) -> float:
        if self.kind == "point_mass":
            return 0.0
        if self.kind == "geometric":
            return (1.0 - self.p) / self.p ** 2
        if self.kind == "exponential":
            return 1.0 / self.rate ** 2
        if self.kind == "gcp_unit":
            return self.gcp.second_rate
        pmf = np.asarray(self.pmf)
        x = np.arange(len(pmf))
        return float(np.dot(x * x, pmf)) - self.mean ** 2

    def pgf(self, u):
        """``E u^X`` (discrete laws)."""
        if not self.discrete:
            raise DomainError("pgf needs a discrete jump law")
        if self.kind == "point_mass":
            return u ** int(self.a)
        if self.kind == "geometric":
            return self.p * u / (1 - (1 - self.p) * u)
        if self.kind == "gcp_unit":
            return np.exp(-sum(r * (1 - u ** j) for j, r in enumerate(self.gcp.rates, 1)))
        return sum(q * u ** i for i, q in enumerate(self.pmf))

    def pmf_vector(self, n_max: int) -> PmfVector:
        """``Pr{X = i}``, ``i = 0..n_max``, with the mass beyond ``n_max`` as tail."""
        if not self.discrete:
            raise DomainError("pmf needs a discrete jump law")
        probs = np.zeros(n_max + 1)
        if self.kind == "point_mass":
            a = int(self.a)
            if a <= n_max:
                probs[a] = 1.0
        elif self.kind == "geometric":
            i = np.arange(1, n_max + 1)
            probs[1:] = self.p * (1 - self.p) ** (i - 1)
        elif self.kind == "gcp_unit":
            probs = gcp_pmf_vector(self.gcp, 1.0, n_max).probs
        else:
            pmf = np.asarray(self.pmf)
            m = min(len(pmf), n_max + 1)
            probs[:m] = pmf[:m]
        return PmfVector(probs, max(0.0, 1.0 - math.fsum(probs)))

    def conv_power_pmf(self, m: int, n_max: int) -> np.ndarray:
        """``Psi^{*(m)}(n)`` for ``n = 0..n_max``; closed forms where available."""
        n = np.arange(n_max + 1)
        if m == 0:
            out = np.zeros(n_max + 1)
            out[0] = 1.0
            return out
        if self.kind == "geometric":
            out = np.zeros(n_max + 1)
            ok = n >= m
            nn = n[ok]
            out[ok] = np.exp(special.gammaln(nn) - special.gammaln(m) - special.gammaln(nn - m + 1)
                             + m * math.log(self.p)
                             + (nn - m) * (math.log1p(-self.p) if self.p < 1 else 0.0))
            if self.p == 1:
                out[ok] = (nn == m).astype(float)
            return out
        if self.kind == "gcp_unit":
            return gcp_pmf_vector(self.gcp, float(m), n_max).probs
        if self.kind == "point_mass":
            out = np.zeros(n_max + 1)
            if m * int(self.a) <= n_max:
                out[m * int(self.a)] = 1.0
            return out
        return pmf_convolution_power(self.pmf_vector(n_max), m, n_max + 1).probs

    def conv_power_cdf(self, m: int, w: float) -> float:
        """``H^{*(m)}(w) = Pr{X_1 + ... + X_m <= w}``."""
        if w < 0:
            return 0.0
        if m == 0:
            return 1.0
        if self.kind == "exponential":
            return float(special.gammainc(m, self.rate * w))
        if self.kind == "point_mass":
            return 1.0 if m * self.a <= w else 0.0
        return float(np.sum(self.conv_power_pmf(m, int(math.floor(w)))))

    def sample_sums(self, counts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """``sum_{i <= counts[r]} X_i`` for every entry of ``counts``."""
        counts = np.asarray(counts, dtype=np.int64)
        if self.kind == "point_mass":
            return counts * self.a
        if self.kind == "exponential":
            out = np.zeros(counts.shape)
            pos = counts > 0
            out[pos] = rng.gamma(counts[pos], 1.0 / self.rate)
            return out
        if self.kind == "geometric":
            out = counts.copy()
            pos = counts > 0
            if self.p < 1:
                out[pos] += rng.negative_binomial(counts[pos], self.p)
            return out
        if self.kind == "gcp_unit":
            return sample_gcp_values(self.gcp, counts.astype(float), rng)
        pmf = np.asarray(self.pmf)
        draws = rng.choice(len(pmf), size=int(counts.sum()), p=pmf / pmf.sum())
        owner = np.repeat(np.arange(counts.size), counts.ravel())
        return np.bincount(owner, weights=draws, minlength=counts.size).astype(np.int64).reshape(counts.shape)


# ---------------------------------------------------------------------------
# compound GCP
# ---------------------------------------------------------------------------

def cgcp_pgf(outer: GcpParams, law: JumpLaw, u, t: float):
    """``exp(-sum_j lambda_j t (1 - (E u^X)^j))``."""
    if abs(u) > 1 + 1e-15:
        raise DomainError("|u| must not exceed 1")
    g = law.pgf(u)
    return np.exp(-t * sum(r * (1 - g ** j) for j, r in enumerate(outer.rates, 1)))


# ---------------------------------------------------------------------------
# compound IGCP
# ---------------------------------------------------------------------------

def _counting_pmf(params: IgcpParams, t: float, m_max: int | None, tol: float) -> PmfVector:
    pv = igcp_pmf_vector(params, t, m_max)
    if pv.tail_bound > tol:
        raise TruncationError(f"IGCP tail beyond m_max={len(pv) - 1} is {pv.tail_bound:.3g} > {tol:g}",
                              tail_bound=pv.tail_bound)
    return pv


def compound_igcp_cdf(params: IgcpParams, law: JumpLaw, w: float, t: float,
                      m_max: int | None = None, tol: float = 1e-10) -> float:
    """``Pr{Z(t) <= w} = 1{w>=0} p(0,t) + sum_{m>=1} H^{*(m)}(w) p(m,t)``.

    The exponential law uses the regularised incomplete gamma for ``H^{*(m)}``.
    """
    if t == 0:
        return 1.0 if w >= 0 else 0.0
    pv = _counting_pmf(params, t, m_max, tol)
    if w < 0:
        return 0.0
    terms = [pv.probs[0]]
    if law.kind == "exponential":
        m = np.arange(1, len(pv))
        terms.extend(special.gammainc(m, law.rate * w) * pv.probs[1:])
    else:
        terms.extend(law.conv_power_cdf(m, w) * pv.probs[m] for m in range(1, len(pv)))
    return math.fsum(terms)


def compound_igcp_pmf_vector(params: IgcpParams, law: JumpLaw, t: float, n_max: int,
                             m_max: int | None = None, tol: float = 1e-10) -> PmfVector:
    """``Pr{Z(t) = n}`` for ``n <= n_max`` (discrete laws).

    ``sum_m Psi^{*(m)}(n) p(m, t)``; ``tail_bound`` is the neglected IGCP mass.
    Laws without mass at zero only need ``m <= n_max``.
    """
    if not law.discrete:
        raise DomainError("pmf needs a discrete jump law")
    if t == 0:
        out = np.zeros(n_max + 1)
        out[0] = 1.0
        return PmfVector(out, 0.0)
    no_zero = law.kind == "geometric" or (law.kind == "point_mass" and law.a >= 1)
    if m_max is None:
        m_max = n_max if no_zero else igcp_cutoff(params, t)
    pv = igcp_pmf_vector(params, t, m_max)
    tail = 0.0 if no_zero and m_max >= n_max else pv.tail_bound
    if tail > tol:
        raise TruncationError(f"IGCP tail {tail:.3g} exceeds {tol:g}", tail_bound=tail)
    out = np.zeros(n_max + 1)
    for m in range(m_max + 1):
        out += pv.probs[m] * law.conv_power_pmf(m, n_max)
    return PmfVector(out, tail, {"t": float(t)})


def compound_igcp_pmf(params: IgcpParams, law: JumpLaw, n: int, t: float,
                      m_max: int | None = None) -> SeriesResult:
    pv = compound_igcp_pmf_vector(params, law, t, max(n, 0), m_max)
    return SeriesResult(pv[n], len(pv), pv.tail_bound)


def compound_igcp_pgf(params: IgcpParams, law: JumpLaw, u, t: float):
    """``exp(-sum mu_{j0} t (1 - exp(-j0 sum_j lambda_j (1 - (E u^X)^j))))``."""
    if abs(u) > 1 + 1e-15:
        raise DomainError("|u| must not exceed 1")
    g = law.pgf(u)
    phi = sum(r * (1 - g ** j) for j, r in enumerate(params.outer.rates, 1))
    return np.exp(-t * sum(mu * (1 - np.exp(-j0 * phi)) for j0, mu in enumerate(params.inner.rates, 1)))


def compound_igcp_moments(params: IgcpParams, law: JumpLaw, t: float) -> tuple[float, float]:
    """Mean ``S t E X`` and variance ``S t Var X + T t (E X)^2``."""
    if t < 0:
        raise DomainError("t must be non-negative")
    a, b = params.outer.mean_rate, params.outer.second_rate
    m1, m2 = params.inner.mean_rate, params.inner.second_rate
    ex, vx = law.mean, law.variance
    mean = a * m1 * t * ex
    var = (a * ex) ** 2 * m2 * t + m1 * t * (vx * a + ex ** 2 * b)
    return mean, var


def compound_fdd(params: IgcpParams, law: JumpLaw, times: Sequence[float], targets: Sequence[float],
                 m_max: int | None = None) -> float:
    """``Pr{Z(t_1) <= x_1, ..., Z(t_n) <= x_n}`` for a discrete non-negative law.

    Increments over ``[t_{l-1}, t_l]`` are independent compound variables;
    the joint probability is a forward pass over states ``<= x_l``.
    """
    times = [float(x) for x in times]
    if any(b <= a for a, b in zip(times, times[1:])) or times[0] < 0:
        raise DomainError("times must be non-negative and strictly increasing")
    if len(targets) != len(times):
        raise DomainError("need one target per time")
    caps = [int(math.floor(x)) for x in targets]
    if min(caps) < 0:
        return 0.0
    top = max(caps)
    state = np.zeros(top + 1)
    state[0] = 1.0
    prev = 0.0
    for t, cap in zip(times, caps):
        inc = compound_igcp_pmf_vector(params, law, t - prev, top, m_max).probs
        state = np.convolve(state, inc)[: top + 1]
        state[cap + 1:] = 0.0
        prev = t
    return math.fsum(state)


@lru_cache(maxsize=256)
def _alpha_star(law: JumpLaw, j: int, n_max: int) -> np.ndarray:
    return pmf_convolution_power(law.pmf_vector(n_max), j, n_max + 1).probs


def d_process_pgf(params: IgcpParams, law: JumpLaw, u, t: float, tol: float = 1e-13):
    """``exp(-t sum mu_{j0} (1 - exp(-j0 sum_j lambda_j sum_{i>=1} a_i^{*(j)} (1 - u^i))))``.

    ``a^{*(j)}`` is the ``j``-fold convolution of the jump pmf, truncated where
    the remaining jump mass is below ``tol``.
    """
    if abs(u) > 1 + 1e-15:
        raise DomainError("|u| must not exceed 1")
    if not law.discrete:
        raise DomainError("needs a discrete jump law on the non-negative integers")
    n_max = 16
    while law.pmf_vector(n_max).tail_bound * params.outer.k > tol:
        n_max *= 2
        if n_max > 1 << 16:
            raise TruncationError("jump law tail too heavy for the i-sum")
    phi = 0.0
    for j, lam in enumerate(params.outer.rates, 1):
        a = _alpha_star(law, j, j * n_max)
        ii = np.arange(len(a))
        phi += lam * np.sum(a[1:] * (1 - u ** ii[1:]))
    return np.exp(-t * sum(mu * (1 - np.exp(-j0 * phi)) for j0, mu in enumerate(params.inner.rates, 1)))


def compound_martingale_residual(path_value, params: IgcpParams, law: JumpLaw, t: float):
    """``D(t) - S t E X``."""
    return np.asarray(path_value, dtype=float) - params.S * t * law.mean


def sample_compound_value(params: IgcpParams, law: JumpLaw, t: float, rng: np.random.Generator,
                          size: int) -> np.ndarray:
    counts = sample_igcp_value(params, t, rng, size)
    return law.sample_sums(counts, rng)


def sample_compound_fdd(params: IgcpParams, law: JumpLaw, times: Sequence[float],
                        rng: np.random.Generator, size: int) -> np.ndarray:
    """Joint draws ``(Z(t_1), ..., Z(t_n))`` built from independent increments."""
    out = np.zeros((size, len(times)))
    prev, acc = 0.0, np.zeros(size)
    for c, t in enumerate(times):
        acc = acc + sample_compound_value(params, law, t - prev, rng, size)
        out[:, c] = acc
        prev = t
    return out

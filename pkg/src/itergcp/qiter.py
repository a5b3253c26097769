"""q-iterated GCP ``M(M_1(M_2(...M_q(t)...)))``.

``layers[0]`` is ``M_1`` (fed straight into the outer GCP) and ``layers[-1]``
is ``M_q`` (run on physical time).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DomainError, BudgetExceeded, PmfVector, SeriesResult
from .gcp import GcpParams, gcp_cutoff, gcp_pmf_vector, sample_gcp_values
from .igcp import IgcpParams, igcp_pmf_vector

DEFAULT_TERM_BUDGET = 10_000_000


@dataclass(frozen=True)
class QIterParams:
    outer: GcpParams
    layers: tuple[GcpParams, ...]

    def __init__(self, outer, layers: Sequence):
        object.__setattr__(self, "outer", outer if isinstance(outer, GcpParams) else GcpParams(outer))
        lay = tuple(x if isinstance(x, GcpParams) else GcpParams(x) for x in layers)
        if not lay:
            raise DomainError("need at least one layer")
        object.__setattr__(self, "layers", lay)

    @property
    def q(self) -> int:
        return len(self.layers)


class _Recursion:
    """Memoised level pmfs ``p^{(i)}(., s)`` on ``0..n_max``.

    Each entry carries a bound on the mass above ``n_max`` and a bound on the
    error of the stored probabilities caused by cutting the layer sums.
    """

    def __init__(self, params: QIterParams, n_max: int, budget: int):
        self.params = params
        self.n_max = n_max
        self.budget = budget
        self.terms = 0
        self.base = IgcpParams(params.outer, params.layers[0])
        self.cache: dict[tuple[int, float], tuple[np.ndarray, float, float]] = {}

    def level(self, i: int, x: float) -> tuple[np.ndarray, float, float]:
        key = (i, x)
        if key in self.cache:
            return self.cache[key]
        if i == 0:
            v = igcp_pmf_vector(self.base, x, self.n_max)
            out = (v.probs, v.tail_bound, 0.0)
        else:
            layer = self.params.layers[i]
            w = gcp_pmf_vector(layer, x, gcp_cutoff(layer, x))
            self.terms += len(w.probs)
            if self.terms > self.budget:
                raise BudgetExceeded(f"q-iterated recursion exceeded {self.budget} terms")
            acc = np.zeros(self.n_max + 1)
            tail = err = w.tail_bound
            for s, ws in enumerate(w.probs):
                if ws == 0.0:
                    continue
                p, tb, eb = self.level(i - 1, float(s))
                acc += ws * p
                tail += ws * tb
                err += ws * eb
            out = (acc, tail, err)
        self.cache[key] = out
        return out


def qiter_pmf_vector(params: QIterParams, t: float, n_max: int,
                     budget: int = DEFAULT_TERM_BUDGET) -> PmfVector:
    """``Pr{M^q(t) = n}``, ``n <= n_max``, by conditioning on each layer in turn.

    Level ``i`` sums ``Pr{M_i(x) = s} p^{(i-1)}(n, s)`` over ``s`` up to the layer's
    mean + 12 sd; the tail bound adds the dropped layer mass and the lower-level tails.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    if t == 0:
        p = np.zeros(n_max + 1)
        p[0] = 1.0
        return PmfVector(p, 0.0, {"t": 0.0})
    rec = _Recursion(params, n_max, budget)
    probs, tail, err = rec.level(params.q - 1, float(t))
    return PmfVector(probs, float(tail), {"t": float(t), "q": params.q, "truncation_error": float(err)})


def qiter_pmf(params: QIterParams, n: int, t: float, budget: int = DEFAULT_TERM_BUDGET) -> SeriesResult:
    if n < 0:
        raise DomainError("n must be non-negative")
    v = qiter_pmf_vector(params, t, n, budget)
    return SeriesResult(float(v.probs[n]), len(v.probs), v.meta["truncation_error"])


def qiter_pgf(params: QIterParams, u, t: float):
    """Nested exponential pgf, folded from the outer GCP towards physical time."""
    if abs(u) > 1 + 1e-15:
        raise DomainError("|u| must not exceed 1")
    phi = -sum(r * (1 - u ** j) for j, r in enumerate(params.outer.rates, 1))
    for layer in params.layers:
        phi = -sum(r * (1 - np.exp(j * phi)) for j, r in enumerate(layer.rates, 1))
    val = np.exp(t * phi)
    return complex(val) if isinstance(u, complex) else float(np.real(val))


def qiter_moments(params: QIterParams, t: float) -> tuple[float, float]:
    """Mean ``a_0 a_1 ... a_q t`` and variance ``sum_r b_r (prod_{l<r} a_l^2)(prod_{i>r} a_i) t``.

    ``a_r`` and ``b_r`` are ``sum j lambda_j`` and ``sum j^2 lambda_j`` of level ``r``
    (level 0 is the outer GCP).
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    levels = (params.outer,) + params.layers
    a = [lv.mean_rate for lv in levels]
    b = [lv.second_rate for lv in levels]
    mean = float(np.prod(a)) * t
    var = 0.0
    for r in range(len(levels)):
        var += b[r] * float(np.prod(np.square(a[:r]))) * float(np.prod(a[r + 1:])) * t
    if t > 0:
        assert var > mean, "q-iterated GCP must be overdispersed"
    return mean, var


def sample_qiter_value(params: QIterParams, t: float, rng: np.random.Generator, size: int | None = None):
    """Sample the innermost layer at ``t``, feed each integer output to the next level."""
    if t < 0:
        raise DomainError("t must be non-negative")
    x = np.full(1 if size is None else size, float(t))
    for layer in reversed(params.layers):
        x = sample_gcp_values(layer, x, rng).astype(float)
    out = sample_gcp_values(params.outer, x, rng)
    return int(out[0]) if size is None else out

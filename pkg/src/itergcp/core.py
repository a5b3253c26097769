"""Shared result types, exceptions and truncation helpers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy import optimize


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class TruncationError(ArithmeticError):
    """A series could not be certified within its term cap or tolerance.

    ``partial`` carries whatever was accumulated before giving up.
    """

    def __init__(self, message: str, partial: float = float("nan"), tail_bound: float = float("inf")):
        super().__init__(message)
        self.partial = partial
        self.tail_bound = tail_bound


class BudgetExceeded(TruncationError):
    """Combinatorial work would exceed the configured term budget."""


class IntegrationError(RuntimeError):
    """ODE integration failed (step-size underflow or solver failure)."""


DEFAULT_WORK_BUDGET = 10_000_000


@dataclass(frozen=True)
class SeriesResult:
    """Value of a (possibly truncated) series with an absolute error certificate."""

    value: float
    terms_used: int
    tail_bound: float = 0.0

    def __float__(self) -> float:
        return float(self.value)


@dataclass
class PmfVector:
    """Probability mass over states ``0..N`` plus a bound on the mass beyond ``N``.

    ``tail_bound`` bounds the absolute probability missing from ``probs``
    (mass at states > N plus any propagated truncation error).
    """

    probs: np.ndarray
    tail_bound: float = 0.0
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.ndim != 1:
            raise ValueError("PmfVector expects a one-dimensional array")
        if self.tail_bound < 0:
            raise ValueError("tail_bound must be non-negative")

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, n: int) -> float:
        if n < 0 or n >= len(self.probs):
            return 0.0
        return float(self.probs[n])

    @property
    def mass(self) -> float:
        return math.fsum(self.probs)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def to_csv(self, with_tail: bool = False) -> str:
        header = "n,probability,tail_bound" if with_tail else "n,probability"
        rows = [header]
        for n, p in enumerate(self.probs):
            row = f"{n},{fmt_real(p)}"
            if with_tail:
                row += f",{fmt_real(self.tail_bound)}"
            rows.append(row)
        return "\n".join(rows) + "\n"

    def to_json(self) -> str:
        payload = {
            "meta": {**self.meta, "tail_bound": self.tail_bound},
            "pmf": [float(p) for p in self.probs],
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PmfVector":
        payload = json.loads(text)
        meta = dict(payload.get("meta", {}))
        tail = float(meta.pop("tail_bound", 0.0))
        return cls(np.array(payload["pmf"], dtype=float), tail, meta)

    @classmethod
    def from_csv(cls, text: str) -> "PmfVector":
        lines = [ln for ln in text.strip().splitlines() if ln]
        cols = lines[0].split(",")
        rows = [ln.split(",") for ln in lines[1:]]
        probs = np.zeros(len(rows))
        tail = 0.0
        for r in rows:
            probs[int(r[0])] = float(r[1])
            if "tail_bound" in cols:
                tail = float(r[cols.index("tail_bound")])
        return cls(probs, tail)


def fmt_real(x: float) -> str:
    """Locale-free 17 significant digit rendering used by all exports."""
    return format(float(x), ".17g")


def chernoff_upper_tail(log_mgf: Callable[[float], float], n: float, theta_max: float = 20.0) -> float:
    """Bound ``Pr{X >= n}`` by ``inf_theta exp(log_mgf(theta) - theta n)``.

    Overflow inside ``log_mgf`` counts as an infinite exponent.  Returns 1.0
    when the optimum is at ``theta = 0``.
    """

    def objective(theta: float) -> float:
        try:
            val = log_mgf(theta) - theta * n
        except OverflowError:
            return 1e300
        return val if np.isfinite(val) else 1e300

    # keep the search interval inside the region where the mgf is representable
    while theta_max > 1e-8 and objective(theta_max) >= 1e300:
        theta_max *= 0.5
    res = optimize.minimize_scalar(objective, bounds=(0.0, theta_max), method="bounded",
                                   options={"xatol": 1e-10})
    best = min(res.fun, 0.0)
    return float(math.exp(best)) if best > -745 else 0.0


def gaussian_cutoff(mean: float, variance: float, sigmas: float = 12.0, pad: int = 20) -> int:
    """Truncation point ``ceil(mean + sigmas * sd + pad)``."""
    return int(math.ceil(mean + sigmas * math.sqrt(max(variance, 0.0)) + pad))

"""Deterministic parallel Monte Carlo and goodness-of-fit helpers.

Work is cut into fixed-size chunks; chunk ``i`` always draws from the
counter-based stream ``Philox(SeedSequence([master_seed, i]))`` and partial
moments are merged by a fixed pairwise tree, so results do not depend on the
number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .core import DomainError, PmfVector

Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class McConfig:
    samples: int
    master_seed: int = 0
    workers: int = 1
    checkpoints: tuple[float, ...] = field(default=())
    chunk_size: int = 10_000

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise DomainError("samples must be positive")
        if self.workers < 1:
            raise DomainError("workers must be positive")
        if self.chunk_size < 1:
            raise DomainError("chunk_size must be positive")
        if not 0 <= self.master_seed < 2 ** 64:
            raise DomainError("master_seed must fit in 64 unsigned bits")

    def chunks(self) -> list[tuple[int, int]]:
        """``(stream_id, count)`` pairs covering ``samples``."""
        full, rest = divmod(self.samples, self.chunk_size)
        out = [(i, self.chunk_size) for i in range(full)]
        if rest:
            out.append((full, rest))
        return out


@dataclass(frozen=True)
class McEstimate:
    mean: np.ndarray | float
    std_error: np.ndarray | float
    n: int
    seed_provenance: tuple[int, int]
    variance: np.ndarray | float = 0.0

    def z_score(self, target) -> np.ndarray | float:
        se = np.asarray(self.std_error, dtype=float)
        diff = np.asarray(self.mean, dtype=float) - np.asarray(target, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff == 0, 0.0, np.inf))
        return float(z) if z.ndim == 0 else z

    def within(self, target, k: float = 4.0) -> bool:
        return bool(np.all(np.abs(self.z_score(target)) <= k))


class McWorkerError(RuntimeError):
    def __init__(self, stream_id: int, cause: BaseException):
        super().__init__(f"sampler failed on stream {stream_id}: {cause!r}")
        self.stream_id = stream_id


def stream(master_seed: int, stream_id: int) -> np.random.Generator:
    """Independent generator for ``(master_seed, stream_id)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(master_seed), int(stream_id)])))


def _run_chunk(sampler: Sampler, seed: int, sid: int, count: int) -> np.ndarray:
    try:
        x = np.asarray(sampler(stream(seed, sid), count), dtype=float)
    except Exception as exc:  # re-raised with the stream id attached
        raise McWorkerError(sid, exc) from exc
    if x.shape[0] != count:
        raise McWorkerError(sid, ValueError(f"sampler returned {x.shape[0]} rows, expected {count}"))
    return x


def _map_chunks(sampler: Sampler, config: McConfig, fn) -> list:
    chunks = config.chunks()
    if config.workers == 1:
        return [fn(_run_chunk(sampler, config.master_seed, sid, c)) for sid, c in chunks]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        futures = [pool.submit(lambda sc: fn(_run_chunk(sampler, config.master_seed, *sc)), sc)
                   for sc in chunks]
        return [f.result() for f in futures]


def _moments(x: np.ndarray) -> tuple[int, np.ndarray, np.ndarray]:
    n = x.shape[0]
    m = x.mean(axis=0)
    return n, m, ((x - m) ** 2).sum(axis=0)


def _merge(a, b):
    """Chan et al. pairwise update of ``(n, mean, M2)``."""
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    d = mb - ma
    return n, ma + d * (nb / n), sa + sb + d * d * (na * nb / n)


def _tree_reduce(parts: list):
    while len(parts) > 1:
        nxt = [_merge(parts[i], parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def run_mc(sampler: Sampler, config: McConfig) -> McEstimate:
    """Mean and standard error of ``sampler(rng, count)`` rows over ``config.samples`` draws.

    Rows may be scalars or vectors; every statistic is then per column.
    """
    if config.samples < 2:
        raise DomainError("need at least two samples for a standard error")
    parts = _map_chunks(sampler, config, _moments)
    n, mean, m2 = _tree_reduce(parts)
    var = m2 / (n - 1)
    se = np.sqrt(var / n)
    if np.ndim(mean) == 0:
        mean, var, se = float(mean), float(var), float(se)
    return McEstimate(mean, se, n, (config.master_seed, len(parts)), var)


def run_mc_samples(sampler: Sampler, config: McConfig) -> np.ndarray:
    """All draws, concatenated in chunk order."""
    return np.concatenate(_map_chunks(sampler, config, lambda x: x), axis=0)


# ---------------------------------------------------------------------------
# goodness of fit
# ---------------------------------------------------------------------------

def _pool_bins(expected: np.ndarray, min_bin: float) -> list[tuple[int, int]]:
    """Consecutive ``[lo, hi)`` groups whose expected counts reach ``min_bin``."""
    groups = []
    lo = 0
    acc = 0.0
    for i, e in enumerate(expected):
        acc += e
        if acc >= min_bin:
            groups.append((lo, i + 1))
            lo, acc = i + 1, 0.0
    if lo < len(expected):
        if groups:
            groups[-1] = (groups[-1][0], len(expected))
        else:
            groups.append((lo, len(expected)))
    return groups


def chi_square_gof(observed_counts: Sequence[int], expected_pmf: PmfVector | Sequence[float],
                   min_bin: float = 5.0) -> tuple[float, float]:
    """Pearson chi-square of counts on ``0, 1, ...`` against a pmf.

    The mass not covered by the pmf array (and any observations beyond it)
    form one extra upper bin; bins are pooled left to right until each
    expects at least ``min_bin`` draws.  Degrees of freedom: bins - 1.
    """
    probs = np.asarray(expected_pmf.probs if isinstance(expected_pmf, PmfVector) else expected_pmf, dtype=float)
    obs = np.asarray(observed_counts, dtype=float)
    n = obs.sum()
    if n <= 0:
        raise DomainError("no observations")
    L = len(probs)
    obs_in = np.zeros(L)
    obs_in[: min(L, len(obs))] = obs[:L]
    obs_tail = obs[L:].sum()
    tail_p = max(0.0, 1.0 - math.fsum(probs))
    exp_all = np.append(probs * n, tail_p * n)
    obs_all = np.append(obs_in, obs_tail)
    groups = _pool_bins(exp_all, min_bin)
    if len(groups) < 2:
        raise DomainError("all expected mass falls in a single pooled bin")
    e = np.array([exp_all[a:b].sum() for a, b in groups])
    o = np.array([obs_all[a:b].sum() for a, b in groups])
    if np.any((e == 0) & (o > 0)):
        return math.inf, 0.0
    keep = e > 0
    stat = float(((o[keep] - e[keep]) ** 2 / e[keep]).sum())
    dof = int(keep.sum()) - 1
    return stat, float(stats.chi2.sf(stat, dof))


def chi_square_samples(samples: Sequence[int], expected_pmf: PmfVector | Sequence[float],
                       min_bin: float = 5.0) -> tuple[float, float]:
    x = np.asarray(samples, dtype=np.int64)
    if x.size == 0:
        raise DomainError("empty sample")
    if x.min() < 0:
        raise DomainError("samples must be non-negative integers")
    return chi_square_gof(np.bincount(x), expected_pmf, min_bin)


def ks_test(samples: Sequence[float], cdf: Callable) -> tuple[float, float]:
    """One-sample Kolmogorov-Smirnov statistic with the asymptotic p-value."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise DomainError("empty sample")
    res = stats.kstest(x, cdf, method="asymp")
    return float(res.statistic), float(res.pvalue)

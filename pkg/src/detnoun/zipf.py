"""Rank-frequency statistics and Zipf shape estimation.

A Zipfian rank distribution assigns rank ``r`` the probability
``(1/r^a) / sum_n (1/n^a)`` over ranks ``1..N``.  The shape ``a`` is
estimated by ordinary least squares of log count on log rank, the
straight-line reading of a rank-frequency plot on log-log axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import stats as _scipy_stats


@dataclass(frozen=True)
class RankedCounts:
    """Positive counts in descending rank order."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.float64)
        if counts.ndim != 1 or counts.size == 0:
            raise ValueError("counts must be a non-empty 1-D array")
        if np.any(counts <= 0):
            raise ValueError("all counts must be positive")
        if np.any(np.diff(counts) > 0):
            raise ValueError("counts must be non-increasing")
        object.__setattr__(self, "counts", counts)

    @property
    def n_ranks(self) -> int:
        return int(self.counts.size)


@dataclass(frozen=True)
class ZipfFit:
    """Least-squares Zipf shape with its log-log goodness of fit."""

    a: float
    r_squared: float
    n_ranks: int


def rank_frequencies(token_counts: Mapping[str, int]) -> RankedCounts:
    """Sort a token->count table into descending rank order.

    Ties are broken by ascending token so the ranking is deterministic.
    """
    if not token_counts:
        raise ValueError("token_counts must be non-empty")
    ordered = sorted(token_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return RankedCounts(np.array([c for _, c in ordered], dtype=np.float64))


def zipf_probabilities(n_ranks: int, a: float) -> np.ndarray:
    """Normalized probabilities for ranks ``1..n_ranks``."""
    if n_ranks < 1:
        raise ValueError("n_ranks must be >= 1")
    if a <= 0:
        raise ValueError("shape a must be positive")
    weights = np.arange(1, n_ranks + 1, dtype=np.float64) ** (-float(a))
    return weights / weights.sum()


def zipf_probability(rank: int, n_ranks: int, a: float) -> float:
    """Probability of a single rank under the truncated Zipf distribution."""
    if not 1 <= rank <= n_ranks:
        raise ValueError(f"rank {rank} out of range 1..{n_ranks}")
    return float(zipf_probabilities(n_ranks, a)[rank - 1])


def fit_zipf_shape(ranked: RankedCounts) -> ZipfFit:
    """OLS of log count on log rank; the shape is the negated slope."""
    n = ranked.n_ranks
    if n < 2:
        raise ValueError("need at least 2 ranks to fit a shape")
    log_rank = np.log(np.arange(1, n + 1, dtype=np.float64))
    log_count = np.log(ranked.counts)
    result = _scipy_stats.linregress(log_rank, log_count)
    return ZipfFit(a=float(-result.slope), r_squared=float(result.rvalue**2), n_ranks=n)


def sample_zipf_ranks(
    n_ranks: int, a: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw ``size`` ranks (1-based) from the truncated Zipf distribution."""
    probs = zipf_probabilities(n_ranks, a)
    return rng.choice(np.arange(1, n_ranks + 1), size=size, p=probs)

"""Determiner/noun overlap: empirical counting and Zipfian expectation.

The empirical overlap of a corpus is the fraction of distinct nouns that
occur immediately after at least two distinct determiners.  Its
expectation under random pairing is computed per noun frequency rank:
with ``S`` determiner+noun pair tokens drawn independently, a noun of
rank probability ``p`` and determiner probabilities ``d_i``,

    P(>= 2 distinct determiners) = 1 + (D-1)(1-p)^S - sum_i (d_i p + 1 - p)^S

and the corpus-level expectation is the mean of that quantity over all
``N`` ranks.  A Monte Carlo estimator of the same quantity serves as an
independent check of the closed form.

Noun identification is a pluggable word list (:class:`NounLexicon`)
rather than a tagger, keeping the measurement reproducible; the packaged
default list targets American-English child-directed speech.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from detnoun.corpus import Utterance
from detnoun.zipf import zipf_probabilities

# Relative frequencies of "a" and "the" in large American-English
# child-directed-speech corpora, and the Zipf shape fitted there.
DEFAULT_DETERMINERS = ("a", "the")
DEFAULT_DETERMINER_PROBS = (0.393, 0.607)
DEFAULT_ZIPF_SHAPE = 1.06

_PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class DeterminerProfile:
    """Determiner inventory with occurrence probabilities summing to 1."""

    determiners: tuple[str, ...] = DEFAULT_DETERMINERS
    probs: tuple[float, ...] = DEFAULT_DETERMINER_PROBS

    def __post_init__(self):
        if not self.determiners:
            raise ValueError("profile needs at least one determiner")
        if len(self.determiners) != len(self.probs):
            raise ValueError("determiners and probs must have equal length")
        if len(set(self.determiners)) != len(self.determiners):
            raise ValueError("duplicate determiner")
        if any(not 0.0 < p <= 1.0 for p in self.probs):
            raise ValueError("each determiner probability must be in (0, 1]")
        if abs(sum(self.probs) - 1.0) > _PROB_SUM_TOL:
            raise ValueError(f"determiner probabilities sum to {sum(self.probs)}, not 1")

    @property
    def n_determiners(self) -> int:
        return len(self.determiners)


@dataclass(frozen=True)
class NounLexicon:
    """Lowercase word strings treated as nouns."""

    nouns: frozenset[str]

    def __post_init__(self):
        if not self.nouns:
            raise ValueError("noun lexicon is empty")
        bad = [n for n in self.nouns if n != n.lower() or not n]
        if bad:
            raise ValueError(f"lexicon entries must be non-empty lowercase: {sorted(bad)[:5]}")

    def __contains__(self, word: str) -> bool:
        return word in self.nouns

    @classmethod
    def from_file(cls, path: str | Path) -> "NounLexicon":
        words = {
            line.strip().lower()
            for line in Path(path).read_text(encoding="utf-8").splitlines()
            if line.strip() and not line.startswith("#")
        }
        return cls(frozenset(words))


def default_noun_lexicon() -> NounLexicon:
    """The noun list shipped with the package."""
    text = resources.files("detnoun.data").joinpath("nouns.txt").read_text(encoding="utf-8")
    words = {line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")}
    return NounLexicon(frozenset(words))


@dataclass(frozen=True)
class OverlapParams:
    """Inputs to the expected-overlap computation.

    ``n_nouns`` distinct nouns, ``s_pairs`` determiner+noun pair tokens,
    Zipf shape ``a``, and the determiner profile.
    """

    n_nouns: int
    s_pairs: int
    a: float = DEFAULT_ZIPF_SHAPE
    profile: DeterminerProfile = DeterminerProfile()

    def __post_init__(self):
        if self.n_nouns < 1:
            raise ValueError("n_nouns must be >= 1")
        if self.s_pairs < 0:
            raise ValueError("s_pairs must be >= 0")
        if self.a <= 0:
            raise ValueError("shape a must be positive")


@dataclass(frozen=True)
class OverlapReport:
    """Measured and expected overlap for one corpus."""

    n_nouns: int
    s_pairs: int
    empirical: float
    expected: float

    def to_dict(self) -> dict:
        return {
            "N": self.n_nouns,
            "S": self.s_pairs,
            "empirical_overlap": self.empirical,
            "expected_overlap": self.expected,
        }


@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    stderr: float


def extract_det_noun_pairs(
    utterances: Iterable[Utterance],
    profile: DeterminerProfile = DeterminerProfile(),
    lexicon: NounLexicon | None = None,
) -> Counter[tuple[str, str]]:
    """Collect every adjacent (determiner, noun) bigram as a multiset."""
    if lexicon is None:
        lexicon = default_noun_lexicon()
    determiners = set(profile.determiners)
    pairs: Counter[tuple[str, str]] = Counter()
    for u in utterances:
        for w1, w2 in zip(u.tokens, u.tokens[1:]):
            if w1 in determiners and w2 in lexicon:
                pairs[(w1, w2)] += 1
    return pairs


def empirical_overlap(pairs: Mapping[tuple[str, str], int]) -> float:
    """Fraction of distinct nouns attested with >= 2 distinct determiners."""
    dets_by_noun: defaultdict[str, set[str]] = defaultdict(set)
    for det, noun in pairs:
        dets_by_noun[noun].add(det)
    if not dets_by_noun:
        return 0.0
    overlapping = sum(1 for dets in dets_by_noun.values() if len(dets) >= 2)
    return overlapping / len(dets_by_noun)


def _per_rank_overlaps(params: OverlapParams) -> np.ndarray:
    """Expected overlap for every rank 1..N, computed in log space."""
    s = params.s_pairs
    n_dets = params.profile.n_determiners
    if s == 0:
        return np.zeros(params.n_nouns)
    p = zipf_probabilities(params.n_nouns, params.a)
    with np.errstate(divide="ignore"):
        # (1-p)^S and (d_i*p + 1 - p)^S via exp(S*log1p(.)) for large S
        none_seen = np.exp(s * np.log1p(-p))
        values = 1.0 + (n_dets - 1) * none_seen
        for d_i in params.profile.probs:
            values -= np.exp(s * np.log1p(-p * (1.0 - d_i)))
    return np.clip(values, 0.0, 1.0)


def expected_overlap_at_rank(rank: int, params: OverlapParams) -> float:
    """Probability that the noun at ``rank`` co-occurs with >= 2 distinct
    determiners over ``s_pairs`` independent pair draws."""
    if not 1 <= rank <= params.n_nouns:
        raise ValueError(f"rank {rank} out of range 1..{params.n_nouns}")
    return float(_per_rank_overlaps(params)[rank - 1])


def expected_overlap(params: OverlapParams) -> float:
    """Mean of :func:`expected_overlap_at_rank` over all ranks."""
    return float(_per_rank_overlaps(params).mean())


def monte_carlo_overlap(
    params: OverlapParams,
    replicates: int,
    seed: int,
    chunk_size: int = 20_000,
) -> MonteCarloResult:
    """Simulate the overlap fraction to validate the closed form.

    Each replicate draws ``s_pairs`` (determiner, noun-rank) pairs, scores
    the fraction of the ``n_nouns`` ranks seen with >= 2 distinct
    determiners, and the estimator returns the mean and standard error of
    that fraction across replicates.  The pair multinomial is factorized
    into a rank multinomial followed by conditional binomial splits over
    determiners, which draws the identical distribution while letting
    numpy vectorize across replicates.  Deterministic for a given seed.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    rng = np.random.default_rng(seed)
    n, s = params.n_nouns, params.s_pairs
    det_probs = params.profile.probs
    rank_probs = zipf_probabilities(n, params.a)
    fractions = np.empty(replicates)
    done = 0
    while done < replicates:
        m = min(chunk_size, replicates - done)
        rank_counts = rng.multinomial(s, rank_probs, size=m)  # (m, n)
        distinct = np.zeros((m, n), dtype=np.int64)
        remaining = rank_counts
        mass_left = 1.0
        for d_i in det_probs[:-1]:
            drawn = rng.binomial(remaining, min(d_i / mass_left, 1.0))
            distinct += drawn > 0
            remaining = remaining - drawn
            mass_left -= d_i
        distinct += remaining > 0
        fractions[done:done + m] = (distinct >= 2).mean(axis=1)
        done += m
    mean = float(fractions.mean())
    stderr = float(fractions.std(ddof=1) / np.sqrt(replicates)) if replicates > 1 else 0.0
    return MonteCarloResult(mean, stderr)


def overlap_report(
    utterances: Iterable[Utterance],
    profile: DeterminerProfile = DeterminerProfile(),
    lexicon: NounLexicon | None = None,
    a: float = DEFAULT_ZIPF_SHAPE,
) -> OverlapReport:
    """Measure N and S on a corpus and score both overlap statistics."""
    pairs = extract_det_noun_pairs(utterances, profile, lexicon)
    n_nouns = len({noun for _, noun in pairs})
    s_pairs = sum(pairs.values())
    empirical = empirical_overlap(pairs)
    if n_nouns == 0:
        return OverlapReport(0, 0, 0.0, 0.0)
    expected = expected_overlap(OverlapParams(n_nouns, s_pairs, a, profile))
    return OverlapReport(n_nouns, s_pairs, empirical, expected)

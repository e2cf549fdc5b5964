"""Interpolated modified Kneser-Ney n-gram models with sampling generation.

Bigram and trigram models over id-encoded utterances.  Training strips
the padding prefix from each utterance, prepends ``order - 1`` boundary
markers (the PAD id doubles as the boundary symbol), and appends EOS as a
predicted token.  Lower orders use continuation counts (number of
distinct one-token left extensions), and each order carries three
discounts estimated from its count-of-counts:

    Y  = N1 / (N1 + 2*N2)
    Dk = k - (k + 1) * Y * N(k+1) / Nk        for k = 1, 2, 3(+)

Probabilities interpolate the discounted maximum-likelihood estimate with
the next-lower order, terminating in a uniform distribution over the full
id space, so every in-vocabulary token has strictly positive probability
under every context.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from detnoun.corpus import EOS_ID, PAD_ID, Vocabulary

logger = logging.getLogger(__name__)

FALLBACK_DISCOUNT = 0.75
_FILE_MAGIC = "#KNLM"
_FILE_VERSION = 1


def _estimate_discounts(count_values: Iterable[int], label: str) -> tuple[float, float, float]:
    """Three-discount estimate from a level's count-of-counts."""
    cc = Counter()
    for c in count_values:
        if 1 <= c <= 4:
            cc[c] += 1
    n1, n2, n3, n4 = cc[1], cc[2], cc[3], cc[4]
    if n1 == 0 or n2 == 0:
        logger.warning(
            "%s: degenerate count-of-counts (N1=%d, N2=%d); using fixed discount %.2f",
            label, n1, n2, FALLBACK_DISCOUNT,
        )
        return (FALLBACK_DISCOUNT,) * 3
    y = n1 / (n1 + 2.0 * n2)
    d1 = 1.0 - 2.0 * y * n2 / n1
    d2 = 2.0 - 3.0 * y * n3 / n2
    if n3 > 0:
        d3 = 3.0 - 4.0 * y * n4 / n3
    else:
        logger.warning("%s: no count-of-count mass at 3; using fixed discount %.2f",
                       label, FALLBACK_DISCOUNT)
        d3 = FALLBACK_DISCOUNT
    return tuple(max(d, 0.0) for d in (d1, d2, d3))


class KneserNeyModel:
    """Trained modified Kneser-Ney model of a fixed order (2 or 3).

    The model is immutable after construction and safe to share across
    threads; generation takes an external rng.
    """

    def __init__(
        self,
        order: int,
        vocab: Vocabulary,
        top_counts: dict[tuple[int, ...], dict[int, int]],
        discounts: dict[int, tuple[float, float, float]] | None = None,
    ):
        if order not in (2, 3):
            raise ValueError("order must be 2 or 3")
        self.order = order
        self.vocab = vocab
        self.vocab_size = vocab.size
        # counts[n][context][word]: raw counts at n == order, continuation
        # counts (distinct left extensions) below.
        self.counts: dict[int, dict[tuple[int, ...], dict[int, int]]] = {order: top_counts}
        for n in range(order - 1, 0, -1):
            cont: dict[tuple[int, ...], dict[int, int]] = defaultdict(dict)
            for ctx, words in self.counts[n + 1].items():
                sub = ctx[1:]
                for w in words:
                    cont[sub][w] = cont[sub].get(w, 0) + 1
            self.counts[n] = dict(cont)
        self.discounts: dict[int, tuple[float, float, float]] = {}
        self.totals: dict[int, dict[tuple[int, ...], int]] = {}
        self.gamma_mass: dict[int, dict[tuple[int, ...], float]] = {}
        for n in range(order, 0, -1):
            level = self.counts[n]
            if discounts is not None:
                d1, d2, d3 = discounts[n]
            else:
                d1, d2, d3 = _estimate_discounts(
                    (c for words in level.values() for c in words.values()),
                    f"order-{order} model, level {n}",
                )
            self.discounts[n] = (d1, d2, d3)
            totals: dict[tuple[int, ...], int] = {}
            gammas: dict[tuple[int, ...], float] = {}
            for ctx, words in level.items():
                total = sum(words.values())
                seen1 = seen2 = seen3 = 0
                for c in words.values():
                    if c == 1:
                        seen1 += 1
                    elif c == 2:
                        seen2 += 1
                    else:
                        seen3 += 1
                totals[ctx] = total
                gammas[ctx] = d1 * seen1 + d2 * seen2 + d3 * seen3
            self.totals[n] = totals
            self.gamma_mass[n] = gammas
        self._unigram = self._build_unigram_vector()
        self._vector_cache: dict[tuple[int, ...], np.ndarray] = {}

    def _discount_for(self, n: int, count: int) -> float:
        if count <= 0:
            return 0.0
        d1, d2, d3 = self.discounts[n]
        return d1 if count == 1 else d2 if count == 2 else d3

    def _build_unigram_vector(self) -> np.ndarray:
        words = self.counts[1].get((), {})
        total = sum(words.values())
        if total == 0:
            return np.full(self.vocab_size, 1.0 / self.vocab_size)
        gamma = self.gamma_mass[1][()]
        vec = np.full(self.vocab_size, (gamma / total) / self.vocab_size)
        for w, c in words.items():
            vec[w] += max(c - self._discount_for(1, c), 0.0) / total
        return vec

    def _norm_context(self, context: Sequence[int]) -> tuple[int, ...]:
        ctx = tuple(int(t) for t in context)
        want = self.order - 1
        if len(ctx) < want:
            ctx = (PAD_ID,) * (want - len(ctx)) + ctx
        return ctx[-want:] if want else ()

    def prob(self, context: Sequence[int], word: int) -> float:
        """Interpolated probability of ``word`` after ``context``.

        Contexts shorter than ``order - 1`` are left-padded with the
        boundary marker.
        """
        return self._prob_at(self.order, self._norm_context(context), int(word))

    def _prob_at(self, n: int, ctx: tuple[int, ...], word: int) -> float:
        if n == 0:
            return 1.0 / self.vocab_size
        if n == 1:
            return float(self._unigram[word])
        lower = self._prob_at(n - 1, ctx[1:], word)
        total = self.totals[n].get(ctx, 0)
        if total == 0:
            return lower
        count = self.counts[n][ctx].get(word, 0)
        discounted = max(count - self._discount_for(n, count), 0.0)
        return discounted / total + (self.gamma_mass[n][ctx] / total) * lower

    def prob_vector(self, context: Sequence[int]) -> np.ndarray:
        """Distribution over the full id space for one context."""
        return self._vector_at(self.order, self._norm_context(context)).copy()

    def _vector_at(self, n: int, ctx: tuple[int, ...]) -> np.ndarray:
        if n == 1:
            return self._unigram
        cached = self._vector_cache.get((n,) + ctx) if n == self.order else None
        if cached is not None:
            return cached
        lower = self._vector_at(n - 1, ctx[1:])
        total = self.totals[n].get(ctx, 0)
        if total == 0:
            vec = lower
        else:
            vec = lower * (self.gamma_mass[n][ctx] / total)
            for w, c in self.counts[n][ctx].items():
                vec[w] += max(c - self._discount_for(n, c), 0.0) / total
        if n == self.order:
            if len(self._vector_cache) >= 512:
                self._vector_cache.pop(next(iter(self._vector_cache)))
            self._vector_cache[(n,) + ctx] = vec
        return vec

    def generate(
        self,
        seed_word: int,
        max_len: int = 10,
        rng: np.random.Generator | None = None,
    ) -> list[int]:
        """Sample a continuation of ``seed_word`` until EOS or ``max_len``.

        Sampling is inverse-CDF over the context distribution arranged in
        descending probability (ties by ascending id), so a quantile of 0
        reproduces the greedy argmax chain.  EOS terminates generation and
        is not part of the output.
        """
        seed_word = int(seed_word)
        if not 0 <= seed_word < self.vocab_size:
            raise ValueError(f"seed word id {seed_word} outside the vocabulary")
        if rng is None:
            rng = np.random.default_rng()
        seq = [seed_word]
        ids = np.arange(self.vocab_size)
        while len(seq) < max_len:
            probs = self._vector_at(self.order, self._norm_context(seq))
            by_prob_desc = np.lexsort((ids, -probs))
            cdf = np.cumsum(probs[by_prob_desc])
            j = int(np.searchsorted(cdf, rng.random(), side="right"))
            word = int(by_prob_desc[min(j, self.vocab_size - 1)])
            if word == EOS_ID:
                break
            seq.append(word)
        return seq

    def save(self, path: str | Path) -> None:
        """Write the versioned model file.

        Layout: magic/version line, order, three discounts per level
        (highest first), the vocabulary entries, then the highest-order
        count table sorted by n-gram.  Lower-order tables are derived
        deterministically on load.
        """
        lines = [f"{_FILE_MAGIC} v{_FILE_VERSION}", f"order\t{self.order}"]
        for n in range(self.order, 0, -1):
            d1, d2, d3 = self.discounts[n]
            lines.append(f"discounts\t{n}\t{d1!r}\t{d2!r}\t{d3!r}")
        lines.append(f"vocab\t{self.vocab.n_words}\t{self.vocab.max_words}")
        for token, count in self.vocab.entries:
            lines.append(f"{token}\t{count}")
        rows = sorted(
            (ctx + (w,), c)
            for ctx, words in self.counts[self.order].items()
            for w, c in words.items()
        )
        lines.append(f"counts\t{self.order}\t{len(rows)}")
        for ngram, c in rows:
            lines.append(" ".join(map(str, ngram)) + f"\t{c}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "KneserNeyModel":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or not lines[0].startswith(_FILE_MAGIC):
            raise ValueError(f"{path}: not a Kneser-Ney model file")
        if lines[0] != f"{_FILE_MAGIC} v{_FILE_VERSION}":
            raise ValueError(f"{path}: unsupported version {lines[0]!r}")
        pos = 1
        kind, order_s = lines[pos].split("\t")
        if kind != "order":
            raise ValueError(f"{path}: expected order line, got {lines[pos]!r}")
        order = int(order_s)
        pos += 1
        stored_discounts: dict[int, tuple[float, float, float]] = {}
        while lines[pos].startswith("discounts\t"):
            _, n_s, d1, d2, d3 = lines[pos].split("\t")
            stored_discounts[int(n_s)] = (float(d1), float(d2), float(d3))
            pos += 1
        _, n_entries_s, max_words_s = lines[pos].split("\t")
        pos += 1
        entries = []
        for _ in range(int(n_entries_s)):
            token, count = lines[pos].split("\t")
            entries.append((token, int(count)))
            pos += 1
        vocab = Vocabulary(entries, max_words=int(max_words_s))
        _, count_order_s, n_rows_s = lines[pos].split("\t")
        if int(count_order_s) != order:
            raise ValueError(f"{path}: count table order mismatch")
        pos += 1
        top: dict[tuple[int, ...], dict[int, int]] = defaultdict(dict)
        for _ in range(int(n_rows_s)):
            ngram_s, c = lines[pos].split("\t")
            ngram = tuple(int(t) for t in ngram_s.split())
            top[ngram[:-1]][ngram[-1]] = int(c)
            pos += 1
        return cls(order, vocab, dict(top), discounts=stored_discounts)


def _content_ids(row: Sequence[int]) -> list[int]:
    return [int(t) for t in row if int(t) != PAD_ID]


def train_kn(
    encoded_utterances: Iterable[Sequence[int]],
    order: int,
    vocab: Vocabulary,
) -> KneserNeyModel:
    """Count n-grams over the encoded corpus and build the smoothed model.

    Each utterance contributes ``boundary*(order-1) + tokens + EOS``; PAD
    ids in the input are treated as padding and stripped first.
    """
    if order not in (2, 3):
        raise ValueError("order must be 2 or 3")
    top: dict[tuple[int, ...], dict[int, int]] = defaultdict(dict)
    n_utterances = 0
    for row in encoded_utterances:
        n_utterances += 1
        seq = [PAD_ID] * (order - 1) + _content_ids(row) + [EOS_ID]
        for i in range(order - 1, len(seq)):
            ctx = tuple(seq[i - order + 1:i])
            w = seq[i]
            words = top[ctx]
            words[w] = words.get(w, 0) + 1
    if n_utterances == 0:
        raise ValueError("cannot train on an empty corpus")
    return KneserNeyModel(order, vocab, dict(top))


def generate_corpus(
    model: KneserNeyModel,
    source_encoded: Sequence[Sequence[int]],
    seed: int,
    max_len: int = 10,
) -> list[list[int]]:
    """Generate one utterance per source utterance.

    Each generation is seeded with the source's first non-padding token
    and uses its own counter-derived rng, so the output is deterministic
    for a given seed and independent of scheduling.  All-padding sources
    yield empty utterances.
    """
    out: list[list[int]] = []
    for i, row in enumerate(source_encoded):
        content = _content_ids(row)
        if not content:
            out.append([])
            continue
        rng = np.random.default_rng((seed, i))
        out.append(model.generate(content[0], max_len=max_len, rng=rng))
    return out

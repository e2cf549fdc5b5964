"""Transcript ingestion, vocabulary capping, and fixed-length encoding.

The input format is a minimal slice of the CHAT transcription convention:
utterance lines look like ``*MOT:<TAB>you want the ball .`` while header
(``@``) and dependent-tier (``%``) lines carry no speech and are skipped.
A plain-text fallback (one utterance per line, optional ``SPEAKER<TAB>``
prefix) covers corpora that are already tokenized.

Token cleaning is deliberately conservative: everything is lowercased,
bracketed annotation spans (``[...]``, ``<...>``) are dropped, tokens
starting with ``&`` and the unintelligible-speech fillers ``xxx``,
``yyy``, ``www`` are removed, and a terminal punctuation mark glued to a
word is split into its own token.  Punctuation tokens count like words
everywhere downstream (vocabulary cap and utterance length).
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

# Reserved ids, fixed so encodings stay valid across vocabulary reloads.
PAD_ID = 0
OOV_ID = 1
EOS_ID = 2
N_SPECIALS = 3

PAD_TOKEN = "<pad>"
OOV_TOKEN = "<oov>"
EOS_TOKEN = "<eos>"

_SPECIAL_TOKENS = {PAD_TOKEN: PAD_ID, OOV_TOKEN: OOV_ID, EOS_TOKEN: EOS_ID}

DEFAULT_CHILD_CODES = frozenset({"CHI"})
DEFAULT_MAX_WORDS = 3000
DEFAULT_MAX_LEN = 10


class ChatParseError(ValueError):
    """Malformed utterance line; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Utterance:
    """One speaker turn: an uppercase speaker code and its cleaned tokens."""

    speaker: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class CorpusStats:
    n_utterances: int
    n_tokens: int
    n_types: int


_ANNOTATION_SPANS = re.compile(r"\[[^\]]*\]|<[^>]*>")
_GLUED_TERMINAL = re.compile(r"([^.?!]+)([.?!])")
_FILLERS = frozenset({"xxx", "yyy", "www"})


def _clean_tokens(text: str) -> tuple[str, ...]:
    text = _ANNOTATION_SPANS.sub(" ", text)
    tokens: list[str] = []
    for raw in text.lower().split():
        if raw.startswith("&") or raw in _FILLERS:
            continue
        glued = _GLUED_TERMINAL.fullmatch(raw)
        if glued:
            tokens.extend(glued.groups())
        else:
            tokens.append(raw)
    return tuple(tokens)


def parse_chat(text: str) -> list[Utterance]:
    """Parse a CHAT-style transcript into utterances, in document order.

    Only ``*SPEAKER:`` lines produce utterances.  ``@`` headers, ``%``
    dependent tiers, blank lines, and indented continuation lines are
    ignored.  A ``*`` line without a colon raises :class:`ChatParseError`.
    """
    utterances: list[Utterance] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.startswith("*"):
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise ChatParseError(line_no, "utterance line has no speaker/content separator ':'")
        speaker = head[1:].strip().upper()
        if not speaker:
            raise ChatParseError(line_no, "utterance line has an empty speaker code")
        utterances.append(Utterance(speaker, _clean_tokens(rest)))
    return utterances


def parse_plain(text: str, default_speaker: str = "ADU") -> list[Utterance]:
    """Parse the plain-text fallback: one utterance per line.

    A leading ``SPEAKER<TAB>`` prefix (uppercase code) is honored when
    present; otherwise ``default_speaker`` is used.  Token cleaning is the
    same as for CHAT lines.  Blank lines are skipped.
    """
    utterances: list[Utterance] = []
    for line in text.splitlines():
        if not line.strip():
            continue
        speaker = default_speaker
        content = line
        head, sep, rest = line.partition("\t")
        if sep and head and head == head.upper() and " " not in head:
            speaker, content = head, rest
        utterances.append(Utterance(speaker, _clean_tokens(content)))
    return utterances


def read_transcript(path: str | Path, fmt: str = "auto") -> list[Utterance]:
    """Read one transcript file; ``fmt`` is ``chat``, ``plain``, or ``auto``.

    ``auto`` treats ``.cha`` files as CHAT and anything else as plain text.
    """
    path = Path(path)
    if fmt == "auto":
        fmt = "chat" if path.suffix.lower() == ".cha" else "plain"
    text = path.read_text(encoding="utf-8")
    if fmt == "chat":
        return parse_chat(text)
    if fmt == "plain":
        return parse_plain(text)
    raise ValueError(f"unknown transcript format {fmt!r}")


def filter_child_directed(
    utterances: Iterable[Utterance],
    child_codes: frozenset[str] | set[str] = DEFAULT_CHILD_CODES,
) -> list[Utterance]:
    """Keep utterances from every speaker except the child codes."""
    if not child_codes:
        raise ValueError("child_codes must be non-empty")
    return [u for u in utterances if u.speaker not in child_codes]


class Vocabulary:
    """Frequency-capped token<->id bijection with reserved special ids.

    Word entries are sorted by descending corpus count, ties broken by
    ascending token, and assigned ids ``N_SPECIALS..N_SPECIALS+n-1``.
    Lookups of unlisted tokens return ``OOV_ID``.
    """

    def __init__(self, entries: Sequence[tuple[str, int]], max_words: int):
        if max_words < 1:
            raise ValueError("max_words must be >= 1")
        if len(entries) > max_words:
            raise ValueError(f"{len(entries)} entries exceed max_words={max_words}")
        self.entries: tuple[tuple[str, int], ...] = tuple((str(t), int(c)) for t, c in entries)
        self.max_words = int(max_words)
        for token, count in self.entries:
            if count < 1:
                raise ValueError(f"entry {token!r} has non-positive count {count}")
            if token in _SPECIAL_TOKENS:
                raise ValueError(f"entry {token!r} collides with a reserved special token")
        self._id_of: dict[str, int] = dict(_SPECIAL_TOKENS)
        for i, (token, _) in enumerate(self.entries):
            self._id_of[token] = N_SPECIALS + i
        if len(self._id_of) != N_SPECIALS + len(self.entries):
            raise ValueError("duplicate token in vocabulary entries")
        self._token_of = {i: t for t, i in self._id_of.items()}

    @property
    def n_words(self) -> int:
        return len(self.entries)

    @property
    def size(self) -> int:
        """Total number of ids: word entries plus the specials."""
        return N_SPECIALS + len(self.entries)

    def __contains__(self, token: str) -> bool:
        return token in self._id_of

    def id(self, token: str) -> int:
        return self._id_of.get(token, OOV_ID)

    def token(self, token_id: int) -> str:
        try:
            return self._token_of[int(token_id)]
        except KeyError:
            raise ValueError(f"id {token_id} is not in the vocabulary") from None

    def count(self, token: str) -> int:
        i = self._id_of.get(token)
        if i is None or i < N_SPECIALS:
            return 0
        return self.entries[i - N_SPECIALS][1]

    def decode(self, ids: Iterable[int], strip_pad: bool = True) -> list[str]:
        tokens = [self.token(i) for i in ids]
        if strip_pad:
            tokens = [t for t in tokens if t != PAD_TOKEN]
        return tokens

    def save_tsv(self, path: str | Path) -> None:
        lines = [f"#PAD={PAD_ID}\tOOV={OOV_ID}\tEOS={EOS_ID}"]
        for token, count in self.entries:
            lines.append(f"{token}\t{self.id(token)}\t{count}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load_tsv(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or not lines[0].startswith("#PAD="):
            raise ValueError(f"{path}: missing vocabulary header row")
        specials = dict(field.split("=") for field in lines[0].lstrip("#").split("\t"))
        if {k: int(v) for k, v in specials.items()} != {"PAD": PAD_ID, "OOV": OOV_ID, "EOS": EOS_ID}:
            raise ValueError(f"{path}: special ids {specials} do not match the reserved ids")
        entries = []
        for line in lines[1:]:
            if not line.strip():
                continue
            token, token_id, count = line.split("\t")
            expected = N_SPECIALS + len(entries)
            if int(token_id) != expected:
                raise ValueError(f"{path}: id {token_id} for {token!r}, expected {expected}")
            entries.append((token, int(count)))
        return cls(entries, max_words=max(len(entries), 1))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self.entries == other.entries

    def __repr__(self) -> str:
        return f"Vocabulary({self.n_words} words, size={self.size})"


def build_vocabulary(
    utterances: Iterable[Utterance], max_words: int = DEFAULT_MAX_WORDS
) -> Vocabulary:
    """Count all tokens and keep the ``max_words`` most frequent.

    Ties at the frequency cut are broken lexicographically (ascending), so
    the result is deterministic for a given corpus.
    """
    if max_words < 1:
        raise ValueError("max_words must be >= 1")
    counts: Counter[str] = Counter()
    for u in utterances:
        counts.update(u.tokens)
    if not counts:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary(ranked[:max_words], max_words=max_words)


def encode_utterance(
    u: Utterance, vocab: Vocabulary, max_len: int = DEFAULT_MAX_LEN
) -> np.ndarray:
    """Map tokens to ids at a fixed length.

    Unknown tokens become ``OOV_ID``; utterances longer than ``max_len``
    keep their first ``max_len`` tokens; shorter ones are left-padded with
    ``PAD_ID``.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    ids = [vocab.id(t) for t in u.tokens[:max_len]]
    out = np.full(max_len, PAD_ID, dtype=np.int64)
    if ids:
        out[max_len - len(ids):] = ids
    return out


def encode_corpus(
    utterances: Sequence[Utterance], vocab: Vocabulary, max_len: int = DEFAULT_MAX_LEN
) -> np.ndarray:
    """Encode a whole corpus into an ``(n, max_len)`` id matrix."""
    out = np.full((len(utterances), max_len), PAD_ID, dtype=np.int64)
    for row, u in enumerate(utterances):
        out[row] = encode_utterance(u, vocab, max_len)
    return out


def corpus_stats(utterances: Sequence[Utterance]) -> CorpusStats:
    types: set[str] = set()
    n_tokens = 0
    for u in utterances:
        n_tokens += len(u.tokens)
        types.update(u.tokens)
    return CorpusStats(len(utterances), n_tokens, len(types))


def token_counts(utterances: Iterable[Utterance]) -> Counter[str]:
    """Corpus-wide token frequency table."""
    counts: Counter[str] = Counter()
    for u in utterances:
        counts.update(u.tokens)
    return counts


def write_tokenized(path: str | Path, utterances: Iterable[Utterance]) -> None:
    """Write one utterance per line, space-separated tokens.

    Empty utterances become empty lines so cardinality survives a round
    trip.
    """
    lines = [" ".join(u.tokens) for u in utterances]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_tokenized(path: str | Path, speaker: str = "ADU") -> list[Utterance]:
    """Read a tokenized corpus file back verbatim (no cleaning)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    return [Utterance(speaker, tuple(line.split())) for line in lines]


def counts_from_tsv(path: str | Path) -> "Counter[str]":
    """Read a token-count TSV: either ``token<TAB>count`` rows or a
    vocabulary file (``token<TAB>id<TAB>count`` with a header row)."""
    counts: Counter[str] = Counter()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) == 2:
            counts[fields[0]] = int(fields[1])
        elif len(fields) == 3:
            counts[fields[0]] = int(fields[2])
        else:
            raise ValueError(f"{path}: expected 2 or 3 tab-separated fields, got {len(fields)}")
    return counts

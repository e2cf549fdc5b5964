"""Determiner/noun productivity lab.

A small numpy library for measuring how productively a speaker (or a
generative model trained on that speaker's output) combines determiners
with nouns.  The toolkit covers the whole experimental loop at desk
scale: ingest child-directed-speech transcripts, cap the vocabulary and
encode utterances, fit a Zipf shape parameter to noun frequencies, train
modified Kneser-Ney n-gram baselines and a GRU sequence autoencoder,
generate text from each model, and score every corpus with empirical and
expected determiner/noun overlap.
"""

from detnoun.corpus import (
    ChatParseError,
    CorpusStats,
    Utterance,
    Vocabulary,
    build_vocabulary,
    corpus_stats,
    encode_corpus,
    encode_utterance,
    filter_child_directed,
    parse_chat,
    parse_plain,
)
from detnoun.ngram import KneserNeyModel, train_kn
from detnoun.overlap import (
    DeterminerProfile,
    NounLexicon,
    OverlapParams,
    OverlapReport,
    empirical_overlap,
    expected_overlap,
    expected_overlap_at_rank,
    extract_det_noun_pairs,
    monte_carlo_overlap,
    overlap_report,
)
from detnoun.zipf import RankedCounts, ZipfFit, fit_zipf_shape, rank_frequencies, zipf_probability

__version__ = "0.1.0"

__all__ = [
    "ChatParseError",
    "CorpusStats",
    "DeterminerProfile",
    "KneserNeyModel",
    "NounLexicon",
    "OverlapParams",
    "OverlapReport",
    "RankedCounts",
    "Utterance",
    "Vocabulary",
    "ZipfFit",
    "build_vocabulary",
    "corpus_stats",
    "empirical_overlap",
    "encode_corpus",
    "encode_utterance",
    "expected_overlap",
    "expected_overlap_at_rank",
    "extract_det_noun_pairs",
    "filter_child_directed",
    "fit_zipf_shape",
    "monte_carlo_overlap",
    "overlap_report",
    "parse_chat",
    "parse_plain",
    "rank_frequencies",
    "train_kn",
    "zipf_probability",
]

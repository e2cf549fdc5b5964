import numpy as np
import pytest

from detnoun.corpus import (
    EOS_ID,
    N_SPECIALS,
    OOV_ID,
    OOV_TOKEN,
    PAD_ID,
    PAD_TOKEN,
    ChatParseError,
    Utterance,
    Vocabulary,
    build_vocabulary,
    corpus_stats,
    counts_from_tsv,
    encode_corpus,
    encode_utterance,
    filter_child_directed,
    parse_chat,
    parse_plain,
    read_tokenized,
    write_tokenized,
)


def utt(speaker, *tokens):
    return Utterance(speaker, tuple(tokens))


class TestParseChat:
    def test_basic_line(self):
        out = parse_chat("*MOT:\tyou want the ball .")
        assert out == [utt("MOT", "you", "want", "the", "ball", ".")]

    def test_non_utterance_tiers_ignored(self):
        assert parse_chat("@Begin\n%mor: pro|you v|want\n@End") == []

    def test_annotation_stripping(self):
        out = parse_chat("*MOT:\tthe [x 2] dog &um ran .")
        assert out == [utt("MOT", "the", "dog", "ran", ".")]

    def test_angle_span_and_fillers(self):
        out = parse_chat("*INV:\t<I mean> xxx look at yyy the www truck ?")
        assert out == [utt("INV", "look", "at", "the", "truck", "?")]

    def test_lowercasing_and_glued_punctuation(self):
        out = parse_chat("*MOT:\tLook at Mommy.")
        assert out == [utt("MOT", "look", "at", "mommy", ".")]

    def test_missing_colon_is_an_error_with_line_number(self):
        with pytest.raises(ChatParseError) as err:
            parse_chat("@Begin\n*MOT no colon here")
        assert err.value.line_no == 2

    def test_document_order_and_multiple_speakers(self):
        text = "*MOT:\thi .\n%com: greeting\n*CHI:\thi .\n*FAT:\tball !"
        out = parse_chat(text)
        assert [u.speaker for u in out] == ["MOT", "CHI", "FAT"]

    def test_tokens_never_empty_or_spaced(self):
        out = parse_chat("*MOT:\t  the  [=! laughs]  dog  ")
        (u,) = out
        assert all(tok and " " not in tok for tok in u.tokens)


class TestParsePlain:
    def test_speaker_prefix(self):
        out = parse_plain("MOT\tthe dog ran .\nno prefix here .")
        assert out[0].speaker == "MOT"
        assert out[1].speaker == "ADU"
        assert out[1].tokens == ("no", "prefix", "here", ".")

    def test_blank_lines_skipped(self):
        assert parse_plain("\n\na ball .\n\n") == [utt("ADU", "a", "ball", ".")]


class TestFilterChildDirected:
    def test_removes_child_codes(self):
        utts = [utt("MOT", "a"), utt("CHI", "b"), utt("INV", "c")]
        assert filter_child_directed(utts, {"CHI"}) == [utts[0], utts[2]]

    def test_empty_input(self):
        assert filter_child_directed([], {"CHI"}) == []

    def test_all_filtered(self):
        assert filter_child_directed([utt("CHI", "b")], {"CHI"}) == []

    def test_idempotent_and_subset(self):
        rng = np.random.default_rng(7)
        speakers = ["MOT", "FAT", "CHI", "INV", "SIS"]
        utts = [utt(speakers[i], "w") for i in rng.integers(0, len(speakers), size=200)]
        once = filter_child_directed(utts, {"CHI", "SIS"})
        assert filter_child_directed(once, {"CHI", "SIS"}) == once
        assert all(u in utts for u in once)

    def test_empty_child_codes_rejected(self):
        with pytest.raises(ValueError):
            filter_child_directed([utt("MOT", "a")], set())


class TestBuildVocabulary:
    def test_cap_with_lexicographic_tie_break(self):
        utts = [utt("MOT", *(["a"] * 5 + ["the"] * 5 + ["dog"] * 3 + ["ran"]))]
        vocab = build_vocabulary(utts, max_words=3)
        assert [t for t, _ in vocab.entries] == ["a", "the", "dog"]
        assert vocab.id("ran") == OOV_ID

    def test_ids_are_contiguous_after_specials(self):
        vocab = build_vocabulary([utt("MOT", "b", "a", "b")], max_words=10)
        assert vocab.id("b") == N_SPECIALS
        assert vocab.id("a") == N_SPECIALS + 1
        assert vocab.id(PAD_TOKEN) == PAD_ID
        assert vocab.id(OOV_TOKEN) == OOV_ID

    def test_unknown_token_maps_to_oov(self):
        vocab = build_vocabulary([utt("MOT", "a")], max_words=3)
        assert vocab.id("zyzzyva") == OOV_ID

    def test_empty_corpus_is_an_error(self):
        with pytest.raises(ValueError):
            build_vocabulary([], max_words=10)
        with pytest.raises(ValueError):
            build_vocabulary([utt("MOT")], max_words=10)

    def test_deterministic_serialization(self, tmp_path):
        rng = np.random.default_rng(11)
        words = [f"w{i}" for i in range(40)]
        utts = [
            utt("MOT", *(words[j] for j in rng.integers(0, len(words), size=8)))
            for _ in range(50)
        ]
        a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
        build_vocabulary(utts, max_words=25).save_tsv(a)
        build_vocabulary(list(utts), max_words=25).save_tsv(b)
        assert a.read_bytes() == b.read_bytes()

    def test_tsv_round_trip(self, tmp_path):
        vocab = build_vocabulary([utt("MOT", "a", "the", "a", "dog")], max_words=5)
        path = tmp_path / "vocab.tsv"
        vocab.save_tsv(path)
        loaded = Vocabulary.load_tsv(path)
        assert loaded == vocab
        assert loaded.id("dog") == vocab.id("dog")
        header = path.read_text().splitlines()[0]
        assert header == f"#PAD={PAD_ID}\tOOV={OOV_ID}\tEOS={EOS_ID}"

    def test_counts_from_tsv_reads_vocab_files(self, tmp_path):
        vocab = build_vocabulary([utt("MOT", "a", "the", "a")], max_words=5)
        path = tmp_path / "vocab.tsv"
        vocab.save_tsv(path)
        counts = counts_from_tsv(path)
        assert counts == {"a": 2, "the": 1}


class TestEncodeUtterance:
    @pytest.fixture
    def vocab(self):
        return build_vocabulary([utt("MOT", "you", "want", "it", "now")], max_words=10)

    def test_padding_is_prepended(self, vocab):
        ids = encode_utterance(utt("MOT", "you", "want", "it"), vocab, max_len=10)
        assert ids.shape == (10,)
        assert list(ids[:7]) == [PAD_ID] * 7
        assert vocab.decode(ids) == ["you", "want", "it"]

    def test_truncation_keeps_the_first_tokens(self, vocab):
        long = utt("MOT", *(f"t{i}" for i in range(12)))
        ids = encode_utterance(long, vocab, max_len=10)
        assert ids.shape == (10,)
        assert PAD_ID not in ids
        assert list(ids) == [vocab.id(f"t{i}") for i in range(10)]

    def test_empty_utterance_is_all_pad(self, vocab):
        ids = encode_utterance(utt("MOT"), vocab, max_len=10)
        assert list(ids) == [PAD_ID] * 10

    def test_round_trip_with_oov_substitution(self):
        rng = np.random.default_rng(23)
        known = [f"k{i}" for i in range(20)]
        corpus = [
            utt("MOT", *(known[j] for j in rng.integers(0, 20, size=int(n))))
            for n in rng.integers(1, 14, size=60)
        ]
        vocab = build_vocabulary(corpus, max_words=12)
        for u in corpus:
            ids = encode_utterance(u, vocab, max_len=10)
            expect = [t if t in vocab else OOV_TOKEN for t in u.tokens[:10]]
            assert vocab.decode(ids) == expect

    def test_pad_only_as_prefix(self):
        rng = np.random.default_rng(5)
        corpus = [
            utt("MOT", *(f"w{j}" for j in rng.integers(0, 30, size=int(n))))
            for n in rng.integers(0, 15, size=80)
        ]
        vocab = build_vocabulary([u for u in corpus if u.tokens], max_words=20)
        mat = encode_corpus(corpus, vocab, max_len=10)
        assert mat.shape == (80, 10)
        for row in mat:
            non_pad = np.nonzero(row != PAD_ID)[0]
            if len(non_pad):
                assert not np.any(row[non_pad[0]:] == PAD_ID)


class TestCorpusStats:
    def test_single_utterance(self):
        stats = corpus_stats([utt("MOT", "a", "b", "a", "c")])
        assert (stats.n_utterances, stats.n_tokens) == (1, 4)
        assert stats.n_types == 3

    def test_empty(self):
        stats = corpus_stats([])
        assert (stats.n_utterances, stats.n_tokens, stats.n_types) == (0, 0, 0)


class TestTokenizedIO:
    def test_round_trip_preserves_cardinality(self, tmp_path):
        utts = [utt("ADU", "a", "dog", "."), utt("ADU"), utt("ADU", "the", "cat")]
        path = tmp_path / "corpus.txt"
        write_tokenized(path, utts)
        back = read_tokenized(path)
        assert [u.tokens for u in back] == [u.tokens for u in utts]

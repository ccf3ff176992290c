import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caserobust import casing
from caserobust.casing import (
    AugmentationStrategy,
    CasePattern,
    StrategyKind,
    apply_case_pattern,
    augment_corpus,
    extract_case_pattern,
    lowercase_text,
)
from caserobust.corpus_io import Corpus, Sentence, TagsetKind, Token
from caserobust.errors import ContractViolation


def P(s):
    return CasePattern(tuple(s))


def _corpus(*texts, tags=None):
    sents = []
    for text in texts:
        if text is None:
            sents.append(Sentence((), is_document_start=True))
            continue
        words = text.split()
        sents.append(Sentence(tuple(Token(w, "O") for w in words)))
    return Corpus(tuple(sents), TagsetKind.NER_BIO)


class TestLowercase:
    def test_examples(self):
        assert lowercase_text("Mr. Susulu") == "mr. susulu"
        assert lowercase_text("42 + 7") == "42 + 7"

    def test_length_changing_mappings_left_alone(self):
        # "İ".lower() is two code points; the simple mapping keeps it.
        assert lowercase_text("İstanbul") == "İstanbul"

    @settings(max_examples=300)
    @given(st.text())
    def test_idempotent_and_length_preserving(self, s):
        low = lowercase_text(s)
        assert len(low) == len(s)
        assert lowercase_text(low) == low


class TestCasePattern:
    def test_extract(self):
        assert extract_case_pattern("eBay") == P("LULL")
        assert extract_case_pattern("42") == P("LL")
        assert extract_case_pattern("USA") == P("UUU")
        assert extract_case_pattern("a b") == P("LLL")

    def test_apply(self):
        assert apply_case_pattern("ebay", P("LULL")) == "eBay"
        assert apply_case_pattern("a1.", P("UUU")) == "A1."

    def test_apply_keeps_lowercase_skeleton(self):
        # MICRO SIGN uppercases to GREEK CAPITAL MU, which lowercases to a different letter
        assert apply_case_pattern("µm", P("UU")) == "µM"

    @settings(max_examples=300)
    @given(st.text())
    def test_apply_all_upper_lowercases_back(self, s):
        low = lowercase_text(s)
        assert lowercase_text(apply_case_pattern(low, P("U" * len(low)))) == low

    def test_apply_length_mismatch(self):
        with pytest.raises(ContractViolation):
            apply_case_pattern("abc", P("UU"))

    def test_bad_label(self):
        with pytest.raises(ContractViolation):
            CasePattern(("U", "X"))

    def test_bits(self):
        assert P("LUL").to_bits() == [0, 1, 0]
        assert CasePattern.from_bits([0, 1, 0]) == P("LUL")

    @settings(max_examples=1000)
    @given(st.text(alphabet=string.ascii_letters + string.digits + string.punctuation + " ", max_size=40))
    def test_round_trip_fixture_alphabet(self, s):
        assert apply_case_pattern(lowercase_text(s), extract_case_pattern(s)) == s

    @settings(max_examples=300)
    @given(st.text())
    def test_round_trip_where_mapping_is_one_to_one(self, s):
        def reversible(ch):
            return apply_case_pattern(lowercase_text(ch), extract_case_pattern(ch)) == ch

        if all(reversible(ch) for ch in s):
            assert apply_case_pattern(lowercase_text(s), extract_case_pattern(s)) == s

    @settings(max_examples=300)
    @given(st.text())
    def test_u_only_where_an_uppercase_variant_exists(self, s):
        low = lowercase_text(s)
        for ch, lab in zip(low, extract_case_pattern(s).labels):
            if lab == "U":
                assert ch.upper() != ch

    def test_uppercase_without_simple_lowercase_is_l(self):
        assert extract_case_pattern("İ") == P("L")


class TestStrategyParsing:
    @pytest.mark.parametrize(
        "text, kind, p",
        [
            ("cased", StrategyKind.CASED, None),
            ("uncased", StrategyKind.UNCASED, None),
            ("c+u", StrategyKind.CASED_PLUS_UNCASED, None),
            ("half-mixed:0.4", StrategyKind.HALF_MIXED, 0.4),
            ("half-mixed", StrategyKind.HALF_MIXED, 0.5),
            ("truecase-train", StrategyKind.TRUECASE_TRAIN, None),
        ],
    )
    def test_parse(self, text, kind, p):
        s = AugmentationStrategy.parse(text)
        assert s.kind is kind and s.p == p

    @pytest.mark.parametrize("bad", ["lower", "half-mixed:1.5", "half-mixed:x", "cased:0.5"])
    def test_rejects(self, bad):
        with pytest.raises(ContractViolation):
            AugmentationStrategy.parse(bad)


class TestAugment:
    corpus = _corpus("The Cat sat", None, "In London")

    def test_cased_identity(self):
        assert augment_corpus(self.corpus, casing.CASED) == self.corpus

    def test_uncased(self):
        out = augment_corpus(self.corpus, casing.UNCASED)
        assert [s.surfaces for s in out] == [["the", "cat", "sat"], [], ["in", "london"]]

    def test_c_plus_u_order(self):
        c = _corpus("A B", "C d")
        out = augment_corpus(c, casing.CASED_PLUS_UNCASED)
        assert [s.text for s in out] == ["A B", "C d", "a b", "c d"]

    def test_c_plus_u_never_duplicates_doc_markers(self):
        out = augment_corpus(self.corpus, casing.CASED_PLUS_UNCASED)
        assert sum(s.is_document_start for s in out) == 1
        assert len(out.content_sentences()) == 2 * len(self.corpus.content_sentences())

    def test_half_mixed_boundaries(self):
        assert augment_corpus(self.corpus, casing.half_mixed(0.0), seed=3) == self.corpus
        assert augment_corpus(self.corpus, casing.half_mixed(1.0), seed=3) == augment_corpus(
            self.corpus, casing.UNCASED
        )

    def test_half_mixed_concentration(self):
        c = Corpus(tuple(Sentence((Token("Word", "O"),)) for _ in range(10_000)), TagsetKind.NER_BIO)
        out = augment_corpus(c, casing.half_mixed(0.5), seed=7)
        lowered = sum(1 for s in out if s.tokens[0].surface == "word")
        assert len(out) == 10_000
        assert 0.47 <= lowered / 10_000 <= 0.53

    def test_half_mixed_keyed_by_index(self):
        c = Corpus(tuple(Sentence((Token(f"W{i}", "O"),)) for i in range(50)), TagsetKind.NER_BIO)
        a = augment_corpus(c, casing.half_mixed(0.5), seed=1)
        b = augment_corpus(c, casing.half_mixed(0.5), seed=1)
        assert a == b
        flipped = [s.tokens[0].surface.islower() for s in a]
        assert 0 < sum(flipped) < 50

    def test_truecase_train(self):
        out = augment_corpus(self.corpus, casing.TRUECASE_TRAIN, truecase_fn=str.title)
        assert [s.text for s in out] == ["The Cat Sat", "", "In London"]

    def test_truecase_train_requires_fn(self):
        with pytest.raises(ContractViolation):
            augment_corpus(self.corpus, casing.TRUECASE_TRAIN)

    def test_truecase_fn_changing_boundaries(self):
        with pytest.raises(ContractViolation):
            augment_corpus(self.corpus, casing.TRUECASE_TRAIN, truecase_fn=lambda t: t.replace(" ", ""))

    @pytest.mark.parametrize(
        "strategy",
        [casing.CASED, casing.UNCASED, casing.CASED_PLUS_UNCASED, casing.half_mixed(0.5), casing.TRUECASE_TRAIN],
    )
    def test_tags_untouched(self, strategy):
        c = Corpus(
            (
                Sentence((Token("Ann", "B-PER"), Token("Lee", "I-PER"), Token("ran", "O"))),
                Sentence((Token("in", "O"), Token("Oslo", "B-LOC"))),
            ),
            TagsetKind.NER_BIO,
        )
        out = augment_corpus(c, strategy, seed=11, truecase_fn=str.upper)
        tags_in = [s.tags for s in c]
        tags_out = [s.tags for s in out]
        if strategy.kind is StrategyKind.CASED_PLUS_UNCASED:
            assert tags_out == tags_in + tags_in
        else:
            assert tags_out == tags_in
        assert augment_corpus(c, strategy, seed=11, truecase_fn=str.upper) == out

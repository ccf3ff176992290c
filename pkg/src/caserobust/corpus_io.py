"""CoNLL column corpora and the synthetic fixtures used for testing.

Sentences are separated by blank lines; each token line holds
whitespace-separated columns.  ``-DOCSTART-`` lines are kept as empty
marker sentences so document structure survives a round trip.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ContractViolation, ParseError

DOCSTART = "-DOCSTART-"
_BIO_RE = re.compile(r"^(O|[BI]-\S+)$")
_WS_RE = re.compile(r"\s")


class TagsetKind(enum.Enum):
    NER_BIO = "ner"
    POS = "pos"
    PLAIN = "plain"


def is_bio_tag(tag):
    return tag is not None and _BIO_RE.match(tag) is not None


@dataclass(frozen=True)
class Token:
    surface: str
    tag: Optional[str] = None

    def __post_init__(self):
        if not self.surface or _WS_RE.search(self.surface):
            raise ContractViolation(f"invalid token surface {self.surface!r}")


@dataclass(frozen=True)
class Sentence:
    tokens: tuple = ()
    is_document_start: bool = False

    def __post_init__(self):
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens and not self.is_document_start:
            raise ContractViolation("sentence must have tokens unless it is a document start")

    def __len__(self):
        return len(self.tokens)

    @property
    def surfaces(self):
        return [t.surface for t in self.tokens]

    @property
    def tags(self):
        return [t.tag for t in self.tokens]

    @property
    def text(self):
        """Tokens joined by single spaces (the truecaser's view of a sentence)."""
        return " ".join(self.surfaces)

    def with_surfaces(self, surfaces: Sequence[str]) -> "Sentence":
        if len(surfaces) != len(self.tokens):
            raise ContractViolation("surface count does not match token count")
        return Sentence(
            tuple(Token(s, t.tag) for s, t in zip(surfaces, self.tokens)),
            self.is_document_start,
        )


@dataclass(frozen=True)
class Corpus:
    sentences: tuple = ()
    tagset_kind: TagsetKind = TagsetKind.PLAIN

    def __post_init__(self):
        if not isinstance(self.sentences, tuple):
            object.__setattr__(self, "sentences", tuple(self.sentences))
        for i, sent in enumerate(self.sentences):
            for tok in sent.tokens:
                if self.tagset_kind is TagsetKind.PLAIN and tok.tag is not None:
                    raise ContractViolation(f"sentence {i}: PLAIN corpus carries tag {tok.tag!r}")
                if self.tagset_kind is TagsetKind.NER_BIO and not is_bio_tag(tok.tag):
                    raise ContractViolation(f"sentence {i}: {tok.tag!r} is not a BIO tag")
                if self.tagset_kind is TagsetKind.POS and tok.tag is None:
                    raise ContractViolation(f"sentence {i}: POS corpus has an untagged token")

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def content_sentences(self):
        """Sentences that carry text (document-start markers skipped)."""
        return [s for s in self.sentences if not s.is_document_start]

    def replace(self, sentences: Iterable[Sentence]) -> "Corpus":
        return Corpus(tuple(sentences), self.tagset_kind)

    @property
    def is_tagged(self):
        return self.tagset_kind is not TagsetKind.PLAIN


def infer_tagset_kind(tags: Iterable[Optional[str]]) -> TagsetKind:
    tags = list(tags)
    if not tags or all(t is None for t in tags):
        return TagsetKind.PLAIN
    if all(is_bio_tag(t) for t in tags):
        return TagsetKind.NER_BIO
    return TagsetKind.POS


def parse_conll(text: str, token_column: int = 0, tag_column: int = -1) -> Corpus:
    """Parse CoNLL column text into a tagged :class:`Corpus`.

    Negative column indices count from the end of each line, so the default
    reads the first column as the token and the last as the tag.
    """
    needed = max(token_column, tag_column) + 1
    if token_column < 0 or tag_column < 0:
        needed = max(needed, 2)
    sentences = []
    current = []

    def flush():
        if current:
            sentences.append(Sentence(tuple(current)))
            current.clear()

    for lineno, line in enumerate(text.split("\n"), start=1):
        cols = line.split()
        if not cols:
            flush()
            continue
        if cols[0] == DOCSTART:
            flush()
            sentences.append(Sentence((), is_document_start=True))
            continue
        if len(cols) < needed:
            raise ParseError(f"expected at least {needed} columns, found {len(cols)}", lineno)
        current.append(Token(cols[token_column], cols[tag_column]))
    flush()

    kind = infer_tagset_kind(t.tag for s in sentences for t in s.tokens)
    return Corpus(tuple(sentences), kind)


def write_conll(corpus: Corpus) -> str:
    """Two columns per token: surface and tag (``O`` for untagged tokens)."""
    out = []
    for sent in corpus.sentences:
        if sent.is_document_start:
            out.append(f"{DOCSTART} O\n\n")
            continue
        for tok in sent.tokens:
            out.append(f"{tok.surface} {tok.tag if tok.tag is not None else 'O'}\n")
        out.append("\n")
    return "".join(out)


def parse_plain(text: str) -> Corpus:
    """One sentence per line, tokens separated by runs of spaces or tabs."""
    sentences = []
    for line in text.split("\n"):
        words = line.split()
        if words:
            sentences.append(Sentence(tuple(Token(w) for w in words)))
    return Corpus(tuple(sentences), TagsetKind.PLAIN)


def read_corpus(path, fmt: str = "auto") -> Corpus:
    """Read a corpus file as ``conll``, ``plain`` or ``auto`` (guessed)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if fmt == "auto":
        fmt = guess_format(text)
    if fmt == "conll":
        return parse_conll(text)
    if fmt == "plain":
        return parse_plain(text)
    raise ContractViolation(f"unknown corpus format {fmt!r}")


def guess_format(text):
    # CoNLL files have blank-line separated blocks of multi-column lines.
    lines = text.split("\n")
    if any(line.split()[:1] == [DOCSTART] for line in lines):
        return "conll"
    widths = {len(line.split()) for line in lines if line.strip()}
    has_blank_sep = any(not line.strip() for line in lines[:-1]) if lines else False
    if has_blank_sep and widths and min(widths) >= 2 and len(widths) == 1:
        return "conll"
    return "plain"


def convert_iob1_to_bio2(corpus: Corpus) -> Corpus:
    """Rewrite span-initial ``I-X`` tags as ``B-X``; other tags are kept."""
    if corpus.tagset_kind is not TagsetKind.NER_BIO:
        raise ContractViolation("IOB1 conversion needs an NER_BIO corpus")
    out = []
    for sent in corpus.sentences:
        new_tokens = []
        prev = "O"
        for tok in sent.tokens:
            tag = tok.tag
            if tag.startswith("I-") and (prev == "O" or prev[2:] != tag[2:]):
                tag = "B-" + tag[2:]
            new_tokens.append(Token(tok.surface, tag))
            prev = tag
        out.append(Sentence(tuple(new_tokens), sent.is_document_start))
    return corpus.replace(out)


# ---------------------------------------------------------------------------
# Synthetic fixtures
# ---------------------------------------------------------------------------

_ONSETS = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
           "br", "tr", "st", "sh", "ch", "gr"]
_VOWELS = ["a", "e", "i", "o", "u", "ia", "ou"]
_CODAS = ["", "", "", "n", "r", "s", "l", "th"]


@dataclass(frozen=True)
class FixtureSpec:
    """Parameters for :func:`generate_fixture`.

    ``vocab_size`` counts every lexicon word, entity words included.
    ``lexicon_seed`` (defaults to ``seed``) fixes the word list so several
    corpora can share one lexicon while sampling different sentences.
    Entity words are drawn with Zipfian frequencies, so rare entities may
    only appear in the test split.  With ``ambiguous_rate`` > 0, that share
    of common-word slots is filled by an entity word used as an ordinary
    lowercase, untagged word, so only case separates the two uses.
    """

    vocab_size: int
    entity_lexicon_size: int
    sentences: int
    cased_entity_rate: float
    seed: int
    tagset: str = "ner"
    lexicon_seed: Optional[int] = None
    zipf_exponent: float = 1.0
    entity_rate: float = 0.25
    ambiguous_rate: float = 0.0

    def __post_init__(self):
        for name in ("vocab_size", "entity_lexicon_size", "sentences"):
            if getattr(self, name) < 1:
                raise ContractViolation(f"{name} must be >= 1")
        if not 0.0 <= self.cased_entity_rate <= 1.0:
            raise ContractViolation("cased_entity_rate must lie in [0, 1]")
        for name in ("entity_rate", "ambiguous_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ContractViolation(f"{name} must lie in [0, 1]")
        if self.vocab_size < self.entity_lexicon_size:
            raise ContractViolation("vocab_size is smaller than entity_lexicon_size")
        if self.tagset not in ("ner", "pos"):
            raise ContractViolation(f"tagset must be 'ner' or 'pos', got {self.tagset!r}")
        if self.seed < 0:
            raise ContractViolation("seed must be non-negative")

    @classmethod
    def from_json(cls, text: str) -> "FixtureSpec":
        data = json.loads(text)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ContractViolation(f"unknown fixture spec keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class Lexicon:
    entity_words: tuple
    common_words: tuple
    capitalized: frozenset = field(default_factory=frozenset)

    def gold_form(self, word):
        return word.capitalize() if word in self.capitalized else word


def fixture_lexicon(spec: FixtureSpec) -> Lexicon:
    """The word list a spec generates (a pure function of the lexicon seed)."""
    seed = spec.seed if spec.lexicon_seed is None else spec.lexicon_seed
    rng = np.random.default_rng([seed, 0])
    words = []
    seen = set()
    while len(words) < spec.vocab_size:
        n_syl = int(rng.integers(2, 4))
        w = "".join(
            _ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))]
            for _ in range(n_syl)
        ) + _CODAS[rng.integers(len(_CODAS))]
        if w not in seen:
            seen.add(w)
            words.append(w)
    entities = tuple(words[: spec.entity_lexicon_size])
    common = tuple(words[spec.entity_lexicon_size:])
    draws = rng.random(len(entities))
    capitalized = frozenset(w for w, u in zip(entities, draws) if u < spec.cased_entity_rate)
    return Lexicon(entities, common, capitalized)


def _zipf_probs(n, exponent):
    p = 1.0 / np.arange(1, n + 1) ** exponent
    return p / p.sum()


def generate_fixture(spec: FixtureSpec):
    """Build a deterministic synthetic (train, test) corpus pair.

    Common words are always lowercase in gold, including at sentence start.
    Each entity word is capitalized consistently (decided once per word with
    probability ``cased_entity_rate``).  Mentions are one or two entity
    words, separated from the next mention by at least one common word
    (when the lexicon has any).  Every sentence ends with ``.``.
    """
    lex = fixture_lexicon(spec)
    rng = np.random.default_rng([spec.seed, 1])
    ent_p = _zipf_probs(len(lex.entity_words), spec.zipf_exponent)
    com_p = _zipf_probs(len(lex.common_words), spec.zipf_exponent) if lex.common_words else None
    ner = spec.tagset == "ner"

    sentences = []
    for _ in range(spec.sentences):
        n_slots = int(rng.integers(4, 10))
        tokens = []
        while len(tokens) < n_slots:
            after_mention = bool(tokens) and tokens[-1].tag in ("B-ENT", "I-ENT", "NNP")
            if com_p is None or (not after_mention and rng.random() < spec.entity_rate):
                length = 1 if rng.random() < 0.7 else 2
                for k in range(length):
                    w = lex.entity_words[rng.choice(len(ent_p), p=ent_p)]
                    tag = ("B-ENT" if k == 0 else "I-ENT") if ner else "NNP"
                    tokens.append(Token(lex.gold_form(w), tag))
            elif spec.ambiguous_rate and rng.random() < spec.ambiguous_rate:
                w = lex.entity_words[rng.choice(len(ent_p), p=ent_p)]
                tokens.append(Token(w, "O" if ner else "NN"))
            else:
                w = lex.common_words[rng.choice(len(com_p), p=com_p)]
                tokens.append(Token(w, "O" if ner else "NN"))
        tokens.append(Token(".", "O" if ner else "."))
        sentences.append(Sentence(tuple(tokens)))

    kind = TagsetKind.NER_BIO if ner else TagsetKind.POS
    cut = int(round(0.8 * len(sentences)))
    if len(sentences) > 1:
        cut = min(max(cut, 1), len(sentences) - 1)
    return Corpus(tuple(sentences[:cut]), kind), Corpus(tuple(sentences[cut:]), kind)

"""Casing transforms over strings and corpora, plus the augmentation
strategies applied to training data.

Case mappings are the simple one-to-one kind: a character whose full case
mapping would change the string length (``İ`` -> ``i̇``, ``ß`` -> ``SS``) is
left as is, so a string and its case pattern always align.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .corpus_io import Corpus, Sentence
from .errors import ContractViolation

UPPER = "U"
LOWER = "L"


def _lower_char(ch):
    low = ch.lower()
    return low if len(low) == 1 else ch


def _upper_char(ch):
    # only mappings that lowercase back to ch ("µ" -> "Μ" -> "μ" does not)
    up = ch.upper()
    return up if len(up) == 1 and _lower_char(up) == ch else ch


def lowercase_text(s: str) -> str:
    return "".join(_lower_char(ch) for ch in s)


@dataclass(frozen=True)
class CasePattern:
    labels: tuple

    def __post_init__(self):
        if not isinstance(self.labels, tuple):
            object.__setattr__(self, "labels", tuple(self.labels))
        bad = set(self.labels) - {UPPER, LOWER}
        if bad:
            raise ContractViolation(f"case labels must be U or L, got {sorted(bad)}")

    def __len__(self):
        return len(self.labels)

    def __str__(self):
        return "".join(self.labels)

    @classmethod
    def from_bits(cls, bits) -> "CasePattern":
        return cls(tuple(UPPER if b else LOWER for b in bits))

    def to_bits(self):
        return [1 if lab == UPPER else 0 for lab in self.labels]


def extract_case_pattern(s: str) -> CasePattern:
    """U for uppercase letters that have a (simple) lowercase form, else L."""
    return CasePattern(
        tuple(UPPER if ch.isupper() and _lower_char(ch) != ch else LOWER for ch in s)
    )


def apply_case_pattern(s_lower: str, pattern: CasePattern) -> str:
    if len(pattern) != len(s_lower):
        raise ContractViolation(
            f"case pattern has {len(pattern)} labels for a string of {len(s_lower)} characters"
        )
    return "".join(
        _upper_char(ch) if lab == UPPER else ch for ch, lab in zip(s_lower, pattern.labels)
    )


def lowercase_sentence(sent: Sentence) -> Sentence:
    if sent.is_document_start:
        return sent
    return sent.with_surfaces([lowercase_text(s) for s in sent.surfaces])


def lowercase_corpus(corpus: Corpus) -> Corpus:
    return corpus.replace(lowercase_sentence(s) for s in corpus.sentences)


class StrategyKind(enum.Enum):
    CASED = "cased"
    UNCASED = "uncased"
    CASED_PLUS_UNCASED = "c+u"
    HALF_MIXED = "half-mixed"
    TRUECASE_TRAIN = "truecase-train"


@dataclass(frozen=True)
class AugmentationStrategy:
    kind: StrategyKind
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind is StrategyKind.HALF_MIXED:
            if self.p is None:
                object.__setattr__(self, "p", 0.5)
            if not 0.0 <= self.p <= 1.0:
                raise ContractViolation(f"half-mixed probability {self.p} outside [0, 1]")
        elif self.p is not None:
            raise ContractViolation(f"{self.kind.value} takes no probability")

    def __str__(self):
        if self.kind is StrategyKind.HALF_MIXED:
            return f"half-mixed:{self.p:g}"
        return self.kind.value

    @classmethod
    def parse(cls, text: str) -> "AugmentationStrategy":
        """Parse ``cased``, ``uncased``, ``c+u``, ``half-mixed[:p]`` or ``truecase-train``."""
        name, _, arg = text.strip().partition(":")
        try:
            kind = StrategyKind(name)
        except ValueError:
            raise ContractViolation(f"unknown augmentation strategy {text!r}") from None
        if arg:
            if kind is not StrategyKind.HALF_MIXED:
                raise ContractViolation(f"{name} takes no argument")
            try:
                p = float(arg)
            except ValueError:
                raise ContractViolation(f"bad probability {arg!r}") from None
            return cls(kind, p)
        return cls(kind)


CASED = AugmentationStrategy(StrategyKind.CASED)
UNCASED = AugmentationStrategy(StrategyKind.UNCASED)
CASED_PLUS_UNCASED = AugmentationStrategy(StrategyKind.CASED_PLUS_UNCASED)
TRUECASE_TRAIN = AugmentationStrategy(StrategyKind.TRUECASE_TRAIN)


def half_mixed(p: float = 0.5) -> AugmentationStrategy:
    return AugmentationStrategy(StrategyKind.HALF_MIXED, p)


def truecase_sentence(sent: Sentence, truecase_fn: Callable[[str], str]) -> Sentence:
    """Lowercase a sentence, then truecase it token-aligned."""
    if sent.is_document_start:
        return sent
    lowered = [lowercase_text(s) for s in sent.surfaces]
    restored = truecase_fn(" ".join(lowered)).split(" ")
    if len(restored) != len(lowered) or any(
        lowercase_text(r) != low for r, low in zip(restored, lowered)
    ):
        raise ContractViolation("truecaser output does not preserve token boundaries")
    return sent.with_surfaces(restored)


def augment_corpus(
    corpus: Corpus,
    strategy: AugmentationStrategy,
    seed: int = 0,
    truecase_fn: Optional[Callable[[str], str]] = None,
) -> Corpus:
    """Apply a casing strategy to training data once, as preprocessing.

    Only token surfaces change.  For half-mixed, whether sentence ``i`` is
    lowercased depends only on ``(seed, i)``.
    """
    kind = strategy.kind
    sents = corpus.sentences
    if kind is StrategyKind.CASED:
        return corpus.replace(sents)
    if kind is StrategyKind.UNCASED:
        return lowercase_corpus(corpus)
    if kind is StrategyKind.CASED_PLUS_UNCASED:
        lowered = [lowercase_sentence(s) for s in sents if not s.is_document_start]
        return corpus.replace(list(sents) + lowered)
    if kind is StrategyKind.HALF_MIXED:
        out = []
        for i, s in enumerate(sents):
            if not s.is_document_start and np.random.default_rng([seed, i]).random() < strategy.p:
                s = lowercase_sentence(s)
            out.append(s)
        return corpus.replace(out)
    if kind is StrategyKind.TRUECASE_TRAIN:
        if truecase_fn is None:
            raise ContractViolation("truecase-train needs a truecasing function")
        return corpus.replace(truecase_sentence(s, truecase_fn) for s in sents)
    raise ContractViolation(f"unhandled strategy {strategy}")

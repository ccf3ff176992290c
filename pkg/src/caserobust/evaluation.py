"""Metrics for truecasing and tagging output, plus the cased/uncased average.

Precision and recall default to 1.0 when their denominator is zero, so an
identity prediction on caseless text scores perfectly.  Metrics never
round; rounding (half-up, 2 decimals) happens only in :func:`format_score`.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, Iterable, List, Sequence, Tuple

from .casing import lowercase_text
from .corpus_io import Corpus, is_bio_tag
from .errors import ContractViolation

MISC = "MISC"
MENTION = "ENT"


@dataclass(frozen=True)
class PRF:
    true_positives: int
    false_positives: int
    false_negatives: int

    @property
    def precision(self):
        denom = self.true_positives + self.false_positives
        return self.true_positives / denom if denom else 1.0

    @property
    def recall(self):
        denom = self.true_positives + self.false_negatives
        return self.true_positives / denom if denom else 1.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other):
        return PRF(
            self.true_positives + other.true_positives,
            self.false_positives + other.false_positives,
            self.false_negatives + other.false_negatives,
        )

    def as_dict(self):
        return {
            "tp": self.true_positives,
            "fp": self.false_positives,
            "fn": self.false_negatives,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass(frozen=True, order=True)
class Span:
    type: str
    start: int
    end: int  # inclusive


def _check_aligned(gold: Corpus, predicted_lengths: Sequence[int]):
    if len(gold.sentences) != len(predicted_lengths):
        raise ContractViolation(
            f"gold has {len(gold.sentences)} sentences, prediction has {len(predicted_lengths)}"
        )
    for i, (sent, n) in enumerate(zip(gold.sentences, predicted_lengths)):
        if len(sent.tokens) != n:
            raise ContractViolation(
                f"sentence {i}: gold has {len(sent.tokens)} tokens, prediction has {n}"
            )


def word_level_prf(gold: Corpus, predicted: Corpus) -> PRF:
    """Truecasing quality per token.

    A token is a gold positive when its gold form differs from its lowercase
    form, a predicted positive likewise; a true positive is a shared positive
    with identical surfaces.
    """
    _check_aligned(gold, [len(s.tokens) for s in predicted.sentences])
    tp = fp = fn = 0
    for gs, ps in zip(gold.sentences, predicted.sentences):
        for gt, pt in zip(gs.tokens, ps.tokens):
            g_pos = gt.surface != lowercase_text(gt.surface)
            p_pos = pt.surface != lowercase_text(pt.surface)
            if g_pos and p_pos and gt.surface == pt.surface:
                tp += 1
                continue
            fp += p_pos
            fn += g_pos
    return PRF(tp, fp, fn)


def extract_spans(tags: Sequence[str]) -> List[Span]:
    """BIO spans with conlleval repair: an ``I-X`` that does not continue an
    open ``X`` span opens a new one."""
    spans = []
    cur_type = None
    cur_start = 0
    for i, tag in enumerate(tags):
        if not is_bio_tag(tag):
            raise ContractViolation(f"{tag!r} is not a BIO tag")
        if tag == "O":
            prefix, typ = "O", None
        else:
            prefix, typ = tag[0], tag[2:]
        opens = prefix == "B" or (prefix == "I" and typ != cur_type)
        if cur_type is not None and (prefix == "O" or opens):
            spans.append(Span(cur_type, cur_start, i - 1))
            cur_type = None
        if opens:
            cur_type, cur_start = typ, i
    if cur_type is not None:
        spans.append(Span(cur_type, cur_start, len(tags) - 1))
    return spans


def _span_counts(gold_spans: Iterable[Span], pred_spans: Iterable[Span]) -> Dict[str, PRF]:
    gold_set, pred_set = set(gold_spans), set(pred_spans)
    per_type: Dict[str, List[int]] = defaultdict(lambda: [0, 0, 0])
    for s in gold_set & pred_set:
        per_type[s.type][0] += 1
    for s in pred_set - gold_set:
        per_type[s.type][1] += 1
    for s in gold_set - pred_set:
        per_type[s.type][2] += 1
    return {t: PRF(*c) for t, c in per_type.items()}


def _score_spans(gold: Corpus, predicted, transform=None) -> Tuple[PRF, Dict[str, PRF]]:
    predicted = [list(p) for p in predicted]
    _check_aligned(gold, [len(p) for p in predicted])
    totals: Dict[str, PRF] = {}
    for sent, pred in zip(gold.sentences, predicted):
        if sent.is_document_start:
            continue
        g = extract_spans(sent.tags)
        p = extract_spans(pred)
        if transform is not None:
            g, p = transform(g, p)
        for t, prf in _span_counts(g, p).items():
            totals[t] = totals[t] + prf if t in totals else prf
    overall = sum(totals.values(), PRF(0, 0, 0))
    return overall, dict(sorted(totals.items()))


def span_prf(gold: Corpus, predicted: Sequence[Sequence[str]]):
    """Exact-match span scoring.  Returns ``(overall, {type: PRF})``."""
    return _score_spans(gold, predicted)


def _mention_transform(gold_spans, pred_spans):
    pred_spans = [s for s in pred_spans if s.type != MISC]
    return (
        [Span(MENTION, s.start, s.end) for s in gold_spans],
        [Span(MENTION, s.start, s.end) for s in pred_spans],
    )


def mention_detection_prf(gold: Corpus, predicted: Sequence[Sequence[str]]) -> PRF:
    """Drop predicted MISC spans, collapse all types into one, then score
    exact boundaries.  Gold MISC spans are kept."""
    overall, _ = _score_spans(gold, predicted, _mention_transform)
    return overall


def token_accuracy(gold: Corpus, predicted: Sequence[Sequence[str]]) -> float:
    predicted = [list(p) for p in predicted]
    _check_aligned(gold, [len(p) for p in predicted])
    total = correct = 0
    for sent, pred in zip(gold.sentences, predicted):
        if sent.is_document_start:
            continue
        total += len(pred)
        correct += sum(g == p for g, p in zip(sent.tags, pred))
    return correct / total if total else 1.0


def scenario_average(cased_score: float, uncased_score: float) -> float:
    # Averaging the decimal representations keeps e.g. (97.85, 88.66) at
    # exactly 93.255 instead of a binary neighbour that rounds the other way.
    return float((Decimal(repr(float(cased_score))) + Decimal(repr(float(uncased_score)))) / 2)


def format_score(value: float, places: int = 2) -> str:
    """Round half-up for display."""
    quantum = Decimal(1).scaleb(-places)
    return str(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP))

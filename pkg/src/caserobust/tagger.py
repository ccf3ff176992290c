"""Averaged structured perceptron tagger with first-order Viterbi decoding.

The feature set pairs lowercased lexical context with strong case cues
such as word shape and capitalization flags, so a model trained on cased
text leans on case.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from .corpus_io import Corpus, Sentence
from .errors import ContractViolation, CorruptModelError, TrainingError, VersionMismatchError

FORMAT_VERSION = 1
BOS = "<BOS>"
EOS = "<EOS>"


def word_shape(surface: str, collapsed: bool = False) -> str:
    out = []
    for ch in surface:
        if ch.isupper():
            sym = "X"
        elif ch.islower():
            sym = "x"
        elif ch.isdigit():
            sym = "d"
        else:
            sym = ch
        if collapsed and out and out[-1] == sym:
            continue
        out.append(sym)
    return "".join(out)


def featurize(sentence: Sentence, position: int) -> frozenset:
    n = len(sentence.tokens)
    if not 0 <= position < n:
        raise ContractViolation(f"position {position} outside sentence of length {n}")
    word = sentence.tokens[position].surface
    low = word.lower()
    prev = sentence.tokens[position - 1].surface.lower() if position > 0 else BOS
    nxt = sentence.tokens[position + 1].surface.lower() if position + 1 < n else EOS
    letters = [ch for ch in word if ch.isalpha()]
    feats = {
        f"w-1={prev}",
        f"w0={low}",
        f"w+1={nxt}",
        f"orig={word}",
        f"shape={word_shape(word)}",
        f"cshape={word_shape(word, collapsed=True)}",
        f"first={int(position == 0)}",
        f"cap={int(word[0].isupper())}",
        f"allcaps={int(bool(letters) and all(ch.isupper() for ch in letters))}",
        f"digit={int(any(ch.isdigit() for ch in word))}",
    }
    for k in (1, 2, 3):
        if len(low) >= k:
            feats.add(f"pre{k}={low[:k]}")
            feats.add(f"suf{k}={low[-k:]}")
    return frozenset(feats)


def sentence_features(sentence: Sentence) -> List[List[str]]:
    return [sorted(featurize(sentence, i)) for i in range(len(sentence.tokens))]


def viterbi(emissions, transitions):
    """Exact argmax path for ``sum_t emissions[t, y_t] + sum_t transitions[y_{t-1}, y_t]``.

    Ties go to lower label indices: among optimal paths, the one whose labels
    are smallest comparing from the last token backwards.  Returns
    ``(path, score)``.
    """
    emissions = np.asarray(emissions, dtype=np.float64)
    T, L = emissions.shape
    if L == 0:
        raise ContractViolation("cannot decode with an empty label set")
    if T == 0:
        return [], 0.0
    delta = emissions[0].copy()
    back = np.zeros((T, L), dtype=np.int64)
    for t in range(1, T):
        scores = delta[:, None] + transitions
        back[t] = np.argmax(scores, axis=0)
        delta = scores[back[t], np.arange(L)] + emissions[t]
    best = int(np.argmax(delta))
    path = [best]
    for t in range(T - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    path.reverse()
    return path, float(delta[best])


@dataclass
class TaggerModel:
    labels: tuple
    feature_index: Dict[str, int]
    weights: np.ndarray  # (num_features, num_labels)
    transitions: np.ndarray  # (num_labels, num_labels), [from, to]
    averaged: bool = True

    def __post_init__(self):
        self.labels = tuple(self.labels)
        L = len(self.labels)
        if self.weights.shape != (len(self.feature_index), L) or self.transitions.shape != (L, L):
            raise ContractViolation("tagger weight shapes do not match labels/features")

    def feature_ids(self, feats: Sequence[str]):
        idx = self.feature_index
        return [idx[f] for f in feats if f in idx]

    def emissions(self, sentence: Sentence):
        rows = [self.weights[self.feature_ids(f)].sum(axis=0) for f in sentence_features(sentence)]
        return np.array(rows).reshape(len(rows), len(self.labels))


def viterbi_decode(sentence: Sentence, model: TaggerModel) -> List[str]:
    if not model.labels:
        raise ContractViolation("tagger model has no labels")
    if not sentence.tokens:
        raise ContractViolation("cannot decode an empty sentence")
    path, _ = viterbi(model.emissions(sentence), model.transitions)
    return [model.labels[k] for k in path]


def tag_corpus(model: TaggerModel, corpus: Corpus) -> List[List[str]]:
    """Predicted label sequences, one per sentence (empty for doc-start markers)."""
    return [[] if s.is_document_start else viterbi_decode(s, model) for s in corpus.sentences]


@dataclass
class TaggerTrainConfig:
    epochs: int = 5
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ContractViolation("epochs must be >= 1")


def train_tagger(corpus: Corpus, config: TaggerTrainConfig = None) -> TaggerModel:
    """Averaged structured perceptron.

    On each mistaken sentence, gold features and transitions get +1 and the
    predicted ones -1.  The returned weights are the mean of the weight
    vectors held after each of the N training steps, computed in one pass by
    accumulating ``step * update`` (``step`` counted from 0) and returning
    ``W - acc / N``.
    """
    config = config or TaggerTrainConfig()
    if not corpus.is_tagged:
        raise ContractViolation("cannot train a tagger on an untagged corpus")
    sents = corpus.content_sentences()
    if not sents:
        raise ContractViolation("cannot train a tagger on an empty corpus")

    labels = tuple(sorted({t.tag for s in sents for t in s.tokens}))
    label_id = {lab: k for k, lab in enumerate(labels)}
    feature_index: Dict[str, int] = {}
    data = []
    for s in sents:
        ids = []
        for feats in sentence_features(s):
            row = []
            for f in feats:
                if f not in feature_index:
                    feature_index[f] = len(feature_index)
                row.append(feature_index[f])
            ids.append(np.array(row, dtype=np.int64))
        data.append((ids, [label_id[t.tag] for t in s.tokens]))

    F, L = len(feature_index), len(labels)
    W = np.zeros((F, L))
    W_acc = np.zeros((F, L))
    T = np.zeros((L, L))
    T_acc = np.zeros((L, L))
    step = 0
    for epoch in range(config.epochs):
        order = np.arange(len(data))
        if config.shuffle:
            order = np.random.default_rng([config.seed, epoch]).permutation(len(data))
        for k in order:
            ids, gold = data[k]
            em = np.array([W[r].sum(axis=0) for r in ids])
            pred, _ = viterbi(em, T)
            if pred != gold:
                for t, (g, p) in enumerate(zip(gold, pred)):
                    if g != p:
                        W[ids[t], g] += 1.0
                        W_acc[ids[t], g] += step
                        W[ids[t], p] -= 1.0
                        W_acc[ids[t], p] -= step
                    if t > 0 and (gold[t - 1], g) != (pred[t - 1], p):
                        T[gold[t - 1], g] += 1.0
                        T_acc[gold[t - 1], g] += step
                        T[pred[t - 1], p] -= 1.0
                        T_acc[pred[t - 1], p] -= step
            step += 1

    W_avg = W - W_acc / step
    T_avg = T - T_acc / step  # step == N here
    if not (np.all(np.isfinite(W_avg)) and np.all(np.isfinite(T_avg))):
        raise TrainingError("tagger training produced non-finite weights")
    return TaggerModel(labels, feature_index, W_avg, T_avg, averaged=True)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def tagger_to_dict(model: TaggerModel) -> dict:
    features = []
    for f in sorted(model.feature_index):
        row = model.weights[model.feature_index[f]]
        for k, lab in enumerate(model.labels):
            if row[k] != 0.0:
                features.append([f, lab, float(row[k])])
    transitions = [
        [a, b, float(model.transitions[i, j])]
        for i, a in enumerate(model.labels)
        for j, b in enumerate(model.labels)
        if model.transitions[i, j] != 0.0
    ]
    return {
        "format_version": FORMAT_VERSION,
        "kind": "tagger",
        "labels": list(model.labels),
        "averaged": model.averaged,
        "features": features,
        "transitions": transitions,
    }


def tagger_from_dict(doc) -> TaggerModel:
    if not isinstance(doc, dict):
        raise CorruptModelError("tagger document is not a JSON object")
    if doc.get("format_version") != FORMAT_VERSION:
        raise VersionMismatchError(f"unsupported tagger format_version {doc.get('format_version')!r}")
    try:
        labels = tuple(doc["labels"])
        label_id = {lab: k for k, lab in enumerate(labels)}
        feature_index: Dict[str, int] = {}
        for f, _, _ in doc["features"]:
            feature_index.setdefault(f, len(feature_index))
        W = np.zeros((len(feature_index), len(labels)))
        for f, lab, w in doc["features"]:
            W[feature_index[f], label_id[lab]] = w
        T = np.zeros((len(labels), len(labels)))
        for a, b, w in doc["transitions"]:
            T[label_id[a], label_id[b]] = w
        averaged = bool(doc.get("averaged", True))
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModelError(f"malformed tagger document: {exc}") from exc
    return TaggerModel(labels, feature_index, W, T, averaged)


def save_tagger(model: TaggerModel, destination) -> None:
    with open(destination, "w", encoding="utf-8") as fh:
        json.dump(tagger_to_dict(model), fh, ensure_ascii=False)


def load_tagger(source) -> TaggerModel:
    with open(source, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModelError(f"{source}: not valid JSON ({exc})") from exc
    return tagger_from_dict(doc)

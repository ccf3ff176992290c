"""Character-level neural truecaser.

A sentence (tokens joined by single spaces) is lowercased and read as a
character sequence, spaces included.  A 2-layer BiLSTM with a single-logit
head predicts, per character, whether it is uppercase in the original.
The labels come straight from well-formed cased text.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import neural
from .casing import CasePattern, _upper_char, apply_case_pattern, extract_case_pattern, lowercase_text
from .corpus_io import Corpus
from .errors import (
    ContractViolation,
    CorruptModelError,
    DimensionMismatchError,
    TrainingError,
    VersionMismatchError,
)

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
PAD_ID = 0
UNK_ID = 1
NUM_LAYERS = 2


@dataclass(frozen=True)
class CharVocab:
    chars: tuple  # chars[id]; ids 0 and 1 hold the PAD/UNK placeholders
    index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.chars) < 2:
            raise ContractViolation("vocabulary must contain PAD and UNK")
        index = {ch: i for i, ch in enumerate(self.chars) if i >= 2}
        if len(index) != len(self.chars) - 2:
            raise ContractViolation("duplicate characters in vocabulary")
        object.__setattr__(self, "index", index)

    def __len__(self):
        return len(self.chars)

    def lookup(self, ch):
        return self.index.get(ch, UNK_ID)


def build_vocab(corpus: Corpus, min_char_freq: int = 1) -> CharVocab:
    counts = Counter()
    order = []
    for sent in corpus.content_sentences():
        for ch in lowercase_text(sent.text):
            if ch not in counts:
                order.append(ch)
            counts[ch] += 1
    kept = [ch for ch in order if counts[ch] >= min_char_freq]
    return CharVocab(("<pad>", "<unk>", *kept))


def encode_chars(sentence_text: str, vocab: CharVocab) -> List[int]:
    return [vocab.lookup(ch) for ch in lowercase_text(sentence_text)]


@dataclass
class TruecaserTrainConfig:
    epochs: int = 10
    batch_size: int = 32
    lr: float = 1e-2
    seed: int = 0
    min_char_freq: int = 1
    embedding_dim: int = 16
    hidden_dim: int = 32
    clip_norm: Optional[float] = 5.0
    mask_caseless: bool = False

    def __post_init__(self):
        for name in ("epochs", "batch_size", "embedding_dim", "hidden_dim"):
            if getattr(self, name) < 1:
                raise ContractViolation(f"{name} must be positive")
        if self.lr <= 0:
            raise ContractViolation("lr must be positive")
        if self.min_char_freq < 0:
            raise ContractViolation("min_char_freq must be non-negative")

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ContractViolation(f"unknown truecaser config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class TruecaserModel:
    vocab: CharVocab
    params: Dict[str, np.ndarray]
    embedding_dim: int
    hidden_dim: int
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        _check_dims(self)

    @classmethod
    def initialize(cls, vocab, embedding_dim, hidden_dim, seed=0):
        rng = np.random.default_rng(seed)
        params = neural.init_tagger_params(rng, len(vocab), embedding_dim, hidden_dim, NUM_LAYERS)
        return cls(vocab, params, embedding_dim, hidden_dim)

    @property
    def layers(self):
        return neural.layer_params(self.params, NUM_LAYERS)

    def __call__(self, text):
        return truecase(self, text)


def _expected_shapes(V, E, H):
    shapes = {"embedding": (V, E), "head.weight": (1, 2 * H), "head.bias": (1,)}
    in_size = E
    for l in range(NUM_LAYERS):
        for d in neural.DIRECTIONS:
            shapes[neural.layer_key(l, d, "input_weights")] = (4 * H, in_size)
            shapes[neural.layer_key(l, d, "recurrent_weights")] = (4 * H, H)
            shapes[neural.layer_key(l, d, "bias")] = (4 * H,)
        in_size = 2 * H
    return shapes


def _check_dims(model):
    expected = _expected_shapes(len(model.vocab), model.embedding_dim, model.hidden_dim)
    if set(expected) != set(model.params):
        raise DimensionMismatchError(
            f"parameter names differ: missing {sorted(set(expected) - set(model.params))}, "
            f"unexpected {sorted(set(model.params) - set(expected))}"
        )
    for name, shape in expected.items():
        if model.params[name].shape != shape:
            raise DimensionMismatchError(f"{name} has shape {model.params[name].shape}, expected {shape}")


def _pad_batch(seqs: Sequence[Sequence[int]], labels=None):
    T = max((len(s) for s in seqs), default=0)
    B = len(seqs)
    ids = np.zeros((T, B), dtype=np.int64)
    mask = np.zeros((T, B))
    y = np.zeros((T, B))
    for b, s in enumerate(seqs):
        ids[: len(s), b] = s
        mask[: len(s), b] = 1.0
        if labels is not None:
            y[: len(s), b] = labels[b]
    return ids, y, mask


def _caseless_mask(text):
    return [1.0 if _upper_char(low) != low else 0.0 for low in map(lowercase_text, text)]


def train_truecaser(corpus: Corpus, config: TruecaserTrainConfig = None):
    """Train on the corpus's own capitalization.

    Returns ``(model, losses)`` where ``losses[k]`` is the mean batch loss of
    epoch ``k``.  Sentences are sorted by character length and chunked into
    batches; batch order is reshuffled each epoch from ``(seed, epoch)``.
    """
    config = config or TruecaserTrainConfig()
    sentences = corpus.content_sentences()
    if not sentences:
        raise ContractViolation("cannot train a truecaser on an empty corpus")
    vocab = build_vocab(corpus, config.min_char_freq)
    model = TruecaserModel.initialize(vocab, config.embedding_dim, config.hidden_dim, config.seed)

    texts = [s.text for s in sentences]
    order = sorted(range(len(texts)), key=lambda k: (len(texts[k]), k))
    batches = []
    for start in range(0, len(order), config.batch_size):
        members = order[start : start + config.batch_size]
        seqs = [encode_chars(texts[k], vocab) for k in members]
        labs = [extract_case_pattern(texts[k]).to_bits() for k in members]
        ids, y, mask = _pad_batch(seqs, labs)
        if config.mask_caseless:
            cm = [_caseless_mask(texts[k]) for k in members]
            _, cmask, _ = _pad_batch(seqs, cm)
            mask = mask * cmask
        batches.append((ids, y, mask))

    state = neural.AdamState(lr=config.lr, clip_norm=config.clip_norm)
    history = []
    for epoch in range(config.epochs):
        perm = np.random.default_rng([config.seed, epoch]).permutation(len(batches))
        total = 0.0
        for bi in perm:
            ids, y, mask = batches[bi]
            loss, grads = neural.tagger_loss_and_grads(model.params, ids, y, mask)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}, batch {int(bi)}")
            neural.adam_step(model.params, grads, state)
            total += loss
        history.append(total / len(batches))
        log.info("truecaser epoch %d loss %.5f", epoch + 1, history[-1])
    return model, history


def predict_patterns(model: TruecaserModel, texts: Sequence[str], batch_size: int = 64):
    """Predicted :class:`CasePattern` per text (U iff sigmoid(logit) > 0.5)."""
    out = [None] * len(texts)
    order = sorted(range(len(texts)), key=lambda k: len(texts[k]))
    for start in range(0, len(order), batch_size):
        members = order[start : start + batch_size]
        seqs = [encode_chars(texts[k], model.vocab) for k in members]
        if max(len(s) for s in seqs) == 0:
            for k in members:
                out[k] = CasePattern(())
            continue
        ids, _, mask = _pad_batch(seqs)
        logits = neural.tagger_logits(model.params, ids, mask)
        for b, k in enumerate(members):
            n = len(seqs[b])
            out[k] = CasePattern.from_bits(logits[:n, b] > 0.0)
    return out


def truecase_many(model: TruecaserModel, texts: Sequence[str]) -> List[str]:
    lowered = [lowercase_text(t) for t in texts]
    patterns = predict_patterns(model, lowered)
    return [apply_case_pattern(t, p) for t, p in zip(lowered, patterns)]


def truecase(model: TruecaserModel, text: str) -> str:
    """Lowercase ``text`` and restore its case with the model."""
    if not text:
        return ""
    return truecase_many(model, [text])[0]


def truecase_corpus(model: TruecaserModel, corpus: Corpus) -> Corpus:
    """Truecase every sentence of the lowercased corpus; tags are untouched."""
    content = [(i, s) for i, s in enumerate(corpus.sentences) if not s.is_document_start]
    restored = truecase_many(model, [s.text for _, s in content])
    sents = list(corpus.sentences)
    for (i, s), text in zip(content, restored):
        surfaces = text.split(" ")
        sents[i] = s.with_surfaces(surfaces)
    return corpus.replace(sents)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def model_to_dict(model: TruecaserModel) -> dict:
    return {
        "format_version": model.format_version,
        "kind": "truecaser",
        "gate_order": list(neural.GATE_ORDER),
        "dims": {
            "vocab_size": len(model.vocab),
            "embedding_dim": model.embedding_dim,
            "hidden_dim": model.hidden_dim,
            "num_layers": NUM_LAYERS,
        },
        "vocab": [[ch, i] for i, ch in enumerate(model.vocab.chars) if i >= 2],
        "tensors": {name: model.params[name].tolist() for name in sorted(model.params)},
    }


def model_from_dict(doc) -> TruecaserModel:
    if not isinstance(doc, dict):
        raise CorruptModelError("model document is not a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"unsupported truecaser format_version {version!r}")
    try:
        dims = doc["dims"]
        V, E, H = int(dims["vocab_size"]), int(dims["embedding_dim"]), int(dims["hidden_dim"])
        if int(dims.get("num_layers", NUM_LAYERS)) != NUM_LAYERS:
            raise DimensionMismatchError(f"expected {NUM_LAYERS} layers, found {dims['num_layers']}")
        chars = ["<pad>", "<unk>"] + [None] * (V - 2)
        for ch, idx in doc["vocab"]:
            if not (2 <= idx < V) or chars[idx] is not None:
                raise DimensionMismatchError(f"vocab id {idx} out of range or duplicated")
            chars[idx] = ch
        if any(c is None for c in chars):
            raise DimensionMismatchError("vocabulary ids are not contiguous")
        params = {name: np.array(v, dtype=np.float64) for name, v in doc["tensors"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DimensionMismatchError):
            raise
        raise CorruptModelError(f"malformed model document: {exc}") from exc
    return TruecaserModel(CharVocab(tuple(chars)), params, E, H, version)


def save_model(model: TruecaserModel, destination) -> None:
    with open(destination, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, ensure_ascii=False)


def load_model(source) -> TruecaserModel:
    with open(source, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModelError(f"{source}: not valid JSON ({exc})") from exc
    return model_from_dict(doc)

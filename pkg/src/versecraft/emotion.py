"""Six-class emotion classifier: cleaned characters -> embedding -> LSTM ->
fully connected layer -> softmax.

The recurrence runs over the non-PAD prefix only, so padding a sequence out
to the fitted length never changes its classification. Gradients are exact
and reuse the LSTM kernels of the neural module.
"""
from __future__ import annotations

import logging
import math
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import NUM_SPECIALS, PAD_ID, Vocab
from .embedding import EmbeddingMatrix
from .errors import FormatError
from .keywords import STOP_WORDS
from .neural.checkpoint import CKPT_MAGIC, load_blob, save_blob
from .neural.lstm import LstmCell, glorot_uniform, run_lstm_backward, run_lstm_forward
from .neural.optim import AdamState, adam_step, clip_gradients
from .neural.seq2seq import softmax

log = logging.getLogger(__name__)

LABELS = ("others", "likes", "sadness", "disgust", "anger", "happiness")
NUM_LABELS = len(LABELS)

MIN_FIT_LENGTH = 4
MAX_FIT_LENGTH = 64

# Characters allowed through cleaning: CJK unified (plus extension A),
# ASCII letters and digits. Everything else is treated as noise.
_CJK_RANGES = ((0x4E00, 0x9FFF), (0x3400, 0x4DBF))


def _allowed_char(ch: str) -> bool:
    code = ord(ch)
    if any(lo <= code <= hi for lo, hi in _CJK_RANGES):
        return True
    return ch.isascii() and ch.isalnum()


@dataclass(frozen=True)
class EmotionExample:
    text: tuple[str, ...]
    label: int

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("example text must be non-empty after cleaning")
        if self.label not in range(NUM_LABELS):
            raise ValueError(f"label must be in 0..{NUM_LABELS - 1}")


@dataclass
class EmotionConfig:
    epochs: int = 100
    batch_size: int = 16
    learning_rate: float = 1e-2
    clip_norm: float = 5.0
    hidden: int = 64
    embed_dim: int = 300
    seed: int = 42


def clean_text(raw: str, stopwords: frozenset[str] = STOP_WORDS) -> list[str]:
    """Drop control/garbled characters and stop words; tokenize per character."""
    tokens = []
    for ch in raw:
        if unicodedata.category(ch).startswith("C"):
            continue
        if _allowed_char(ch) and ch not in stopwords:
            tokens.append(ch)
    return tokens


def fit_length(dataset: Sequence[EmotionExample]) -> int:
    """Sequence length: the 95th percentile of text lengths (lower method, so
    a lone outlier cannot drag it up), clamped to [4, 64]."""
    if not dataset:
        raise ValueError("dataset must be non-empty")
    lengths = np.array([len(ex.text) for ex in dataset])
    l_star = int(np.percentile(lengths, 95, method="lower"))
    return max(MIN_FIT_LENGTH, min(MAX_FIT_LENGTH, l_star))


def split_dataset(
    examples: Sequence[EmotionExample], seed: int
) -> tuple[list[EmotionExample], list[EmotionExample]]:
    """Label-stratified 80/20 train/test split (test:train = 1:4).

    The test set gets round(0.2*N) examples; per-label counts start at the
    floor of 20% and the remainder goes to the labels with the largest
    fractional parts, so every label lands within one example of 20%.
    """
    if len(examples) < 5:
        raise ValueError("need at least 5 examples to split")
    rng = np.random.default_rng(seed)
    by_label: dict[int, list[int]] = {}
    for idx, ex in enumerate(examples):
        by_label.setdefault(ex.label, []).append(idx)
    target_test = round(0.2 * len(examples))
    quotas = {}
    remainders = []
    for label in sorted(by_label):
        exact = 0.2 * len(by_label[label])
        quotas[label] = int(math.floor(exact))
        remainders.append((-(exact - math.floor(exact)), label))
    short = target_test - sum(quotas.values())
    for _, label in sorted(remainders)[:short]:
        quotas[label] += 1
    test_idx: list[int] = []
    for label in sorted(by_label):
        pool = np.array(by_label[label])
        rng.shuffle(pool)
        test_idx.extend(pool[: quotas[label]].tolist())
    test_set = set(test_idx)
    train = [examples[i] for i in range(len(examples)) if i not in test_set]
    test = [examples[i] for i in sorted(test_set)]
    return train, test


# ---------------------------------------------------------------------------
# TSV dataset: label<TAB>text, one example per line
# ---------------------------------------------------------------------------


def read_tsv(path: str | Path, stopwords: frozenset[str] = STOP_WORDS) -> list[EmotionExample]:
    examples: list[EmotionExample] = []
    dropped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected label<TAB>text")
            try:
                label = int(parts[0])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: bad label {parts[0]!r}")
            if label not in range(NUM_LABELS):
                raise FormatError(f"{path}:{lineno}: label {label} outside 0..5")
            tokens = clean_text(parts[1], stopwords)
            if not tokens:
                dropped += 1
                continue
            examples.append(EmotionExample(tuple(tokens), label))
    if dropped:
        log.warning("%s: dropped %d examples empty after cleaning", path, dropped)
    return examples


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


@dataclass
class EmotionModel:
    vocab: Vocab
    fit_len: int
    hidden: int
    embed_dim: int
    params: dict[str, np.ndarray]

    @classmethod
    def create(
        cls,
        vocab: Vocab,
        fit_len: int,
        hidden: int = 64,
        embed_dim: int = 300,
        shared: EmbeddingMatrix | None = None,
        seed: int = 42,
        dtype=np.float64,
    ) -> "EmotionModel":
        rng = np.random.default_rng(seed)
        v = len(vocab)
        bound = 0.5 / embed_dim
        emb = rng.uniform(-bound, bound, size=(v, embed_dim)).astype(dtype)
        if shared is not None:
            if shared.dim != embed_dim:
                raise ValueError("shared embedding dimension mismatch")
            for idx, tok in enumerate(vocab.id2word):
                if tok in shared.vocab:
                    emb[idx] = shared.rows[shared.vocab.word2id[tok]].astype(dtype)
        w = glorot_uniform(rng, (embed_dim + hidden, 4 * hidden), dtype)
        b = np.zeros(4 * hidden, dtype=dtype)
        b[hidden : 2 * hidden] = 1.0
        params = {
            "embedding": emb,
            "cell_w": w,
            "cell_b": b,
            "fc_w": glorot_uniform(rng, (NUM_LABELS, hidden), dtype),
            "fc_b": np.zeros(NUM_LABELS, dtype=dtype),
        }
        return cls(vocab=vocab, fit_len=fit_len, hidden=hidden,
                   embed_dim=embed_dim, params=params)

    @property
    def dtype(self):
        return self.params["embedding"].dtype

    @property
    def cell(self) -> LstmCell:
        return LstmCell(
            w=self.params["cell_w"], b=self.params["cell_b"],
            input_dim=self.embed_dim, hidden=self.hidden,
        )

    def zero_grads(self) -> dict[str, np.ndarray]:
        return {name: np.zeros_like(arr) for name, arr in self.params.items()}


def _clip_ids(model: EmotionModel, ids: Sequence[int]) -> np.ndarray:
    """Truncate to the fitted length and strip trailing PAD; PAD steps are
    state preserving, so skipping them entirely is equivalent."""
    ids = list(ids)[: model.fit_len]
    while ids and ids[-1] == PAD_ID:
        ids.pop()
    return np.array(ids, dtype=np.int64)


def _forward(model: EmotionModel, ids: np.ndarray) -> tuple[np.ndarray, dict]:
    emb = model.params["embedding"]
    xs = emb[ids]
    zero = np.zeros(model.hidden, dtype=model.dtype)
    hs, caches, h_last, _ = run_lstm_forward(model.cell, xs, zero, zero)
    logits = model.params["fc_w"] @ h_last + model.params["fc_b"]
    probs = softmax(logits)
    return probs, {"ids": ids, "caches": caches, "h_last": h_last, "probs": probs}


def _backward(model: EmotionModel, cache: dict, d_logits: np.ndarray,
              grads: dict[str, np.ndarray]) -> None:
    grads["fc_w"] += np.outer(d_logits, cache["h_last"])
    grads["fc_b"] += d_logits
    dh_last = model.params["fc_w"].T @ d_logits
    steps = len(cache["caches"])
    dhs = np.zeros((steps, model.hidden), dtype=model.dtype)
    dxs = run_lstm_backward(
        model.cell, cache["caches"], dhs,
        grads["cell_w"], grads["cell_b"], dh_last=dh_last,
    )
    np.add.at(grads["embedding"], cache["ids"], dxs)


def example_loss_and_grads(
    model: EmotionModel, ids: np.ndarray, label: int,
    grads: dict[str, np.ndarray],
) -> float:
    """Cross-entropy of one example; gradients accumulate into grads."""
    probs, cache = _forward(model, ids)
    loss = -math.log(max(float(probs[label]), 1e-300))
    d_logits = probs.copy()
    d_logits[label] -= 1.0
    _backward(model, cache, d_logits.astype(model.dtype), grads)
    return loss


def train_emotion(
    train_set: Sequence[EmotionExample],
    config: EmotionConfig,
    shared: EmbeddingMatrix | None = None,
    fit_len: int | None = None,
) -> tuple[EmotionModel, list[tuple[int, float]]]:
    """Train the classifier with Adam over shuffled mini-batches.

    The vocabulary is built from the training texts; embedding rows start
    from the shared matrix where tokens overlap and randomly otherwise.
    """
    if not train_set:
        raise ValueError("training set is empty")
    tokens = sorted({tok for ex in train_set for tok in ex.text})
    vocab = Vocab(tokens)
    if fit_len is None:
        fit_len = fit_length(train_set)
    model = EmotionModel.create(
        vocab, fit_len, hidden=config.hidden, embed_dim=config.embed_dim,
        shared=shared, seed=config.seed,
    )
    optimizer = AdamState.init(model.params, config.learning_rate)
    encoded = [
        (_clip_ids(model, vocab.encode(ex.text)), ex.label) for ex in train_set
    ]
    history: list[tuple[int, float]] = []
    for epoch in range(config.epochs):
        order = np.random.default_rng((config.seed, epoch)).permutation(len(encoded))
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            chunk = order[start : start + config.batch_size]
            grads = model.zero_grads()
            batch_loss = 0.0
            for i in chunk:
                ids, label = encoded[i]
                batch_loss += example_loss_and_grads(model, ids, label, grads)
            for g in grads.values():
                g /= len(chunk)
            clip_gradients(grads, config.clip_norm)
            adam_step(optimizer, model.params, grads)
            epoch_loss += batch_loss
        history.append((epoch, epoch_loss / len(encoded)))
    return model, history


def classify(model: EmotionModel, text: str | Sequence[str]) -> tuple[int, np.ndarray]:
    """Predicted label (argmax; ties pick the lowest id) and all six
    probabilities for one raw text."""
    tokens = clean_text(text) if isinstance(text, str) else list(text)
    if not tokens:
        raise ValueError("text is empty after cleaning")
    ids = _clip_ids(model, model.vocab.encode(tokens))
    if ids.size == 0:
        raise ValueError("text is empty after cleaning")
    probs, _ = _forward(model, ids)
    return int(np.argmax(probs)), probs


def evaluate(
    model: EmotionModel, test_set: Sequence[EmotionExample]
) -> tuple[float, np.ndarray]:
    """Accuracy and a 6x6 confusion matrix (rows = true label)."""
    if not test_set:
        raise ValueError("test set is empty")
    confusion = np.zeros((NUM_LABELS, NUM_LABELS), dtype=np.int64)
    correct = 0
    for ex in test_set:
        predicted, _ = classify(model, ex.text)
        confusion[ex.label, predicted] += 1
        if predicted == ex.label:
            correct += 1
    return correct / len(test_set), confusion


# ---------------------------------------------------------------------------
# Persistence (binary container with the vocab inline)
# ---------------------------------------------------------------------------


def save_emotion_model(model: EmotionModel, path: str | Path) -> None:
    meta = {
        "format": CKPT_MAGIC,
        "mode": "emotion",
        "dims": {
            "vocab": len(model.vocab),
            "embed": model.embed_dim,
            "hidden": model.hidden,
            "labels": NUM_LABELS,
            "fit_length": model.fit_len,
        },
        "vocab_hash": model.vocab.content_hash(),
        "extra": {"vocab": model.vocab.id2word, "labels": list(LABELS)},
    }
    save_blob(path, meta, model.params)


def load_emotion_model(path: str | Path) -> EmotionModel:
    header, arrays = load_blob(path)
    if header.get("mode") != "emotion":
        raise FormatError(f"{path}: not an emotion model (mode={header.get('mode')!r})")
    tokens = header["extra"]["vocab"]
    vocab = Vocab(tokens[NUM_SPECIALS:])
    if vocab.content_hash() != header["vocab_hash"]:
        raise FormatError(f"{path}: inline vocabulary does not match its hash")
    dims = header["dims"]
    return EmotionModel(
        vocab=vocab,
        fit_len=int(dims["fit_length"]),
        hidden=int(dims["hidden"]),
        embed_dim=int(dims["embed"]),
        params=arrays,
    )

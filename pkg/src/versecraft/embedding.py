"""Skip-gram word vectors trained with negative sampling.

The trainer walks every (center, offset) pair inside a window over each
sentence, contrasts the observed context token against noise tokens drawn
from the unigram^(3/4) distribution, and applies plain SGD to both the input
(center) and output (context) vector tables. Input rows start uniform in
[-0.5/D, 0.5/D]; output rows start at zero. Training is single threaded and
bitwise reproducible for a fixed config.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import NUM_SPECIALS, SPECIAL_TOKENS, Vocab
from .errors import FormatError

DEFAULT_DIM = 300
EMBED_MAGIC = "versecraft-embed v1"

# Learning rate decays linearly over all scheduled pairs, floored at this
# fraction of the starting rate.
MIN_LR_FRACTION = 1e-4


@dataclass
class SkipGramConfig:
    window: int = 2
    negatives: int = 5
    learning_rate: float = 0.025
    epochs: int = 15
    seed: int = 42
    dim: int = DEFAULT_DIM

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning rate must be >= 0")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")


class EmbeddingMatrix:
    """Word-vector store: V input rows (the embeddings) plus V output rows
    used only during training. The matrix owns a private copy of the vocab so
    ensure_word can grow it without touching the caller's vocabulary."""

    def __init__(
        self,
        vocab: Vocab,
        rows: np.ndarray,
        context_rows: np.ndarray | None = None,
        seed: int = 42,
    ) -> None:
        if rows.shape[0] != len(vocab):
            raise ValueError(
                f"row count {rows.shape[0]} != vocab size {len(vocab)}"
            )
        self.vocab = vocab
        self.rows = rows
        self.context_rows = context_rows
        self.seed = seed

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.rows.shape[0]

    @classmethod
    def random_init(
        cls, vocab: Vocab, dim: int = DEFAULT_DIM, seed: int = 42
    ) -> "EmbeddingMatrix":
        rng = np.random.default_rng(seed)
        bound = 0.5 / dim
        rows = rng.uniform(-bound, bound, size=(len(vocab), dim))
        ctx = np.zeros((len(vocab), dim))
        return cls(vocab.copy(), rows, ctx, seed=seed)


def _word_rng(seed: int, word: str) -> np.random.Generator:
    # Stable across processes, unlike hash().
    digest = hashlib.sha256(word.encode("utf-8")).digest()
    return np.random.default_rng((seed, int.from_bytes(digest[:8], "little")))


def ensure_word(matrix: EmbeddingMatrix, word: str) -> np.ndarray:
    """Return the word's vector, appending a fresh random row for new words.

    The new row is drawn uniform in [-0.5/D, 0.5/D] from an rng derived from
    the matrix seed and the word itself, so injection order does not change
    the vector a given word receives.
    """
    if word in matrix.vocab:
        return matrix.rows[matrix.vocab.word2id[word]].copy()
    bound = 0.5 / matrix.dim
    row = _word_rng(matrix.seed, word).uniform(-bound, bound, size=matrix.dim)
    matrix.vocab.add(word)
    matrix.rows = np.vstack([matrix.rows, row[None, :]])
    if matrix.context_rows is not None:
        matrix.context_rows = np.vstack(
            [matrix.context_rows, np.zeros((1, matrix.dim))]
        )
    return row.copy()


def nearest(matrix: EmbeddingMatrix, word: str, k: int) -> list[tuple[str, float]]:
    """k most cosine-similar content tokens to `word`, the word itself and
    the specials excluded; ties break toward the lower token id."""
    if word not in matrix.vocab:
        raise KeyError(f"word {word!r} not in embedding vocabulary")
    if k < 1:
        raise ValueError("k must be >= 1")
    wid = matrix.vocab.word2id[word]
    query = matrix.rows[wid]
    qnorm = float(np.linalg.norm(query))
    sims: list[tuple[float, int]] = []
    for idx in range(NUM_SPECIALS, len(matrix)):
        if idx == wid:
            continue
        row = matrix.rows[idx]
        denom = qnorm * float(np.linalg.norm(row))
        cos = float(row @ query) / denom if denom > 0.0 else 0.0
        sims.append((cos, idx))
    sims.sort(key=lambda item: (-item[0], item[1]))
    return [(matrix.vocab.id2word[idx], cos) for cos, idx in sims[:k]]


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    denom = float(np.linalg.norm(u)) * float(np.linalg.norm(v))
    return float(u @ v) / denom if denom > 0.0 else 0.0


# ---------------------------------------------------------------------------
# Negative-sampling kernel
# ---------------------------------------------------------------------------


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def _softplus(z: np.ndarray) -> np.ndarray:
    # log(1 + e^z) without overflow for large |z|
    return np.log1p(np.exp(-np.abs(z))) + np.maximum(z, 0.0)


def pair_loss_and_grads(
    center_vec: np.ndarray, target_vecs: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Binary logistic loss of one training event and its exact gradients.

    target_vecs stacks the positive context row first and the negative rows
    after it; labels is 1 for the positive row and 0 for the noise rows.
    Returns (loss, d_center, d_targets).
    """
    z = target_vecs @ center_vec
    loss = float(np.sum(labels * _softplus(-z) + (1.0 - labels) * _softplus(z)))
    err = _sigmoid(z) - labels            # dL/dz
    d_center = err @ target_vecs
    d_targets = np.outer(err, center_vec)
    return loss, d_center, d_targets


def pair_loss(
    center_vec: np.ndarray, target_vecs: np.ndarray, labels: np.ndarray
) -> float:
    return pair_loss_and_grads(center_vec, target_vecs, labels)[0]


def train_pair(
    matrix: EmbeddingMatrix,
    center: int,
    context: int,
    negative_ids: np.ndarray,
    lr: float,
) -> float:
    """One SGD update on a (center, context, negatives) event; returns loss."""
    ids = np.concatenate(([context], negative_ids)).astype(np.int64)
    labels = np.zeros(len(ids))
    labels[0] = 1.0
    center_vec = matrix.rows[center]
    target_vecs = matrix.context_rows[ids]
    loss, d_center, d_targets = pair_loss_and_grads(center_vec, target_vecs, labels)
    # Both updates use pre-update values; duplicate negative ids accumulate.
    np.add.at(matrix.context_rows, ids, -lr * d_targets)
    matrix.rows[center] -= lr * d_center
    return loss


def _noise_distribution(sentences: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    counts: dict[int, int] = {}
    for sent in sentences:
        for tok in sent:
            counts[tok] = counts.get(tok, 0) + 1
    ids = np.array(sorted(counts), dtype=np.int64)
    weights = np.array([counts[i] for i in ids], dtype=np.float64) ** 0.75
    cumulative = np.cumsum(weights / weights.sum())
    return ids, cumulative


def train_skipgram(
    token_stream: Sequence[Sequence[int]] | Sequence[int],
    config: SkipGramConfig,
    vocab: Vocab,
    loss_log: list[tuple[int, float]] | None = None,
) -> EmbeddingMatrix:
    """Train skip-gram vectors over id sentences.

    Accepts either a list of sentences (no context pairs cross a sentence
    boundary) or one flat id sequence. Special-token ids must not appear in
    the stream.
    """
    if len(token_stream) == 0:
        raise ValueError("token stream is empty")
    if isinstance(token_stream[0], (int, np.integer)):
        sentences: list[list[int]] = [list(token_stream)]  # type: ignore[arg-type]
    else:
        sentences = [list(s) for s in token_stream]  # type: ignore[union-attr]
    total_tokens = sum(len(s) for s in sentences)
    if total_tokens == 0:
        raise ValueError("token stream is empty")
    for sent in sentences:
        for tok in sent:
            if tok < NUM_SPECIALS:
                raise ValueError(f"special token id {tok} in training stream")

    matrix = EmbeddingMatrix.random_init(vocab, dim=config.dim, seed=config.seed)
    rng = np.random.default_rng(config.seed)
    noise_ids, noise_cum = _noise_distribution(sentences)

    pairs_per_epoch = 0
    for sent in sentences:
        for t in range(len(sent)):
            lo = max(0, t - config.window)
            hi = min(len(sent), t + config.window + 1)
            pairs_per_epoch += (hi - lo - 1)
    total_pairs = max(1, pairs_per_epoch * config.epochs)

    processed = 0
    for epoch in range(config.epochs):
        epoch_loss = 0.0
        epoch_pairs = 0
        for sent in sentences:
            for t, center in enumerate(sent):
                lo = max(0, t - config.window)
                hi = min(len(sent), t + config.window + 1)
                for j in range(lo, hi):
                    if j == t:
                        continue
                    draws = rng.random(config.negatives)
                    negs = noise_ids[np.searchsorted(noise_cum, draws)]
                    lr = config.learning_rate * max(
                        MIN_LR_FRACTION, 1.0 - processed / total_pairs
                    )
                    epoch_loss += train_pair(matrix, center, sent[j], negs, lr)
                    epoch_pairs += 1
                    processed += 1
        if loss_log is not None and epoch_pairs:
            loss_log.append((epoch, epoch_loss / epoch_pairs))
    return matrix


# ---------------------------------------------------------------------------
# Persistence: "versecraft-embed v1 <V> <D>" header then one token per line
# ---------------------------------------------------------------------------


def save_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    lines = [f"{EMBED_MAGIC} {len(matrix)} {matrix.dim}"]
    for idx, token in enumerate(matrix.vocab.id2word):
        values = " ".join(repr(float(v)) for v in matrix.rows[idx])
        lines.append(f"{token} {values}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Read an embedding file; output rows are not persisted, so the loaded
    matrix supports lookup and neighbour queries but not further training."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text:
        raise FormatError(f"{path}: empty embedding file")
    header = text[0].rsplit(" ", 2)
    if len(header) != 3 or header[0] != EMBED_MAGIC:
        raise FormatError(f"{path}: bad header {text[0]!r}")
    try:
        count, dim = int(header[1]), int(header[2])
    except ValueError:
        raise FormatError(f"{path}: bad header {text[0]!r}")
    if len(text) - 1 != count:
        raise FormatError(f"{path}: header promises {count} rows, found {len(text) - 1}")
    tokens: list[str] = []
    rows = np.zeros((count, dim))
    for i, line in enumerate(text[1:]):
        parts = line.split(" ")
        if len(parts) != dim + 1:
            raise FormatError(f"{path}:{i + 2}: expected token plus {dim} values")
        tokens.append(parts[0])
        rows[i] = [float(v) for v in parts[1:]]
    if tuple(tokens[:NUM_SPECIALS]) != SPECIAL_TOKENS:
        raise FormatError(f"{path}: first four tokens must be the specials")
    vocab = Vocab(tokens[NUM_SPECIALS:])
    return EmbeddingMatrix(vocab, rows, None)

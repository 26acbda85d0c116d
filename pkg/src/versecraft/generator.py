"""Training orchestration and line-by-line poem generation.

Generation plans one keyword per line (expanding with embedding neighbours
when user text yields too few), then decodes greedily line after line, each
time re-encoding the keyword together with everything generated so far.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import (
    LINE_SEPARATOR,
    PAD_ID,
    START_ID,
    UNK_ID,
    Form,
    Vocab,
    pad_batch,
    read_pair_file,
)
from .embedding import EmbeddingMatrix, ensure_word, nearest
from .keywords import TfidfModel, extract_keywords
from .neural.checkpoint import load_checkpoint, save_checkpoint
from .neural.optim import AdamState, adam_step, clip_gradients
from .neural.seq2seq import (
    Mode,
    Seq2SeqModel,
    decode_greedy,
    encode,
    loss_and_grads,
)

log = logging.getLogger(__name__)

# Ids the greedy decoder may never emit into a poem line.
GENERATION_BAN_IDS = (PAD_ID, UNK_ID, START_ID)


@dataclass(frozen=True)
class GenerationPlan:
    keywords: tuple[str, ...]
    form: Form
    n_lines: int

    def __post_init__(self) -> None:
        if len(self.keywords) != self.n_lines:
            raise ValueError("plan must carry exactly one keyword per line")


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 1e-3
    clip_norm: float = 5.0
    seed: int = 42
    mode: Mode = Mode.ATTENTION
    hidden: int = 128
    checkpoint_interval: int = 10
    checkpoint_dir: str | Path | None = None
    resume_from: str | Path | None = None

    def __post_init__(self) -> None:
        for name in ("epochs", "batch_size", "clip_norm", "hidden", "checkpoint_interval"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning rate must be >= 0")


def plan_keywords(
    user_text: Sequence[str],
    n_lines: int,
    tfidf_model: TfidfModel | None,
    embeddings: EmbeddingMatrix,
    form: Form = Form.FIVE,
) -> GenerationPlan:
    """Extract up to n_lines keywords from the user text, then top up with
    embedding nearest neighbours of the chosen keywords, round robin, never
    repeating a keyword already in the plan."""
    if n_lines < 1:
        raise ValueError("n_lines must be >= 1")
    chosen = extract_keywords(user_text, n_lines, tfidf_model)
    if not chosen:
        raise ValueError("user text yields no keyword candidates")
    if len(chosen) < n_lines:
        neighbour_lists: dict[str, list[str]] = {}
        cursor = 0
        stalled = 0
        while len(chosen) < n_lines:
            source = chosen[cursor % len(chosen)]
            cursor += 1
            if source not in neighbour_lists:
                ensure_word(embeddings, source)
                limit = len(embeddings.vocab) - 5
                neighbour_lists[source] = (
                    [tok for tok, _ in nearest(embeddings, source, limit)]
                    if limit >= 1 else []
                )
            picked = None
            for tok in neighbour_lists[source]:
                if tok not in chosen:
                    picked = tok
                    break
            if picked is None:
                stalled += 1
                if stalled >= len(chosen):
                    raise ValueError(
                        "embedding vocabulary too small to expand the keyword plan"
                    )
                continue
            stalled = 0
            chosen.append(picked)
    return GenerationPlan(keywords=tuple(chosen[:n_lines]), form=form, n_lines=n_lines)


def generate_poem(model: Seq2SeqModel, plan: GenerationPlan) -> list[str]:
    """Greedy line-by-line generation; line i is conditioned on keyword i and
    on all previously generated lines joined by the line separator. Empty
    lines (immediate END) are kept, not dropped."""
    vocab = model.vocab
    lines: list[str] = []
    max_len = plan.form.value + 2
    for keyword in plan.keywords:
        preamble = LINE_SEPARATOR.join(lines)
        kw_ids = np.array([vocab.encode(keyword)], dtype=np.int64)
        ctx_tokens = vocab.encode(preamble) if preamble else [START_ID]
        ctx_ids = np.array([ctx_tokens], dtype=np.int64)
        enc = encode(
            model, kw_ids, ctx_ids,
            np.array([kw_ids.shape[1]]), np.array([ctx_ids.shape[1]]),
        )
        ids = decode_greedy(
            model, enc.states[0], enc.mask[0],
            max_len=max_len, ban_ids=GENERATION_BAN_IDS,
        )
        lines.append("".join(vocab.decode(ids)))
    return lines


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


def _epoch_order(seed: int, epoch: int, n: int) -> np.ndarray:
    # Derived from (seed, epoch) alone so a resumed run shuffles identically.
    return np.random.default_rng((seed, epoch)).permutation(n)


def train_generator(
    pair_path: str | Path,
    vocab: Vocab,
    embeddings: EmbeddingMatrix,
    config: TrainConfig,
) -> tuple[Seq2SeqModel, list[tuple[int, float, float]], AdamState]:
    """Train the seq2seq generator over a pair file.

    Returns the model, a per-epoch (epoch, mean_loss, perplexity) log where
    mean_loss is token weighted so perplexity = exp(mean_loss), and the
    optimizer state (so the final checkpoint can be resumed from). Training
    runs in float32; checkpoints are therefore lossless and a resumed run
    reproduces an uninterrupted one exactly.
    """
    pairs = read_pair_file(pair_path)
    if not pairs:
        raise ValueError(f"{pair_path}: no training pairs")
    if embeddings.rows.shape[0] < len(vocab):
        raise ValueError("embedding matrix smaller than vocabulary")

    start_epoch = 0
    if config.resume_from is not None:
        model, optimizer, extra = load_checkpoint(config.resume_from, vocab)
        if model.mode is not config.mode:
            raise ValueError("checkpoint mode differs from config mode")
        if optimizer is None:
            optimizer = AdamState.init(model.params, config.learning_rate)
        start_epoch = int(extra.get("epoch", 0))
    else:
        model = Seq2SeqModel.create(
            vocab,
            embed_dim=embeddings.dim,
            hidden=config.hidden,
            mode=config.mode,
            embedding=embeddings.rows[: len(vocab)],
            seed=config.seed,
            dtype=np.float32,
        )
        optimizer = AdamState.init(model.params, config.learning_rate)

    history: list[tuple[int, float, float]] = []
    for epoch in range(start_epoch, config.epochs):
        order = _epoch_order(config.seed, epoch, len(pairs))
        loss_sum = 0.0
        token_sum = 0
        for start in range(0, len(order), config.batch_size):
            chunk = [pairs[i] for i in order[start : start + config.batch_size]]
            batch = pad_batch(chunk, vocab)
            loss, grads = loss_and_grads(model, batch)
            clip_gradients(grads, config.clip_norm)
            adam_step(optimizer, model.params, grads)
            tokens = int(batch.loss_mask.sum())
            loss_sum += loss * tokens
            token_sum += tokens
        mean_loss = loss_sum / token_sum
        history.append((epoch, mean_loss, math.exp(mean_loss)))
        if config.checkpoint_dir is not None and (
            (epoch + 1) % config.checkpoint_interval == 0
            or epoch + 1 == config.epochs
        ):
            ckpt_dir = Path(config.checkpoint_dir)
            ckpt_dir.mkdir(parents=True, exist_ok=True)
            save_checkpoint(
                ckpt_dir / f"epoch{epoch + 1:04d}.ckpt", model,
                vocab.content_hash(), optimizer=optimizer, epoch=epoch + 1,
            )
    return model, history, optimizer


def write_loss_log(history: Sequence[tuple[int, float, float]], path: str | Path) -> None:
    lines = [f"{epoch}\t{loss!r}\t{pp!r}" for epoch, loss, pp in history]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")

"""Perplexity of a seq2seq model over held-out keyword|text pairs.

Log-probabilities accumulate in natural log and are exponentiated once at the
end, so long sequences cannot underflow the way the literal probability
product would.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Batch, TrainingPair, pad_batch
from .neural.seq2seq import Seq2SeqModel, decode_train, encode


@dataclass
class PerplexityReport:
    n: int
    log_prob: float
    perplexity: float

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "log_prob": self.log_prob, "perplexity": self.perplexity},
            sort_keys=True,
        )

    def __str__(self) -> str:
        return f"N={self.n} PP={self.perplexity!r}"


def _batch_log_probs(model: Seq2SeqModel, batch: Batch) -> tuple[np.ndarray, np.ndarray]:
    """Per-example (log_prob, token_count) under teacher forcing."""
    enc = encode(
        model, batch.keyword_ids, batch.context_ids,
        batch.keyword_lengths, batch.context_lengths,
    )
    logits, _ = decode_train(model, enc, batch.decoder_in_ids)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=-1))
    picked = np.take_along_axis(
        shifted, batch.decoder_target_ids[..., None], axis=-1
    )[..., 0]
    token_lp = (picked - log_z) * batch.loss_mask
    return token_lp.sum(axis=1), batch.loss_mask.sum(axis=1)


def sentence_log_prob(model: Seq2SeqModel, pair: TrainingPair) -> tuple[float, int]:
    """Natural-log probability of the target line (END step included) and the
    number of scored tokens."""
    vocab = model.vocab
    batch = pad_batch([pair], vocab)
    lps, counts = _batch_log_probs(model, batch)
    return float(lps[0]), int(counts[0])


def perplexity(
    model: Seq2SeqModel, pairs: Sequence[TrainingPair], batch_size: int = 32
) -> PerplexityReport:
    """Token-pooled perplexity exp(-sum(log p)/N) over all pairs."""
    if not pairs:
        raise ValueError("cannot evaluate an empty pair set")
    vocab = model.vocab
    total_lp = 0.0
    total_n = 0
    for start in range(0, len(pairs), batch_size):
        batch = pad_batch(pairs[start : start + batch_size], vocab)
        lps, counts = _batch_log_probs(model, batch)
        total_lp += float(lps.sum())
        total_n += int(counts.sum())
    return PerplexityReport(
        n=total_n,
        log_prob=total_lp,
        perplexity=math.exp(-total_lp / total_n),
    )

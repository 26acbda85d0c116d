"""Shared fixtures. The expensive trained artifacts are session scoped so the
unit tests and the acceptance suite reuse one training run each."""
from __future__ import annotations

import time
from pathlib import Path

import numpy as np
import pytest

from versecraft.corpus import Form, Poem, TrainingPair, Vocab, build_vocab, write_pair_file
from versecraft.embedding import EmbeddingMatrix, SkipGramConfig, train_skipgram
from versecraft.emotion import EmotionConfig, read_tsv, train_emotion
from versecraft.generator import TrainConfig, train_generator

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def jingyesi_poem() -> Poem:
    return Poem("静夜思", "李白", ("床前明月光", "疑是地上霜"), Form.FIVE)


@pytest.fixture(scope="session")
def worked_example_pairs() -> list[TrainingPair]:
    return [
        TrainingPair(tuple("月光"), (), tuple("床前明月光")),
        TrainingPair(tuple("霜"), tuple("床前明月光"), tuple("疑是地上霜")),
    ]


@pytest.fixture(scope="session")
def overfit_two_pair(tmp_path_factory, jingyesi_poem, worked_example_pairs):
    """Model overfit to the two worked-example pairs, with timing."""
    tmp = tmp_path_factory.mktemp("twopair")
    pair_path = tmp / "pairs.txt"
    write_pair_file(worked_example_pairs, pair_path)
    vocab = build_vocab([jingyesi_poem])
    embeddings = EmbeddingMatrix.random_init(vocab, dim=32, seed=7)
    config = TrainConfig(epochs=150, batch_size=2, learning_rate=5e-3,
                         hidden=32, seed=11)
    start = time.monotonic()
    model, history, _ = train_generator(pair_path, vocab, embeddings, config)
    elapsed = time.monotonic() - start
    return {
        "model": model, "history": history, "vocab": vocab,
        "embeddings": embeddings, "pair_path": pair_path,
        "pairs": worked_example_pairs, "seconds": elapsed, "config": config,
    }


def make_toy20_poems(seed: int = 5) -> list[Poem]:
    rng = np.random.default_rng(seed)
    alphabet = [chr(ord("一") + i) for i in range(40)]
    poems = []
    for p in range(5):
        lines = tuple("".join(rng.choice(alphabet, 5)) for _ in range(4))
        poems.append(Poem(f"toy{p}", "", lines, Form.FIVE))
    return poems


def make_toy20_pairs(poems: list[Poem]) -> list[TrainingPair]:
    pairs = []
    for poem in poems:
        prev: list[str] = []
        for line in poem.lines:
            pairs.append(TrainingPair((line[2],), tuple(prev), tuple(line)))
            if prev:
                prev.append("，")
            prev.extend(line)
    return pairs


@pytest.fixture(scope="session")
def toy20(tmp_path_factory):
    """20-pair toy corpus trained until (well past) PP < 1.2."""
    tmp = tmp_path_factory.mktemp("toy20")
    poems = make_toy20_poems()
    pairs = make_toy20_pairs(poems)
    pair_path = tmp / "pairs.txt"
    write_pair_file(pairs, pair_path)
    vocab = build_vocab(poems)
    embeddings = EmbeddingMatrix.random_init(vocab, dim=32, seed=7)
    config = TrainConfig(epochs=120, batch_size=20, learning_rate=1e-2,
                         hidden=48, seed=11)
    model, history, _ = train_generator(pair_path, vocab, embeddings, config)
    return {
        "model": model, "history": history, "vocab": vocab,
        "embeddings": embeddings, "pairs": pairs, "pair_path": pair_path,
        "config": config,
    }


@pytest.fixture(scope="session")
def twoclique():
    """Skip-gram vectors trained on the two-clique synthetic corpus."""
    vocab = Vocab(["a", "b", "c", "d"])
    sentences = []
    for _ in range(60):
        sentences.append(vocab.encode(["a", "b"] * 3))
        sentences.append(vocab.encode(["c", "d"] * 3))
    config = SkipGramConfig(window=2, negatives=5, learning_rate=0.025,
                            epochs=15, seed=3, dim=50)
    start = time.monotonic()
    matrix = train_skipgram(sentences, config, vocab)
    elapsed = time.monotonic() - start
    return {"matrix": matrix, "vocab": vocab, "config": config,
            "sentences": sentences, "seconds": elapsed}


@pytest.fixture(scope="session")
def emotion_toy():
    """The 30-example six-class set trained to convergence."""
    examples = read_tsv(DATA_DIR / "emotion_toy.tsv")
    assert len(examples) == 30
    config = EmotionConfig(epochs=200, batch_size=8, learning_rate=1e-2,
                           hidden=24, embed_dim=16, seed=0)
    model, history = train_emotion(examples, config)
    return {"model": model, "history": history, "examples": examples,
            "config": config}

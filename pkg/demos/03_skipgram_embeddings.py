# Skip-gram embeddings with negative sampling on a synthetic corpus whose
# structure the vectors must recover: two token cliques that never mix.
import tempfile
from pathlib import Path

from versecraft.corpus import Vocab
from versecraft.embedding import (
    SkipGramConfig,
    cosine,
    ensure_word,
    load_embeddings,
    nearest,
    save_embeddings,
    train_skipgram,
)

vocab = Vocab(["山", "水", "风", "雨"])
sentences = []
for _ in range(60):
    sentences.append(vocab.encode(["山", "水"] * 3))   # clique one
    sentences.append(vocab.encode(["风", "雨"] * 3))   # clique two

config = SkipGramConfig(window=2, negatives=5, learning_rate=0.025,
                        epochs=15, seed=3, dim=50)
losses: list = []
matrix = train_skipgram(sentences, config, vocab, loss_log=losses)
print(f"trained {len(matrix)} x {matrix.dim} vectors; "
      f"loss {losses[0][1]:.3f} -> {losses[-1][1]:.3f}")

row = {w: matrix.rows[vocab.word2id[w]] for w in ("山", "水", "风")}
print(f"cos(山, 水) = {cosine(row['山'], row['水']):.3f}   (same clique)")
print(f"cos(山, 风) = {cosine(row['山'], row['风']):.3f}   (different cliques)")
print("nearest to 山:", nearest(matrix, "山", 3))

# Out-of-vocabulary injection: a fresh word gets a random in-bounds row and
# asking twice returns the same row.
before = len(matrix)
vec1 = ensure_word(matrix, "雪")
vec2 = ensure_word(matrix, "雪")
print(f"\nensure_word grew the vocab {before} -> {len(matrix)}; "
      f"stable across calls: {(vec1 == vec2).all()}")

path = Path(tempfile.mkdtemp()) / "vectors.txt"
save_embeddings(matrix, path)
reloaded = load_embeddings(path)
print(f"file round trip exact: {(reloaded.rows == matrix.rows).all()}")
print("file header:", path.read_text(encoding='utf-8').splitlines()[0])

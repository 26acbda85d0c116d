# Perplexity: the evaluation metric, shown on three models over one tiny
# pair set -- a uniform-logit reference (PP = vocabulary size), a fresh
# random model (near V), and an overfit model (near 1).
import tempfile
from pathlib import Path

from versecraft.corpus import Form, Poem, TrainingPair, build_vocab, write_pair_file
from versecraft.embedding import EmbeddingMatrix
from versecraft.evaluation import perplexity, sentence_log_prob
from versecraft.generator import TrainConfig, train_generator
from versecraft.neural import Seq2SeqModel

poem = Poem("静夜思", "李白", ("床前明月光", "疑是地上霜"), Form.FIVE)
pairs = [
    TrainingPair(tuple("月光"), (), tuple("床前明月光")),
    TrainingPair(tuple("霜"), tuple("床前明月光"), tuple("疑是地上霜")),
]
vocab = build_vocab([poem])
print(f"vocabulary size V = {len(vocab)}")

uniform = Seq2SeqModel.create(vocab, embed_dim=16, hidden=8, seed=0)
uniform.params["proj_w"][:] = 0.0
uniform.params["proj_b"][:] = 0.0
print("uniform-logit model:", perplexity(uniform, pairs))

untrained = Seq2SeqModel.create(vocab, embed_dim=16, hidden=8, seed=1)
print("untrained model:    ", perplexity(untrained, pairs))

workdir = Path(tempfile.mkdtemp())
write_pair_file(pairs, workdir / "pairs.txt")
embeddings = EmbeddingMatrix.random_init(vocab, dim=16, seed=7)
model, _, _ = train_generator(
    workdir / "pairs.txt", vocab, embeddings,
    TrainConfig(epochs=150, batch_size=2, learning_rate=5e-3, hidden=24, seed=11),
)
print("overfit model:      ", perplexity(model, pairs))

lp, n = sentence_log_prob(model, pairs[0])
print(f"\nper-sentence view of pair one: log P = {lp:.4f} over {n} tokens"
      f" (five characters plus the END step)")

# End-to-end generation: overfit the seq2seq model to the worked example,
# then reproduce it line by line with greedy decoding.
#
# The pipeline mirrors prediction for real corpora: keyword + empty preamble
# produce line one; keyword two plus the generated first line produce line
# two, and so on.
import tempfile
from pathlib import Path

from versecraft.corpus import Form, Poem, TrainingPair, build_vocab, write_pair_file
from versecraft.embedding import EmbeddingMatrix
from versecraft.generator import (
    GenerationPlan,
    TrainConfig,
    generate_poem,
    plan_keywords,
    train_generator,
)
from versecraft.keywords import fit_tfidf

poem = Poem("静夜思", "李白", ("床前明月光", "疑是地上霜"), Form.FIVE)
pairs = [
    TrainingPair(tuple("月光"), (), tuple("床前明月光")),
    TrainingPair(tuple("霜"), tuple("床前明月光"), tuple("疑是地上霜")),
]
workdir = Path(tempfile.mkdtemp())
pair_path = workdir / "pairs.txt"
write_pair_file(pairs, pair_path)

vocab = build_vocab([poem])
embeddings = EmbeddingMatrix.random_init(vocab, dim=32, seed=7)

config = TrainConfig(epochs=150, batch_size=2, learning_rate=5e-3,
                     hidden=32, seed=11)
model, history, _ = train_generator(pair_path, vocab, embeddings, config)
print(f"trained {config.epochs} epochs; "
      f"perplexity {history[0][2]:.2f} -> {history[-1][2]:.4f}")

plan = GenerationPlan(("月光", "霜"), Form.FIVE, 2)
for keyword, line in zip(plan.keywords, generate_poem(model, plan)):
    print(f"  {keyword:>2} -> {line}")

# Planning from user text instead of explicit keywords: the extractor picks
# keywords and the embedding supplies synonyms when the text is too short.
tfidf_model = fit_tfidf([list(line) for line in poem.lines])
auto = plan_keywords(list("明月光满地"), 2, tfidf_model, embeddings, form=Form.FIVE)
print("\nplanned from user text:", auto.keywords)
for line in generate_poem(model, auto):
    print("  ", line)

# The six-class emotion pipeline: clean, fit a sequence length, split
# stratified 80/20, train the LSTM classifier, inspect predictions.
from pathlib import Path

from versecraft.emotion import (
    LABELS,
    EmotionConfig,
    classify,
    clean_text,
    evaluate,
    fit_length,
    read_tsv,
    split_dataset,
    train_emotion,
)

data = Path(__file__).parent.parent / "tests" / "data" / "emotion_toy.tsv"
examples = read_tsv(data)
print(f"{len(examples)} examples across labels "
      f"{sorted({ex.label for ex in examples})} -> {LABELS}")

print("\ncleaning strips noise and stop words:")
raw = "开心!! 😀 的笑出声"
print(f"  {raw!r} -> {clean_text(raw)}")

print("fitted sequence length:", fit_length(examples))

train_set, test_set = split_dataset(examples, seed=0)
print(f"split: {len(train_set)} train / {len(test_set)} test (per-label "
      f"{sorted(sum(1 for ex in test_set if ex.label == l) for l in range(6))})")

config = EmotionConfig(epochs=200, batch_size=8, learning_rate=1e-2,
                       hidden=24, embed_dim=16, seed=0)
model, history = train_emotion(train_set, config)
print(f"training loss {history[0][1]:.3f} -> {history[-1][1]:.4f}")

train_accuracy, _ = evaluate(model, train_set)
accuracy, confusion = evaluate(model, test_set)
# At 24 training sentences the held-out score is mostly vocabulary overlap;
# the training accuracy shows the optimization itself converges.
print(f"training accuracy: {train_accuracy:.2f}   held-out accuracy: {accuracy:.2f}")
print("held-out confusion matrix (rows = true label):")
for row in confusion:
    print("  ", " ".join(f"{n:2d}" for n in row))

for ex in (train_set[5], train_set[20]):
    label, probs = classify(model, ex.text)
    print(f"\nclassify({''.join(ex.text)}) -> {label} ({LABELS[label]}), "
          f"p={probs[label]:.3f}, true label {ex.label}")

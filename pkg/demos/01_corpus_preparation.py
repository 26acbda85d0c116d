# Corpus preparation walkthrough: raw poem JSON -> normalized lines ->
# vocabulary -> keyword|preceding|target pairs -> padded batch.
import json
import tempfile
from pathlib import Path

from versecraft.corpus import (
    Form,
    build_training_pairs,
    build_vocab,
    classify_form,
    filter_form,
    load_corpus,
    pad_batch,
    write_pair_file,
)

# A miniature chinese-poetry style file: one five-character quatrain plus one
# seven-character poem that the five-character pipeline will reject.
records = [
    {"title": "静夜思", "author": "李白",
     "paragraphs": ["床前明月光，疑是地上霜。", "举头望明月，低头思故乡。"]},
    {"title": "早发白帝城", "author": "李白",
     "paragraphs": ["朝辞白帝彩云间，千里江陵一日还。"]},
]
workdir = Path(tempfile.mkdtemp())
raw = workdir / "poems.json"
raw.write_text(json.dumps(records, ensure_ascii=False), encoding="utf-8")

poems = load_corpus(raw)
print(f"loaded {len(poems)} poems")
for poem in poems:
    print(f"  {poem.title}: {len(poem.lines)} lines, form={classify_form(poem)}")

five = filter_form(poems, Form.FIVE)
print(f"\nkept {len(five)} five-character poem(s)")

vocab = build_vocab(five)
print(f"vocabulary: {len(vocab)} entries, first eight: {vocab.id2word[:8]}")

# Keywords normally come from the extraction module; here we hand-pick the
# paper's worked-example labels for the first two lines.
labels = {"床前明月光": "月光", "疑是地上霜": "霜",
          "举头望明月": "明月", "低头思故乡": "故乡"}
pairs = build_training_pairs(five[0], labels.__getitem__)
for pair in pairs:
    print("pair:", "".join(pair.keyword), "|", "".join(pair.preceding),
          "|", "".join(pair.target))

pair_path = workdir / "pairs.txt"
write_pair_file(pairs, pair_path)
print("\npair file:")
print(pair_path.read_text(encoding="utf-8"))

batch = pad_batch(pairs, vocab)
print("decoder input ids (START-prefixed, PAD-filled):")
print(batch.decoder_in_ids)
print("loss mask (1 exactly at non-PAD target positions):")
print(batch.loss_mask.astype(int))

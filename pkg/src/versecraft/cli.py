"""Command-line pipeline: prepare, train-embed, train-gen, train-emotion,
generate, eval, emotion.

Every command is deterministic given --seed. Exit codes: 0 success, 1 usage
error, 2 data/format error, 3 vocabulary hash mismatch. An optional config
file supplies key=value defaults (keys are the long option names with
underscores); explicit flags win over the config file.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, TypeVar

from . import corpus as corpus_mod
from . import emotion as emotion_mod
from .corpus import Form, Vocab, build_training_pairs, build_vocab, filter_form, \
    load_corpus, read_pair_file, write_pair_file
from .embedding import EmbeddingMatrix, SkipGramConfig, load_embeddings, \
    save_embeddings, train_skipgram
from .errors import CorpusError, FormatError, HashMismatchError, VersecraftError
from .evaluation import perplexity
from .generator import GenerationPlan, TrainConfig, generate_poem, plan_keywords, \
    train_generator, write_loss_log
from .keywords import TfidfModel, extract_keywords, fit_tfidf
from .neural.checkpoint import load_checkpoint, save_checkpoint
from .neural.seq2seq import Mode

T = TypeVar("T")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_HASH = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse default exits 2; we reserve that
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(VersecraftError):
    pass


def _read_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


class Settings:
    """Flag > config file > built-in default resolution."""

    def __init__(self, ns: argparse.Namespace) -> None:
        self.ns = ns
        self.config = _read_config(ns.config) if ns.config else {}

    def get(self, name: str, default: T | None = None,
            cast: Callable[[str], T] = str, required: bool = False) -> T | None:
        value = getattr(self.ns, name, None)
        if value is None and name in self.config:
            value = cast(self.config[name])
        if value is None:
            value = default
        if value is None and required:
            raise UsageError(f"missing required option --{name.replace('_', '-')}")
        return value


# ---------------------------------------------------------------------------
# Artifact loading with consistency checks
# ---------------------------------------------------------------------------


def _load_vocab(path: str) -> Vocab:
    return Vocab.load(path)


def _load_embeddings_checked(path: str, vocab: Vocab, seed: int = 42) -> EmbeddingMatrix:
    matrix = load_embeddings(path)
    if matrix.vocab.id2word[: len(vocab)] != vocab.id2word:
        raise HashMismatchError(
            f"{path}: embedding tokens do not match the vocabulary file"
        )
    matrix.seed = seed
    return matrix


# ---------------------------------------------------------------------------
# prepare
# ---------------------------------------------------------------------------


def cmd_prepare(settings: Settings) -> int:
    corpus_dir = Path(settings.get("corpus", required=True))
    form = Form.from_label(settings.get("form", required=True))
    out_dir = Path(settings.get("out", required=True))
    min_count = settings.get("min_count", 1, int)

    files = sorted(corpus_dir.glob("*.json"))
    if not files:
        raise CorpusError(f"{corpus_dir}: no .json corpus files")
    poems = []
    for path in files:
        poems.extend(load_corpus(path))
    kept = filter_form(poems, form)
    if not kept:
        raise CorpusError(
            f"no {form.label}-character poems among {len(poems)} loaded"
        )

    vocab = build_vocab(kept, min_count=min_count)
    line_docs = [list(line) for poem in kept for line in poem.lines]
    tfidf_model = fit_tfidf(line_docs)

    def keyword_of_line(line: str) -> str:
        found = extract_keywords(list(line), 1, tfidf_model)
        return found[0] if found else ""

    pairs = []
    for poem in kept:
        pairs.extend(build_training_pairs(poem, keyword_of_line))

    out_dir.mkdir(parents=True, exist_ok=True)
    vocab.save(out_dir / "vocab.txt")
    write_pair_file(pairs, out_dir / "pairs.txt")
    tfidf_model.save(out_dir / "tfidf.txt")
    summary = {
        "form": form.label,
        "poems": len(kept),
        "lines": len(line_docs),
        "pairs": len(pairs),
        "vocab_size": len(vocab),
    }
    (out_dir / "summary.json").write_text(
        json.dumps(summary, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# train-embed
# ---------------------------------------------------------------------------


def cmd_train_embed(settings: Settings) -> int:
    vocab = _load_vocab(settings.get("vocab", required=True))
    pair_path = settings.get("pairs", required=True)
    out_path = settings.get("out", required=True)
    config = SkipGramConfig(
        window=settings.get("window", 2, int),
        negatives=settings.get("negatives", 5, int),
        learning_rate=settings.get("lr", 0.025, float),
        epochs=settings.get("epochs", 15, int),
        seed=settings.get("seed", 42, int),
        dim=settings.get("dim", 300, int),
    )
    pairs = read_pair_file(pair_path)
    if not pairs:
        raise FormatError(f"{pair_path}: no pairs")
    sentences = []
    for pair in pairs:
        ids = [i for i in vocab.encode(pair.target) if i >= corpus_mod.NUM_SPECIALS]
        if ids:
            sentences.append(ids)
    loss_log: list[tuple[int, float]] = []
    matrix = train_skipgram(sentences, config, vocab, loss_log=loss_log)
    save_embeddings(matrix, out_path)
    log_path = settings.get("log", f"{out_path}.log")
    Path(log_path).write_text(
        "".join(f"{epoch}\t{loss!r}\n" for epoch, loss in loss_log), encoding="utf-8"
    )
    print(f"embeddings V={len(matrix)} D={matrix.dim} epochs={config.epochs}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# train-gen
# ---------------------------------------------------------------------------


def _mode_from_label(label: str) -> Mode:
    try:
        return {"attention": Mode.ATTENTION, "fixed-c": Mode.FIXED_C}[label]
    except KeyError:
        raise UsageError(f"unknown mode {label!r}, expected 'attention' or 'fixed-c'")


def cmd_train_gen(settings: Settings) -> int:
    vocab = _load_vocab(settings.get("vocab", required=True))
    embeddings = _load_embeddings_checked(settings.get("embed", required=True), vocab)
    pair_path = settings.get("pairs", required=True)
    out_path = settings.get("out", required=True)
    config = TrainConfig(
        epochs=settings.get("epochs", 50, int),
        batch_size=settings.get("batch_size", 32, int),
        learning_rate=settings.get("lr", 1e-3, float),
        clip_norm=settings.get("clip", 5.0, float),
        seed=settings.get("seed", 42, int),
        mode=_mode_from_label(settings.get("mode", "attention")),
        hidden=settings.get("hidden", 128, int),
        checkpoint_interval=settings.get("ckpt_interval", 10, int),
        checkpoint_dir=settings.get("ckpt_dir"),
        resume_from=settings.get("resume"),
    )
    model, history, optimizer = train_generator(pair_path, vocab, embeddings, config)
    save_checkpoint(out_path, model, vocab.content_hash(),
                    optimizer=optimizer, epoch=config.epochs)
    log_path = settings.get("log", f"{out_path}.log")
    write_loss_log(history, log_path)
    if history:
        epoch, loss, pp = history[-1]
        print(f"epoch {epoch} loss {loss!r} pp {pp!r}")
    else:
        print("no epochs trained")
    return EXIT_OK


# ---------------------------------------------------------------------------
# train-emotion
# ---------------------------------------------------------------------------


def cmd_train_emotion(settings: Settings) -> int:
    data_path = settings.get("data", required=True)
    out_path = settings.get("out", required=True)
    config = emotion_mod.EmotionConfig(
        epochs=settings.get("epochs", 100, int),
        batch_size=settings.get("batch_size", 16, int),
        learning_rate=settings.get("lr", 1e-2, float),
        hidden=settings.get("hidden", 64, int),
        embed_dim=settings.get("dim", 300, int),
        seed=settings.get("seed", 42, int),
    )
    shared = None
    embed_path = settings.get("embed")
    if embed_path:
        shared = load_embeddings(embed_path)
        if shared.dim != config.embed_dim:
            raise FormatError(
                f"{embed_path}: dimension {shared.dim} != --dim {config.embed_dim}"
            )
    examples = emotion_mod.read_tsv(data_path)
    if not examples:
        raise FormatError(f"{data_path}: no usable examples")
    train_set, test_set = emotion_mod.split_dataset(examples, config.seed)
    model, history = emotion_mod.train_emotion(train_set, config, shared=shared)
    emotion_mod.save_emotion_model(model, out_path)
    log_path = settings.get("log", f"{out_path}.log")
    Path(log_path).write_text(
        "".join(f"{epoch}\t{loss!r}\n" for epoch, loss in history), encoding="utf-8"
    )
    accuracy, _ = emotion_mod.evaluate(model, test_set)
    print(json.dumps(
        {"train": len(train_set), "test": len(test_set), "test_accuracy": accuracy},
        sort_keys=True,
    ))
    return EXIT_OK


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def cmd_generate(settings: Settings) -> int:
    vocab = _load_vocab(settings.get("vocab", required=True))
    seed = settings.get("seed", 42, int)
    embeddings = _load_embeddings_checked(
        settings.get("embed", required=True), vocab, seed=seed
    )
    tfidf_model = TfidfModel.load(settings.get("tfidf", required=True))
    model, _, _ = load_checkpoint(settings.get("ckpt", required=True), vocab)
    form = Form.from_label(settings.get("form", "five"))
    n_lines = settings.get("lines", 4, int)

    keywords_arg = settings.get("keywords")
    if keywords_arg:
        keywords = tuple(k for k in keywords_arg.split(",") if k)
        if not keywords:
            raise UsageError("--keywords must name at least one keyword")
        plan = GenerationPlan(keywords=keywords, form=form, n_lines=len(keywords))
    else:
        text = settings.get("text", required=True)
        tokens = emotion_mod.clean_text(text)
        if not tokens:
            raise CorpusError("input text is empty after cleaning")
        plan = plan_keywords(tokens, n_lines, tfidf_model, embeddings, form=form)

    lines = generate_poem(model, plan)
    if getattr(settings.ns, "json", False):
        print(json.dumps(
            {"keywords": list(plan.keywords), "lines": lines},
            ensure_ascii=False, sort_keys=True,
        ))
    else:
        print("keywords: " + " ".join(plan.keywords))
        for line in lines:
            print(line)
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval / emotion
# ---------------------------------------------------------------------------


def cmd_eval(settings: Settings) -> int:
    vocab = _load_vocab(settings.get("vocab", required=True))
    model, _, _ = load_checkpoint(settings.get("ckpt", required=True), vocab)
    pairs = read_pair_file(settings.get("pairs", required=True))
    if not pairs:
        raise FormatError("no pairs to evaluate")
    report = perplexity(model, pairs)
    print(report)
    print(report.to_json())
    return EXIT_OK


def cmd_emotion(settings: Settings) -> int:
    model = emotion_mod.load_emotion_model(settings.get("model", required=True))
    text = settings.get("text")
    eval_path = settings.get("eval")
    if (text is None) == (eval_path is None):
        raise UsageError("exactly one of --text or --eval is required")
    if text is not None:
        label, probs = emotion_mod.classify(model, text)
        print(f"label={label} name={emotion_mod.LABELS[label]}")
        print("probs=" + " ".join(repr(float(p)) for p in probs))
    else:
        examples = emotion_mod.read_tsv(eval_path)
        if not examples:
            raise FormatError(f"{eval_path}: no usable examples")
        accuracy, confusion = emotion_mod.evaluate(model, examples)
        print(json.dumps(
            {"accuracy": accuracy, "confusion": confusion.tolist()}, sort_keys=True
        ))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="versecraft", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name: str, handler, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        p.add_argument("--config", help="key=value defaults file")
        p.add_argument("--seed", type=int, help="global random seed (default 42)")
        return p

    p = add("prepare", cmd_prepare, "normalize a corpus into vocab/pair/tfidf files")
    p.add_argument("--corpus", help="directory of chinese-poetry JSON files")
    p.add_argument("--form", choices=["five", "seven"], help="poem form to keep")
    p.add_argument("--out", help="output directory")
    p.add_argument("--min-count", dest="min_count", type=int,
                   help="vocabulary frequency threshold (default 1)")

    p = add("train-embed", cmd_train_embed, "train skip-gram embeddings")
    p.add_argument("--vocab", help="vocab file from prepare")
    p.add_argument("--pairs", help="pair file from prepare")
    p.add_argument("--out", help="embedding file to write")
    p.add_argument("--dim", type=int, help="vector dimension (default 300)")
    p.add_argument("--window", type=int, help="context window (default 2)")
    p.add_argument("--negatives", type=int, help="noise samples per pair (default 5)")
    p.add_argument("--lr", type=float, help="starting learning rate (default 0.025)")
    p.add_argument("--epochs", type=int, help="training epochs (default 15)")
    p.add_argument("--log", help="loss log path (default <out>.log)")

    p = add("train-gen", cmd_train_gen, "train the seq2seq generator")
    p.add_argument("--pairs", help="pair file")
    p.add_argument("--vocab", help="vocab file")
    p.add_argument("--embed", help="embedding file")
    p.add_argument("--out", help="checkpoint to write")
    p.add_argument("--mode", choices=["attention", "fixed-c"],
                   help="decoder conditioning (default attention)")
    p.add_argument("--epochs", type=int, help="total epochs (default 50)")
    p.add_argument("--batch-size", dest="batch_size", type=int,
                   help="mini-batch size (default 32)")
    p.add_argument("--lr", type=float, help="Adam learning rate (default 1e-3)")
    p.add_argument("--clip", type=float, help="gradient clip norm (default 5.0)")
    p.add_argument("--hidden", type=int, help="LSTM width per direction (default 128)")
    p.add_argument("--ckpt-interval", dest="ckpt_interval", type=int,
                   help="epochs between periodic checkpoints (default 10)")
    p.add_argument("--ckpt-dir", dest="ckpt_dir", help="periodic checkpoint directory")
    p.add_argument("--resume", help="checkpoint to resume from")
    p.add_argument("--log", help="loss log path (default <out>.log)")

    p = add("train-emotion", cmd_train_emotion, "train the emotion classifier")
    p.add_argument("--data", help="label<TAB>text TSV file")
    p.add_argument("--out", help="model file to write")
    p.add_argument("--embed", help="optional embedding file for initialization")
    p.add_argument("--epochs", type=int, help="training epochs (default 100)")
    p.add_argument("--batch-size", dest="batch_size", type=int,
                   help="mini-batch size (default 16)")
    p.add_argument("--lr", type=float, help="Adam learning rate (default 1e-2)")
    p.add_argument("--hidden", type=int, help="LSTM width (default 64)")
    p.add_argument("--dim", type=int, help="embedding dimension (default 300)")
    p.add_argument("--log", help="loss log path (default <out>.log)")

    p = add("generate", cmd_generate, "generate a poem from user text")
    p.add_argument("--ckpt", help="generator checkpoint")
    p.add_argument("--vocab", help="vocab file")
    p.add_argument("--embed", help="embedding file")
    p.add_argument("--tfidf", help="tfidf model file")
    p.add_argument("--text", help="user text to plan keywords from")
    p.add_argument("--lines", type=int, help="lines to generate (default 4)")
    p.add_argument("--form", choices=["five", "seven"], help="poem form (default five)")
    p.add_argument("--keywords", help="comma-separated keywords bypassing planning")
    p.add_argument("--json", action="store_true", help="machine-readable output")

    p = add("eval", cmd_eval, "perplexity of a checkpoint over a pair file")
    p.add_argument("--ckpt", help="generator checkpoint")
    p.add_argument("--vocab", help="vocab file")
    p.add_argument("--pairs", help="pair file to evaluate")

    p = add("emotion", cmd_emotion, "classify text or evaluate a TSV test set")
    p.add_argument("--model", help="emotion model file")
    p.add_argument("--text", help="text to classify")
    p.add_argument("--eval", help="label<TAB>text TSV to score")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if not getattr(ns, "handler", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        settings = Settings(ns)
        return ns.handler(settings)
    except UsageError as exc:
        print(f"versecraft: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HashMismatchError as exc:
        print(f"versecraft: vocabulary mismatch: {exc}", file=sys.stderr)
        return EXIT_HASH
    except (CorpusError, FormatError, ValueError, OSError) as exc:
        print(f"versecraft: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

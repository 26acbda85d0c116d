"""Corpus ingestion: poem normalization, vocabulary, training pairs, batching.

Poems are tokenized at character level. Lines are obtained by splitting
paragraph strings on Chinese clause punctuation; a poem is kept for training
only if every line has exactly five or exactly seven characters.
"""
from __future__ import annotations

import hashlib
import json
import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import CorpusError, FormatError

log = logging.getLogger(__name__)

PAD_TOKEN = "<PAD>"
UNK_TOKEN = "<UNK>"
START_TOKEN = "<START>"
END_TOKEN = "<END>"
SPECIAL_TOKENS = (PAD_TOKEN, UNK_TOKEN, START_TOKEN, END_TOKEN)

PAD_ID, UNK_ID, START_ID, END_ID = 0, 1, 2, 3
NUM_SPECIALS = 4

# Clause-level punctuation that terminates a line. The corpus files also use
# 、 and ； inside longer paragraphs; treating them as line breaks keeps the
# five/seven length invariant checkable.
LINE_SPLIT_CHARS = "，。？！、；"

# Joins earlier lines when forming the "preceding text" of a training pair.
LINE_SEPARATOR = "，"


class Form(Enum):
    """Poem form; the value is the required per-line character count."""

    FIVE = 5
    SEVEN = 7

    @property
    def label(self) -> str:
        return "five" if self is Form.FIVE else "seven"

    @classmethod
    def from_label(cls, label: str) -> "Form":
        try:
            return {"five": cls.FIVE, "seven": cls.SEVEN}[label]
        except KeyError:
            raise ValueError(f"unknown form {label!r}, expected 'five' or 'seven'")


@dataclass(frozen=True)
class Poem:
    title: str
    author: str
    lines: tuple[str, ...]
    form: Form | None = None


@dataclass(frozen=True)
class TrainingPair:
    """One keyword|preceding|target record.

    All three fields are character-token tuples; ``preceding`` includes the
    LINE_SEPARATOR tokens between earlier lines and is empty for the first
    line of a poem.
    """

    keyword: tuple[str, ...]
    preceding: tuple[str, ...]
    target: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.keyword:
            raise ValueError("training pair keyword must be non-empty")
        if not self.target:
            raise ValueError("training pair target must be non-empty")


class Vocab:
    """Bidirectional token<->id map with four reserved leading specials."""

    def __init__(self, content_tokens: Iterable[str] = ()) -> None:
        self.id2word: list[str] = list(SPECIAL_TOKENS)
        self.word2id: dict[str, int] = {w: i for i, w in enumerate(self.id2word)}
        for tok in content_tokens:
            self.add(tok)

    def __len__(self) -> int:
        return len(self.id2word)

    def __contains__(self, token: str) -> bool:
        return token in self.word2id

    def add(self, token: str) -> int:
        """Append a token if new; return its id either way."""
        if token in self.word2id:
            return self.word2id[token]
        idx = len(self.id2word)
        self.id2word.append(token)
        self.word2id[token] = idx
        return idx

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.word2id.get(t, UNK_ID) for t in tokens]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.id2word[i] for i in ids]

    def copy(self) -> "Vocab":
        return Vocab(self.id2word[NUM_SPECIALS:])

    # -- persistence: one token per line, line number = id -------------------

    def file_bytes(self) -> bytes:
        return ("\n".join(self.id2word) + "\n").encode("utf-8")

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.file_bytes())

    @classmethod
    def load(cls, path: str | Path) -> "Vocab":
        text = Path(path).read_text(encoding="utf-8")
        tokens = text.split("\n")
        if tokens and tokens[-1] == "":
            tokens = tokens[:-1]
        if tuple(tokens[:NUM_SPECIALS]) != SPECIAL_TOKENS:
            raise FormatError(
                f"{path}: first four vocab entries must be "
                + ", ".join(SPECIAL_TOKENS)
            )
        if len(set(tokens)) != len(tokens):
            raise FormatError(f"{path}: duplicate vocab entries")
        return cls(tokens[NUM_SPECIALS:])

    def content_hash(self) -> str:
        """Hash carried by downstream artifacts to detect vocab/model skew."""
        return hashlib.sha256(self.file_bytes()).hexdigest()


def vocab_file_hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# Loading and normalizing raw poem JSON
# ---------------------------------------------------------------------------


def _split_lines(paragraph: str) -> list[str]:
    lines: list[str] = []
    buf: list[str] = []
    for ch in paragraph:
        if ch in LINE_SPLIT_CHARS:
            if buf:
                lines.append("".join(buf))
                buf = []
        elif ch.isspace():
            continue
        else:
            buf.append(ch)
    if buf:
        lines.append("".join(buf))
    return lines


def load_corpus(path: str | Path) -> list[Poem]:
    """Read one chinese-poetry style JSON file into normalized poems.

    The file must hold a JSON array of objects with a ``paragraphs`` list of
    strings. Paragraphs are split into lines on clause punctuation, empty
    lines are dropped, and records without surviving lines are dropped.
    Records lacking ``paragraphs`` are skipped with a warning.
    """
    raw = Path(path).read_bytes()
    try:
        records = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise CorpusError(f"{path}: not UTF-8 at byte {exc.start}") from exc
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path}: JSON parse error at byte {exc.pos}") from exc
    if not isinstance(records, list):
        raise CorpusError(f"{path}: expected a JSON array of poem records")

    poems: list[Poem] = []
    skipped = 0
    for rec in records:
        if not isinstance(rec, dict) or not isinstance(rec.get("paragraphs"), list):
            skipped += 1
            continue
        lines: list[str] = []
        for para in rec["paragraphs"]:
            if isinstance(para, str):
                lines.extend(_split_lines(para))
        if not lines:
            continue
        poems.append(
            Poem(
                title=str(rec.get("title", "")),
                author=str(rec.get("author", "")),
                lines=tuple(lines),
            )
        )
    if skipped:
        log.warning("%s: skipped %d records without a paragraphs array", path, skipped)
    return poems


def classify_form(poem: Poem) -> Form | None:
    """Five if every line has 5 characters, Seven if 7, else None (rejected)."""
    lengths = {len(line) for line in poem.lines}
    if lengths == {5}:
        return Form.FIVE
    if lengths == {7}:
        return Form.SEVEN
    return None


def filter_form(poems: Iterable[Poem], form: Form) -> list[Poem]:
    """Keep poems of the requested form, with the form field filled in."""
    kept = []
    for poem in poems:
        if classify_form(poem) is form:
            kept.append(Poem(poem.title, poem.author, poem.lines, form))
    return kept


# ---------------------------------------------------------------------------
# Vocabulary and training pairs
# ---------------------------------------------------------------------------


def build_vocab(poems: Sequence[Poem], min_count: int = 1) -> Vocab:
    """Character vocabulary ordered by descending frequency, then codepoint."""
    if not poems:
        raise ValueError("cannot build a vocabulary from an empty poem list")
    counts: Counter[str] = Counter()
    for poem in poems:
        for line in poem.lines:
            counts.update(line)
    kept = sorted(
        (tok for tok, n in counts.items() if n >= min_count),
        key=lambda tok: (-counts[tok], tok),
    )
    return Vocab(kept)


def build_training_pairs(
    poem: Poem, keyword_of_line: Callable[[str], str]
) -> list[TrainingPair]:
    """One pair per line: (keyword, all prior lines joined by '，', the line).

    Lines whose keyword function returns an empty string are skipped with a
    warning; they still contribute to the preceding text of later pairs.
    """
    pairs: list[TrainingPair] = []
    preceding: list[str] = []
    for line in poem.lines:
        keyword = keyword_of_line(line)
        if keyword:
            pairs.append(
                TrainingPair(
                    keyword=tuple(keyword),
                    preceding=tuple(preceding),
                    target=tuple(line),
                )
            )
        else:
            log.warning("no keyword for line %r; line skipped", line)
        if preceding:
            preceding.append(LINE_SEPARATOR)
        preceding.extend(line)
    return pairs


# ---------------------------------------------------------------------------
# Pair file: one "keyword|preceding|target" record per line
# ---------------------------------------------------------------------------


def write_pair_file(pairs: Iterable[TrainingPair], path: str | Path) -> None:
    out_lines = []
    for pair in pairs:
        fields = ["".join(pair.keyword), "".join(pair.preceding), "".join(pair.target)]
        for text in fields:
            if "|" in text or "\n" in text:
                raise ValueError(f"token stream {text!r} contains '|' or newline")
        out_lines.append("|".join(fields))
    Path(path).write_text("\n".join(out_lines) + ("\n" if out_lines else ""), encoding="utf-8")


def read_pair_file(path: str | Path) -> list[TrainingPair]:
    pairs: list[TrainingPair] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("|")
            if len(fields) != 3:
                raise FormatError(
                    f"{path}:{lineno}: expected 3 '|'-separated fields, got {len(fields)}"
                )
            keyword, preceding, target = fields
            pairs.append(
                TrainingPair(tuple(keyword), tuple(preceding), tuple(target))
            )
    return pairs


# ---------------------------------------------------------------------------
# Batching
# ---------------------------------------------------------------------------


@dataclass
class Batch:
    """Padded id matrices for one mini-batch.

    Decoder input rows are START-prefixed targets, decoder target rows are
    END-suffixed targets, and loss_mask is 1 exactly where decoder_target_ids
    is not PAD. Each field is padded to its own per-batch maximum.
    """

    keyword_ids: np.ndarray        # (B, Lk) int64
    context_ids: np.ndarray        # (B, Lc) int64
    decoder_in_ids: np.ndarray     # (B, Lt+1) int64
    decoder_target_ids: np.ndarray # (B, Lt+1) int64
    keyword_lengths: np.ndarray    # (B,) int64
    context_lengths: np.ndarray    # (B,) int64
    target_lengths: np.ndarray     # (B,) int64, content tokens only
    loss_mask: np.ndarray          # (B, Lt+1) float64 in {0, 1}

    @property
    def size(self) -> int:
        return self.keyword_ids.shape[0]


def _pad_rows(rows: list[list[int]], width: int) -> np.ndarray:
    out = np.full((len(rows), width), PAD_ID, dtype=np.int64)
    for i, row in enumerate(rows):
        out[i, : len(row)] = row
    return out


def pad_batch(pairs: Sequence[TrainingPair], vocab: Vocab) -> Batch:
    """Encode and pad a batch. Empty preceding text becomes a lone START."""
    if not pairs:
        raise ValueError("cannot batch an empty pair list")
    kw_rows = [vocab.encode(p.keyword) for p in pairs]
    ctx_rows = [vocab.encode(p.preceding) if p.preceding else [START_ID] for p in pairs]
    tgt_rows = [vocab.encode(p.target) for p in pairs]

    lk = max(len(r) for r in kw_rows)
    lc = max(len(r) for r in ctx_rows)
    lt = max(len(r) for r in tgt_rows)

    dec_in = [[START_ID] + r for r in tgt_rows]
    dec_tgt = [r + [END_ID] for r in tgt_rows]

    batch = Batch(
        keyword_ids=_pad_rows(kw_rows, lk),
        context_ids=_pad_rows(ctx_rows, lc),
        decoder_in_ids=_pad_rows(dec_in, lt + 1),
        decoder_target_ids=_pad_rows(dec_tgt, lt + 1),
        keyword_lengths=np.array([len(r) for r in kw_rows], dtype=np.int64),
        context_lengths=np.array([len(r) for r in ctx_rows], dtype=np.int64),
        target_lengths=np.array([len(r) for r in tgt_rows], dtype=np.int64),
        loss_mask=np.zeros((len(pairs), lt + 1), dtype=np.float64),
    )
    for i, row in enumerate(tgt_rows):
        batch.loss_mask[i, : len(row) + 1] = 1.0
    return batch

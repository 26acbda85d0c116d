"""Binary artifact container: one JSON header line, then raw little-endian
float32 blocks laid out per the header's manifest.

The manifest maps array name -> [shape, byte offset], offsets counted from
the first byte after the header's terminating newline. Header keys and
manifest entries are written sorted, so writing the result of a load
reproduces the original file byte for byte.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..corpus import Vocab
from ..errors import FormatError, HashMismatchError
from .optim import AdamState
from .seq2seq import Mode, Seq2SeqModel

CKPT_MAGIC = "versecraft-ckpt v1"


def save_blob(path: str | Path, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    """Write meta plus arrays; meta must not contain a 'manifest' key."""
    if "manifest" in meta:
        raise ValueError("meta must not define its own manifest")
    manifest: dict[str, list] = {}
    blobs: list[bytes] = []
    offset = 0
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name], dtype="<f4")
        manifest[name] = [list(arr.shape), offset]
        raw = arr.tobytes()
        blobs.append(raw)
        offset += len(raw)
    header = dict(meta)
    header["manifest"] = manifest
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(header_bytes)
        fh.write(b"\n")
        for raw in blobs:
            fh.write(raw)


def load_blob(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    raw = Path(path).read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise FormatError(f"{path}: missing header line")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: bad JSON header: {exc}") from exc
    if header.get("format") != CKPT_MAGIC:
        raise FormatError(f"{path}: unexpected format {header.get('format')!r}")
    body = raw[newline + 1 :]
    arrays: dict[str, np.ndarray] = {}
    for name, (shape, offset) in header["manifest"].items():
        count = int(np.prod(shape)) if shape else 1
        end = offset + 4 * count
        if end > len(body):
            raise FormatError(f"{path}: array {name} overruns the file")
        arrays[name] = np.frombuffer(
            body[offset:end], dtype="<f4"
        ).reshape(shape).copy()
    return header, arrays


# ---------------------------------------------------------------------------
# Seq2seq checkpoints
# ---------------------------------------------------------------------------


def save_checkpoint(
    path: str | Path,
    model: Seq2SeqModel,
    vocab_hash: str,
    optimizer: AdamState | None = None,
    epoch: int = 0,
) -> None:
    arrays = dict(model.params)
    extra: dict = {"epoch": epoch}
    if optimizer is not None:
        for name, arr in optimizer.m.items():
            arrays[f"adam.m.{name}"] = arr
        for name, arr in optimizer.v.items():
            arrays[f"adam.v.{name}"] = arr
        extra["adam_step"] = optimizer.step
        extra["learning_rate"] = optimizer.learning_rate
    meta = {
        "format": CKPT_MAGIC,
        "mode": model.mode.value,
        "dims": {
            "vocab": model.vocab_size,
            "embed": model.embed_dim,
            "hidden": model.hidden,
        },
        "vocab_hash": vocab_hash,
        "extra": extra,
    }
    save_blob(path, meta, arrays)


def load_checkpoint(
    path: str | Path, vocab: Vocab
) -> tuple[Seq2SeqModel, AdamState | None, dict]:
    """Rebuild a model (float32 parameters) from a checkpoint, verifying that
    it was trained against this exact vocabulary."""
    header, arrays = load_blob(path)
    if header.get("vocab_hash") != vocab.content_hash():
        raise HashMismatchError(
            f"{path}: checkpoint vocab hash {header.get('vocab_hash')!r} does not "
            "match the supplied vocabulary"
        )
    dims = header["dims"]
    if dims["vocab"] != len(vocab):
        raise HashMismatchError(
            f"{path}: checkpoint vocab size {dims['vocab']} != {len(vocab)}"
        )
    params = {k: v for k, v in arrays.items() if not k.startswith("adam.")}
    model = Seq2SeqModel(
        vocab=vocab,
        mode=Mode(header["mode"]),
        embed_dim=int(dims["embed"]),
        hidden=int(dims["hidden"]),
        params=params,
    )
    extra = header.get("extra", {})
    optimizer = None
    if "adam_step" in extra:
        optimizer = AdamState(
            learning_rate=float(extra.get("learning_rate", 1e-3)),
            step=int(extra["adam_step"]),
            m={k[len("adam.m."):]: v for k, v in arrays.items() if k.startswith("adam.m.")},
            v={k[len("adam.v."):]: v for k, v in arrays.items() if k.startswith("adam.v.")},
        )
    return model, optimizer, extra

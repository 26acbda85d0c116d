"""Shared exception types.

The CLI maps these onto exit codes: usage errors exit 1, CorpusError and
FormatError exit 2, HashMismatchError exits 3.
"""


class VersecraftError(Exception):
    pass


class CorpusError(VersecraftError):
    """Raw corpus input could not be parsed."""


class FormatError(VersecraftError):
    """An artifact file (pair file, vocab, embedding, checkpoint) is malformed."""


class HashMismatchError(VersecraftError):
    """An artifact was built against a different vocabulary."""

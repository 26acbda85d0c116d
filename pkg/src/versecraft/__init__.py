"""versecraft: keyword-conditioned classical Chinese poetry generation.

Pipeline pieces: corpus preparation (five/seven-character lines, vocab,
keyword|preceding|target pairs), skip-gram embeddings, TF-IDF/TextRank
keyword extraction, a dual-BiLSTM encoder with an attention (or fixed-vector)
LSTM decoder trained by exact hand-written backprop with Adam, greedy
line-by-line generation, perplexity evaluation, and a six-class LSTM emotion
classifier. Everything numerical is plain numpy, so every gradient and
formula is independently checkable.
"""

from . import corpus, embedding, emotion, evaluation, generator, keywords, neural
from .errors import CorpusError, FormatError, HashMismatchError, VersecraftError

__version__ = "0.1.0"

__all__ = [
    "CorpusError",
    "FormatError",
    "HashMismatchError",
    "VersecraftError",
    "corpus",
    "embedding",
    "emotion",
    "evaluation",
    "generator",
    "keywords",
    "neural",
]

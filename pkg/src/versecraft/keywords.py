"""Unsupervised keyword extraction: TF-IDF scoring and TextRank over a
co-occurrence graph, plus the combined policy used to label training lines
and to plan generation from user text.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import SPECIAL_TOKENS
from .errors import FormatError

# Small built-in list of Chinese function words. Override by loading a custom
# list with load_stopwords().
STOP_WORDS = frozenset(
    "的了是在我有和就不人都一上也很到说要去你"
)

DEFAULT_DAMPING = 0.85
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 100
DEFAULT_WINDOW = 2


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One stop word per line, UTF-8; blank lines ignored."""
    words = [w.strip() for w in Path(path).read_text(encoding="utf-8").splitlines()]
    return frozenset(w for w in words if w)


# ---------------------------------------------------------------------------
# TF-IDF
# ---------------------------------------------------------------------------


@dataclass
class TfidfModel:
    """Document frequencies over a corpus of C documents."""

    corpus_size: int
    doc_freq: dict[str, int]

    def save(self, path: str | Path) -> None:
        lines = [f"C={self.corpus_size}"]
        for tok in sorted(self.doc_freq):
            lines.append(f"{tok}\t{self.doc_freq[tok]}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TfidfModel":
        text = Path(path).read_text(encoding="utf-8").splitlines()
        if not text or not text[0].startswith("C="):
            raise FormatError(f"{path}: missing C=<int> header")
        try:
            corpus_size = int(text[0][2:])
        except ValueError:
            raise FormatError(f"{path}: bad corpus size in header {text[0]!r}")
        doc_freq: dict[str, int] = {}
        for lineno, line in enumerate(text[1:], start=2):
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected token<TAB>count")
            doc_freq[parts[0]] = int(parts[1])
        return cls(corpus_size, doc_freq)


def fit_tfidf(documents: Sequence[Sequence[str]]) -> TfidfModel:
    """Count, per token, the number of documents containing it at least once."""
    if not documents:
        raise ValueError("cannot fit TF-IDF on an empty document list")
    doc_freq: Counter[str] = Counter()
    for doc in documents:
        doc_freq.update(set(doc))
    return TfidfModel(corpus_size=len(documents), doc_freq=dict(doc_freq))


def tfidf(model: TfidfModel, doc: Sequence[str], word: str) -> float:
    """TF * IDF with TF = count/doc_len and IDF = log2(C/B).

    A word unseen in the fitted corpus is treated as occurring in one
    document (maximal discrimination) instead of dividing by zero.
    """
    if not doc:
        raise ValueError("document must be non-empty")
    a = sum(1 for tok in doc if tok == word)
    if a == 0:
        return 0.0
    tf = a / len(doc)
    b = model.doc_freq.get(word, 1)
    idf = math.log2(model.corpus_size / b)
    return tf * idf


def extract_tfidf(model: TfidfModel, doc: Sequence[str], k: int) -> list[str]:
    """Top-k distinct doc tokens by TF-IDF, ties broken by first occurrence."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not doc:
        return []
    seen: list[str] = []
    for tok in doc:
        if tok not in seen:
            seen.append(tok)
    ranked = sorted(seen, key=lambda tok: -tfidf(model, doc, tok))
    return ranked[:k]


# ---------------------------------------------------------------------------
# TextRank
# ---------------------------------------------------------------------------


class CoocGraph:
    """Undirected weighted co-occurrence graph.

    Nodes are kept in insertion order; edges are symmetric and self-edges are
    forbidden. Isolated nodes are allowed (they arise in hand-built graphs;
    build_cooc_graph only creates nodes that participate in an edge).
    """

    def __init__(self) -> None:
        self.nodes: list[str] = []
        self.adj: dict[str, dict[str, float]] = {}

    def add_node(self, token: str) -> None:
        if token not in self.adj:
            self.nodes.append(token)
            self.adj[token] = {}

    def add_edge(self, a: str, b: str, weight: float = 1.0) -> None:
        if a == b:
            raise ValueError("self-edges are not allowed")
        self.add_node(a)
        self.add_node(b)
        self.adj[a][b] = self.adj[a].get(b, 0.0) + weight
        self.adj[b][a] = self.adj[b].get(a, 0.0) + weight

    def weight(self, a: str, b: str) -> float:
        return self.adj.get(a, {}).get(b, 0.0)

    @property
    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.adj.values()) // 2


def build_cooc_graph(doc: Sequence[str], window: int = DEFAULT_WINDOW) -> CoocGraph:
    """Add weight 1 between the distinct tokens of every position pair within
    the window. Identical tokens never form an edge."""
    if window < 1:
        raise ValueError("window must be >= 1")
    graph = CoocGraph()
    for i, tok_i in enumerate(doc):
        for j in range(i + 1, min(i + window + 1, len(doc))):
            tok_j = doc[j]
            if tok_i != tok_j:
                graph.add_edge(tok_i, tok_j, 1.0)
    return graph


@dataclass
class RankScores:
    scores: dict[str, float]
    iterations: int
    converged: bool


def textrank_scores(
    graph: CoocGraph,
    d: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RankScores:
    """Synchronous (Jacobi) iteration of the weighted voting recurrence.

    Every score starts at 1; a node's new score is (1-d) plus d times the
    weight-normalized votes of its neighbours. Isolated nodes converge to
    exactly 1-d. Raises on an empty graph.
    """
    if not graph.nodes:
        raise ValueError("graph must be non-empty")
    if not (0.0 < d < 1.0):
        raise ValueError("damping factor must lie in (0, 1)")
    out_weight = {node: sum(graph.adj[node].values()) for node in graph.nodes}
    scores = {node: 1.0 for node in graph.nodes}
    iterations = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        new_scores = {}
        for node in graph.nodes:
            vote = 0.0
            for nbr, w in graph.adj[node].items():
                if out_weight[nbr] > 0.0:
                    vote += w / out_weight[nbr] * scores[nbr]
            new_scores[node] = (1.0 - d) + d * vote
        delta = max(abs(new_scores[n] - scores[n]) for n in graph.nodes)
        scores = new_scores
        if delta < tol:
            converged = True
            break
    return RankScores(scores=scores, iterations=iterations, converged=converged)


def extract_textrank(
    doc: Sequence[str],
    window: int = DEFAULT_WINDOW,
    d: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    k: int = 1,
) -> list[str]:
    """Top-k doc tokens by TextRank score, ties broken by first occurrence.

    Only tokens that co-occur with another token enter the graph, so a doc
    with no co-occurring pairs yields an empty list.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not doc:
        return []
    graph = build_cooc_graph(doc, window)
    if not graph.nodes:
        return []
    ranked = textrank_scores(graph, d=d, tol=tol, max_iter=max_iter)
    first_pos = {}
    for i, tok in enumerate(doc):
        first_pos.setdefault(tok, i)
    order = sorted(graph.nodes, key=lambda tok: (-ranked.scores[tok], first_pos[tok]))
    return order[:k]


# ---------------------------------------------------------------------------
# Combined extraction policy
# ---------------------------------------------------------------------------


def extract_keywords(
    doc: Sequence[str],
    k: int,
    tfidf_model: TfidfModel | None = None,
    stopwords: frozenset[str] = STOP_WORDS,
    window: int = DEFAULT_WINDOW,
    d: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> list[str]:
    """TextRank ranking first; TF-IDF fills any remaining slots.

    Stop words and special tokens never appear in the result. Without a
    fitted TF-IDF model the fill ranking degrades to within-doc frequency,
    which is the same ordering with every document frequency treated as 1.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    filtered = [t for t in doc if t not in stopwords and t not in SPECIAL_TOKENS]
    if not filtered:
        return []
    chosen = extract_textrank(filtered, window=window, d=d, tol=tol,
                              max_iter=max_iter, k=k)
    if len(chosen) < k:
        if tfidf_model is not None:
            fill = extract_tfidf(tfidf_model, filtered, k)
        else:
            counts = Counter(filtered)
            first_pos = {}
            for i, tok in enumerate(filtered):
                first_pos.setdefault(tok, i)
            fill = sorted(counts, key=lambda tok: (-counts[tok], first_pos[tok]))[:k]
        for tok in fill:
            if tok not in chosen:
                chosen.append(tok)
                if len(chosen) == k:
                    break
    return chosen[:k]

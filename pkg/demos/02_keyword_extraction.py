# Keyword extraction: TF-IDF scoring, the TextRank co-occurrence graph, and
# the combined policy used to label lines and plan poems.
import math

from versecraft.keywords import (
    build_cooc_graph,
    extract_keywords,
    extract_textrank,
    extract_tfidf,
    fit_tfidf,
    textrank_scores,
    tfidf,
)

lines = ["床前明月光", "疑是地上霜", "举头望明月", "低头思故乡"]
docs = [list(line) for line in lines]
model = fit_tfidf(docs)
print(f"corpus: C={model.corpus_size} documents")

# 床 appears in one line only while 月 recurs, so 床 discriminates better.
doc = docs[0]
for word in ("床", "月"):
    b = model.doc_freq.get(word, 1)
    print(f"tfidf({word}) in {''.join(doc)}: {tfidf(model, doc, word):.4f}"
          f"  (doc freq {b}, idf=log2({model.corpus_size}/{b})={math.log2(model.corpus_size/b):.3f})")
print("tf-idf top-2 of line 1:", extract_tfidf(model, doc, 2))

# TextRank over a window-2 co-occurrence graph of one line.
doc = docs[0]
graph = build_cooc_graph(doc, window=2)
scores = textrank_scores(graph)
print(f"\nTextRank on {''.join(doc)} "
      f"(converged={scores.converged} after {scores.iterations} iterations):")
for token, score in sorted(scores.scores.items(), key=lambda kv: -kv[1]):
    print(f"  {token}: {score:.4f}")
print("textrank top-2:", extract_textrank(doc, window=2, k=2))

# The combined policy: TextRank first, TF-IDF fills missing slots, stop words
# never surface.
print("\ncombined keywords for 床前明月光:", extract_keywords(doc, 2, model))
print("combined keywords with stop words mixed in:",
      extract_keywords(list("的床前明月光了"), 2, model))

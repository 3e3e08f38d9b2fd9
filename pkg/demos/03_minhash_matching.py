"""MinHash estimation, LSH candidate pruning, and threshold matching.

Run: python demos/03_minhash_matching.py
"""

import numpy as np

from quotematch.corpus import build_corpus
from quotematch.matcher import (
    MinHashParams,
    build_index,
    estimate_jaccard,
    exact_jaccard,
    match_post,
    minhash_signature,
    query_candidates,
)
from quotematch.textnorm import shingle

params = MinHashParams(k=256, seed=42)

# Signature agreement estimates Jaccard similarity without touching the sets.
a = shingle("الصدق منجاه والكذب مهواه والامانه غنيمه")
b = shingle("الصدق منجاه والكذب مهلكه والامانه غنيمه")
sig_a = minhash_signature(a, params)
sig_b = minhash_signature(b, params)
print(f"exact Jaccard    : {exact_jaccard(a, b):.3f}")
print(f"MinHash estimate : {estimate_jaccard(sig_a, sig_b):.3f}  (k={params.k})")

# Index a small corpus and watch candidate pruning at work.
rng = np.random.default_rng(0)
vocab = [f"كلمه{i}" for i in range(300)]
rows = []
for i in range(200):
    words = rng.choice(vocab, size=12, replace=False)
    level = "fabricated" if i % 2 == 0 else "authentic"
    rows.append((f"q{i:03d}", level, "demo", " ".join(words)))
corpus, _ = build_corpus(rows)
index = build_index(corpus, params)

target = corpus.quotes[0]
partial = " ".join(target.normalized_text.split()[:7])  # 7/12 tokens: J = 0.583
candidates = query_candidates(index, shingle(partial))
print(f"\nquery with 7 of 12 tokens of {target.id}:")
print(f"  candidates from banding: {len(candidates)} of {len(corpus)} quotes")

result = match_post(partial, index, corpus, post_id="demo-post")
print(f"  best match: {result.quote_id} at similarity {result.similarity:.3f} ({result.kind.value})")

# The 0.35 threshold is strict; a 7-of-20-token share sits exactly on it.
long_quote = " ".join(f"t{i}" for i in range(20))
corpus2, _ = build_corpus([("q", "fabricated", "demo", long_quote)])
index2 = build_index(corpus2, params)
on_threshold = match_post(" ".join(f"t{i}" for i in range(7)), index2, corpus2)
print(f"\nJaccard exactly 0.35 -> match: {on_threshold}")

# A refuting phrase turns a would-be circulation into a refute.
refute = match_post(target.raw_text + " حديث موضوع لا يصح", index, corpus)
print(f"share + refuting phrase -> kind: {refute.kind.value}")

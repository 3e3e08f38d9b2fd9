"""MinHash signatures, LSH banding index, and threshold matching of posts.

A post matches a reference quote when the exact Jaccard similarity of their
token shingle sets strictly exceeds the threshold (default 0.35). The LSH
index only prunes candidates; by default every candidate is re-verified with
exact Jaccard so matching is deterministic. A signature-only mode trades that
guarantee for speed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from hashlib import blake2b
from pathlib import Path
from typing import Iterable, Literal

import numpy as np

from .corpus import AuthenticityLevel, ReferenceCorpus
from .textnorm import (
    PrefixLexicon,
    ShingleSet,
    normalize_arabic,
    shingle,
    strip_quote_prefix,
)

_MAX64 = np.uint64(0xFFFFFFFFFFFFFFFF)
# Non-empty signatures are clamped below the sentinel, so an empty-set
# signature can never share a band with any non-empty one.
_SENTINEL = _MAX64
_CLAMP = np.uint64(0xFFFFFFFFFFFFFFFE)

INDEX_MAGIC = b"QMIDX001"


class MatcherError(ValueError):
    """Invalid matcher parameters or incompatible signatures."""


@dataclass(frozen=True)
class MinHashParams:
    """Signature size, seed, and banding layout.

    The defaults (k=256, bands=128, rows=2) make candidate pruning effectively
    lossless above the 0.35 match threshold: a pair with Jaccard s shares at
    least one band with probability 1-(1-s^rows)^bands, which at s=0.35 is
    1 - 5.4e-8. Fewer, wider bands prune harder but start dropping true
    matches near the threshold.
    """

    k: int = 256
    seed: int = 0
    bands: int = 128
    rows: int = 2

    def __post_init__(self) -> None:
        if self.k < 16:
            raise MatcherError(f"k must be >= 16, got {self.k}")
        if self.bands < 1:
            raise MatcherError(f"bands must be >= 1, got {self.bands}")
        if self.bands * self.rows != self.k:
            raise MatcherError(
                f"bands*rows must equal k: {self.bands}*{self.rows} != {self.k}"
            )
        if self.seed < 0:
            raise MatcherError(f"seed must be non-negative, got {self.seed}")


@dataclass(eq=False)
class MinHashSignature:
    """k 64-bit minima; the empty set maps to the all-max sentinel."""

    values: np.ndarray
    seed: int

    @property
    def k(self) -> int:
        return len(self.values)

    def is_sentinel(self) -> bool:
        return bool(np.all(self.values == _SENTINEL))


@lru_cache(maxsize=1 << 20)
def _base_hash(token: str) -> int:
    """Stable 64-bit hash of a shingle string (seed-independent)."""
    return int.from_bytes(blake2b(token.encode("utf-8"), digest_size=8).digest(), "little")


@lru_cache(maxsize=64)
def _hash_coefficients(k: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    a = rng.integers(1, 1 << 62, size=k, dtype=np.uint64) * np.uint64(2) + np.uint64(1)
    b = rng.integers(0, 1 << 63, size=k, dtype=np.uint64)
    return a, b


def minhash_signature(shingles: ShingleSet, params: MinHashParams) -> MinHashSignature:
    """Deterministic signature of a shingle set under the seeded hash family."""
    if not shingles:
        return MinHashSignature(np.full(params.k, _SENTINEL, dtype=np.uint64), params.seed)
    a, b = _hash_coefficients(params.k, params.seed)
    x = np.fromiter(
        (_base_hash(s) for s in shingles.shingles),
        dtype=np.uint64,
        count=len(shingles.shingles),
    )
    # (k, m) affine hashes with uint64 wraparound; minimum over the set.
    values = (a[:, None] * x[None, :] + b[:, None]).min(axis=1)
    return MinHashSignature(np.minimum(values, _CLAMP), params.seed)


def estimate_jaccard(a: MinHashSignature, b: MinHashSignature) -> float:
    """Fraction of agreeing signature components; unbiased Jaccard estimate."""
    if a.k != b.k:
        raise MatcherError(f"signature length mismatch: {a.k} != {b.k}")
    if a.seed != b.seed:
        raise MatcherError(f"signature seed mismatch: {a.seed} != {b.seed}")
    return float(np.count_nonzero(a.values == b.values)) / a.k


def exact_jaccard(a: ShingleSet, b: ShingleSet) -> float:
    """|a ∩ b| / |a ∪ b|, with 0.0 when both sets are empty."""
    if not a.shingles and not b.shingles:
        return 0.0
    inter = len(a.shingles & b.shingles)
    union = len(a.shingles) + len(b.shingles) - inter
    return inter / union


# The 14 phrases Arabic speakers use to flag a quote as non-authentic.
# Stored raw; RefuteLexicon normalizes them on construction.
DEFAULT_REFUTE_PHRASES = (
    "حديث موضوع",
    "حديث مفبرك",
    "حديث مفترى",
    "حديث غير صحيح",
    "حديث مكذوب",
    "حديث كذب على رسول الله",
    "حديث لا يصح",
    "حديث لا أصل له",
    "الدرجة: لا يصح",
    "حديث ضعيف",
    "الدرجة: موضوع",
    "حديث ليس صحيح",
    "حديث لم يرد",
    "حديث مختلق",
)


@dataclass(frozen=True)
class RefuteLexicon:
    """Refuting phrases, as normalized token tuples."""

    phrases: tuple[tuple[str, ...], ...]

    @classmethod
    def from_phrases(cls, phrases: Iterable[str]) -> "RefuteLexicon":
        toks = {tuple(normalize_arabic(p).split()) for p in phrases}
        toks.discard(())
        if not toks:
            raise ValueError("refute lexicon is empty")
        return cls(phrases=tuple(sorted(toks)))

    @classmethod
    def from_file(cls, path: str | Path) -> "RefuteLexicon":
        lines = Path(path).read_text(encoding="utf-8-sig").splitlines()
        return cls.from_phrases(line for line in lines if line.strip())

    def __len__(self) -> int:
        return len(self.phrases)


DEFAULT_REFUTES = RefuteLexicon.from_phrases(DEFAULT_REFUTE_PHRASES)


def _contains_phrase(tokens: list[str], lexicon: RefuteLexicon) -> bool:
    for phrase in lexicon.phrases:
        k = len(phrase)
        for i in range(len(tokens) - k + 1):
            if tuple(tokens[i : i + k]) == phrase:
                return True
    return False


def contains_refute_term(post_text: str, lexicon: RefuteLexicon = DEFAULT_REFUTES) -> bool:
    """True iff a refuting phrase occurs as consecutive tokens of the post."""
    return _contains_phrase(normalize_arabic(post_text).split(), lexicon)


class MatchKind(Enum):
    CIRCULATION = "circulation"
    REFUTE = "refute"
    NON_FABRICATED_SHARE = "non_fabricated_share"


@dataclass(frozen=True)
class MatchResult:
    post_id: str
    quote_id: str
    similarity: float
    authenticity: AuthenticityLevel
    kind: MatchKind


@dataclass
class LshIndex:
    """Banding index over a reference corpus; immutable after build."""

    params: MinHashParams
    shingle_n: int
    quote_ids: tuple[str, ...]
    signatures: np.ndarray  # (n_quotes, k) uint64
    shingles_by_id: dict[str, ShingleSet]
    corpus_hash: str | None = None
    _bands: list[dict[bytes, list[int]]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._bands = _band_tables(self.signatures, self.params)

    def __len__(self) -> int:
        return len(self.quote_ids)


def _band_tables(signatures: np.ndarray, params: MinHashParams) -> list[dict[bytes, list[int]]]:
    tables: list[dict[bytes, list[int]]] = [{} for _ in range(params.bands)]
    for row_idx in range(signatures.shape[0]):
        sig = signatures[row_idx]
        for band in range(params.bands):
            key = sig[band * params.rows : (band + 1) * params.rows].tobytes()
            tables[band].setdefault(key, []).append(row_idx)
    return tables


def build_index(
    corpus: ReferenceCorpus,
    params: MinHashParams | None = None,
    shingle_n: int = 1,
    corpus_hash: str | None = None,
) -> LshIndex:
    """Index every corpus quote into ``bands`` buckets; deterministic per seed."""
    if len(corpus) == 0:
        raise MatcherError("cannot index an empty corpus")
    params = params or MinHashParams()
    ids = []
    shingle_sets = {}
    sigs = np.empty((len(corpus), params.k), dtype=np.uint64)
    for i, quote in enumerate(corpus.quotes):
        s = shingle(quote.normalized_text, shingle_n)
        ids.append(quote.id)
        shingle_sets[quote.id] = s
        sigs[i] = minhash_signature(s, params).values
    return LshIndex(
        params=params,
        shingle_n=shingle_n,
        quote_ids=tuple(ids),
        signatures=sigs,
        shingles_by_id=shingle_sets,
        corpus_hash=corpus_hash,
    )


def _candidate_rows(index: LshIndex, sig: MinHashSignature) -> set[int]:
    rows = index.params.rows
    found: set[int] = set()
    for band in range(index.params.bands):
        key = sig.values[band * rows : (band + 1) * rows].tobytes()
        bucket = index._bands[band].get(key)
        if bucket:
            found.update(bucket)
    return found


def query_candidates(index: LshIndex, shingles: ShingleSet) -> set[str]:
    """Ids of quotes sharing at least one full band with the query signature."""
    if not shingles:
        return set()
    sig = minhash_signature(shingles, index.params)
    return {index.quote_ids[i] for i in _candidate_rows(index, sig)}


MatchMode = Literal["exact", "exhaustive", "signatures"]


def match_post(
    post_text: str,
    index: LshIndex,
    corpus: ReferenceCorpus,
    refute_lexicon: RefuteLexicon = DEFAULT_REFUTES,
    threshold: float = 0.35,
    *,
    post_id: str = "",
    mode: MatchMode = "exact",
    prefix_lexicon: PrefixLexicon | None = None,
) -> MatchResult | None:
    """Match one post against the indexed corpus.

    Pipeline: normalize -> scan for refute terms (on the full normalized text,
    before any stripping) -> strip quote prefix -> shingle -> candidates ->
    verify -> keep the best candidate if its similarity strictly exceeds the
    threshold. Ties break toward the lowest quote id.

    Modes: "exact" verifies LSH candidates with exact Jaccard (default),
    "exhaustive" verifies every corpus quote (no candidate pruning), and
    "signatures" scores LSH candidates by signature agreement only.
    """
    if not 0.0 < threshold < 1.0:
        raise MatcherError(f"threshold must be in (0, 1), got {threshold}")
    normalized = normalize_arabic(post_text)
    refuted = _contains_phrase(normalized.split(), refute_lexicon)
    stripped = strip_quote_prefix(normalized, prefix_lexicon)
    shingles = shingle(stripped, index.shingle_n)
    if not shingles:
        return None

    if mode == "exhaustive":
        candidates: Iterable[str] = index.quote_ids
    else:
        candidates = query_candidates(index, shingles)
    if not candidates:
        return None

    if mode == "signatures":
        sig = minhash_signature(shingles, index.params)
        row_of = {qid: i for i, qid in enumerate(index.quote_ids)}

        def score(qid: str) -> float:
            row = index.signatures[row_of[qid]]
            return float(np.count_nonzero(row == sig.values)) / index.params.k

    else:

        def score(qid: str) -> float:
            return exact_jaccard(shingles, index.shingles_by_id[qid])

    best_id: str | None = None
    best_sim = -1.0
    for qid in sorted(candidates):
        sim = score(qid)
        if sim > best_sim:
            best_id, best_sim = qid, sim
    if best_id is None or best_sim <= threshold:
        return None

    authenticity = corpus.by_id(best_id).authenticity
    if authenticity is AuthenticityLevel.FABRICATED:
        kind = MatchKind.REFUTE if refuted else MatchKind.CIRCULATION
    else:
        kind = MatchKind.NON_FABRICATED_SHARE
    return MatchResult(
        post_id=post_id,
        quote_id=best_id,
        similarity=best_sim,
        authenticity=authenticity,
        kind=kind,
    )


def save_index(index: LshIndex, path: str | Path) -> None:
    """Serialize to the versioned binary format (magic + JSON header + raw u64)."""
    header = {
        "format_version": 1,
        "params": {
            "k": index.params.k,
            "seed": index.params.seed,
            "bands": index.params.bands,
            "rows": index.params.rows,
        },
        "shingle_n": index.shingle_n,
        "corpus_hash": index.corpus_hash,
        "quote_ids": list(index.quote_ids),
    }
    blob = json.dumps(header, ensure_ascii=False, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(INDEX_MAGIC)
        fh.write(len(blob).to_bytes(4, "little"))
        fh.write(blob)
        fh.write(np.ascontiguousarray(index.signatures, dtype="<u8").tobytes())


def load_index(path: str | Path, corpus: ReferenceCorpus) -> LshIndex:
    """Load an index and re-attach quote shingle sets from the corpus."""
    data = Path(path).read_bytes()
    if data[: len(INDEX_MAGIC)] != INDEX_MAGIC:
        raise MatcherError(f"not a quotematch index file: {path}")
    offset = len(INDEX_MAGIC)
    blob_len = int.from_bytes(data[offset : offset + 4], "little")
    offset += 4
    header = json.loads(data[offset : offset + blob_len].decode("utf-8"))
    offset += blob_len
    params = MinHashParams(**header["params"])
    quote_ids = tuple(header["quote_ids"])
    sigs = np.frombuffer(data, dtype="<u8", offset=offset).reshape(len(quote_ids), params.k)
    if set(quote_ids) != corpus.ids():
        raise MatcherError("index quote ids do not match the supplied corpus")
    shingle_n = header["shingle_n"]
    shingle_sets = {
        q.id: shingle(q.normalized_text, shingle_n) for q in corpus.quotes
    }
    return LshIndex(
        params=params,
        shingle_n=shingle_n,
        quote_ids=quote_ids,
        signatures=np.ascontiguousarray(sigs, dtype=np.uint64),
        shingles_by_id=shingle_sets,
        corpus_hash=header["corpus_hash"],
    )

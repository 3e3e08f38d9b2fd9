"""Multi-hot network-tie feature space and sparse binary user encodings.

One column per distinct (target account, interaction kind) pair, so following
a page and liking its tweets occupy two different columns. Encodings are
binary: a column is active iff the user has that tie.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse


class TieKind(Enum):
    FOLLOW = "follow"
    RETWEET_AUTHOR = "retweet"
    LIKE_AUTHOR = "like"


@dataclass(frozen=True)
class TieRecord:
    user_id: str
    target_id: str
    kind: TieKind


@dataclass
class FeatureSpace:
    """Dense 0..n-1 column indexing of (target, kind) pairs, sorted for stability."""

    columns: tuple[tuple[str, TieKind], ...]
    support: tuple[int, ...]
    column_of: dict[tuple[str, TieKind], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.columns) != len(self.support):
            raise ValueError("support length does not match column count")
        self.column_of = {pair: i for i, pair in enumerate(self.columns)}

    @property
    def n_columns(self) -> int:
        return len(self.columns)

    def pair_of(self, column: int) -> tuple[str, TieKind]:
        return self.columns[column]

    @property
    def manifest_hash(self) -> str:
        payload = json.dumps(
            [[t, k.value] for t, k in self.columns], ensure_ascii=False, separators=(",", ":")
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class FeatureVector:
    """Sorted active column indices of one user (binary semantics)."""

    user_id: str
    columns: tuple[int, ...]


def _user_pairs(ties: Iterable[TieRecord]) -> dict[str, set[tuple[str, TieKind]]]:
    """Distinct (target, kind) pairs per user; self-ties are dropped."""
    pairs: dict[str, set[tuple[str, TieKind]]] = {}
    for t in ties:
        if t.user_id == t.target_id:
            continue
        pairs.setdefault(t.user_id, set()).add((t.target_id, t.kind))
    return pairs


def build_feature_space(ties: Iterable[TieRecord]) -> FeatureSpace:
    """One column per distinct (target, kind); support counts users per column."""
    per_user = _user_pairs(ties)
    support_count: dict[tuple[str, TieKind], int] = {}
    for pairs in per_user.values():
        for pair in pairs:
            support_count[pair] = support_count.get(pair, 0) + 1
    columns = tuple(sorted(support_count, key=lambda p: (p[0], p[1].value)))
    return FeatureSpace(columns=columns, support=tuple(support_count[p] for p in columns))


def encode_user(
    user_id: str, ties: Iterable[TieRecord], space: FeatureSpace
) -> tuple[FeatureVector, int]:
    """Encode one user; returns the vector and the count of dropped unknown pairs."""
    pairs = _user_pairs(t for t in ties if t.user_id == user_id).get(user_id, set())
    known = sorted(space.column_of[p] for p in pairs if p in space.column_of)
    dropped = sum(1 for p in pairs if p not in space.column_of)
    return FeatureVector(user_id=user_id, columns=tuple(known)), dropped


def encode_users(
    ties: Iterable[TieRecord], space: FeatureSpace
) -> tuple[list[FeatureVector], int]:
    """Encode every user appearing in the tie list, sorted by user id."""
    per_user = _user_pairs(ties)
    vectors: list[FeatureVector] = []
    dropped = 0
    for user_id in sorted(per_user):
        known = sorted(
            space.column_of[p] for p in per_user[user_id] if p in space.column_of
        )
        dropped += sum(1 for p in per_user[user_id] if p not in space.column_of)
        vectors.append(FeatureVector(user_id=user_id, columns=tuple(known)))
    return vectors, dropped


def prune_features(
    space: FeatureSpace, vectors: Sequence[FeatureVector], min_support: int
) -> tuple[FeatureSpace, list[FeatureVector]]:
    """Drop columns with support below ``min_support``; remap order-preserving."""
    if min_support < 0:
        raise ValueError(f"min_support must be >= 0, got {min_support}")
    keep = [i for i in range(space.n_columns) if space.support[i] >= min_support]
    remap = {old: new for new, old in enumerate(keep)}
    new_space = FeatureSpace(
        columns=tuple(space.columns[i] for i in keep),
        support=tuple(space.support[i] for i in keep),
    )
    new_vectors = [
        FeatureVector(
            user_id=v.user_id,
            columns=tuple(remap[c] for c in v.columns if c in remap),
        )
        for v in vectors
    ]
    return new_space, new_vectors


def to_csr(vectors: Sequence[FeatureVector], n_columns: int) -> sparse.csr_matrix:
    """Stack binary vectors into a CSR matrix with one row per vector."""
    indptr = [0]
    indices: list[int] = []
    for v in vectors:
        indices.extend(v.columns)
        indptr.append(len(indices))
    data = np.ones(len(indices), dtype=np.float64)
    return sparse.csr_matrix(
        (data, np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(vectors), n_columns),
    )


def read_ties_csv(path: str | Path) -> list[TieRecord]:
    """Read ``user_id,target_id,kind`` rows; duplicates collapse to one record."""
    ties: list[TieRecord] = []
    seen: set[tuple[str, str, TieKind]] = set()
    with open(path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row or (line_no == 1 and row == ["user_id", "target_id", "kind"]):
                continue
            if len(row) != 3:
                raise ValueError(f"{path}: line {line_no}: expected 3 columns, got {len(row)}")
            user_id, target_id, kind_label = row
            try:
                kind = TieKind(kind_label.strip().lower())
            except ValueError:
                raise ValueError(
                    f"{path}: line {line_no}: unknown tie kind {kind_label!r}"
                ) from None
            key = (user_id, target_id, kind)
            if key in seen:
                continue
            seen.add(key)
            ties.append(TieRecord(user_id, target_id, kind))
    return ties


def write_ties_csv(ties: Iterable[TieRecord], path: str | Path) -> None:
    rows = sorted({(t.user_id, t.target_id, t.kind.value) for t in ties})
    lines = ["user_id,target_id,kind"] + [",".join(r) for r in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_space(space: FeatureSpace, path: str | Path, ties_hash: str | None = None) -> None:
    """Persist the column manifest so coefficient reports stay interpretable."""
    payload = {
        "format_version": 1,
        "ties_hash": ties_hash,
        "manifest_hash": space.manifest_hash,
        "columns": [[t, k.value] for t, k in space.columns],
        "support": list(space.support),
    }
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def load_space(path: str | Path) -> FeatureSpace:
    payload = json.loads(Path(path).read_text(encoding="utf-8-sig"))
    space = FeatureSpace(
        columns=tuple((t, TieKind(k)) for t, k in payload["columns"]),
        support=tuple(payload["support"]),
    )
    if payload.get("manifest_hash") and payload["manifest_hash"] != space.manifest_hash:
        raise ValueError(f"{path}: manifest hash does not match column list")
    return space


def save_vectors(
    vectors: Sequence[FeatureVector], path: str | Path, space_hash: str
) -> None:
    """JSONL vectors; the first line binds them to a feature-space manifest."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"format_version": 1, "space_hash": space_hash}) + "\n")
        for v in vectors:
            fh.write(
                json.dumps({"user_id": v.user_id, "columns": list(v.columns)}) + "\n"
            )


def load_vectors(path: str | Path) -> tuple[list[FeatureVector], str]:
    """Load JSONL vectors; returns them plus the recorded space hash."""
    lines = Path(path).read_text(encoding="utf-8-sig").splitlines()
    if not lines:
        raise ValueError(f"{path}: empty vectors file")
    meta = json.loads(lines[0])
    space_hash = meta.get("space_hash", "")
    vectors = []
    for line in lines[1:]:
        if not line.strip():
            continue
        obj = json.loads(line)
        vectors.append(
            FeatureVector(user_id=obj["user_id"], columns=tuple(obj["columns"]))
        )
    return vectors, space_hash

"""Arabic-aware text normalization, quote-introduction stripping, and shingling.

Every similarity operation downstream compares texts in the normal form
produced by :func:`normalize_arabic`. The rules are deterministic, idempotent,
and never grow the input: each one either deletes a character or maps it to a
single replacement, so ``len(normalize_arabic(s)) <= len(s)`` always holds.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TypeAlias

# A normalized string: no diacritics/tatweel, folded letter variants, no
# punctuation or symbols, single spaces, no leading/trailing whitespace.
NormalizedText: TypeAlias = str

# Arabic combining marks removed outright: tashkil and related marks
# (U+064B..U+065F), the superscript/dagger alef (U+0670), and tatweel (U+0640).
DIACRITICS = frozenset(chr(c) for c in range(0x064B, 0x0660)) | {
    "ٰ",  # ARABIC LETTER SUPERSCRIPT ALEF
    "ـ",  # ARABIC TATWEEL
}

# Letters typed interchangeably are folded to one representative form.
LETTER_FOLD = {
    "آ": "ا",  # آ alef madda        -> ا
    "أ": "ا",  # أ alef hamza above  -> ا
    "إ": "ا",  # إ alef hamza below  -> ا
    "ٱ": "ا",  # ٱ alef wasla        -> ا
    "ة": "ه",  # ة ta marbuta        -> ه
    "ى": "ي",  # ى alef maksura      -> ي
    "ؤ": "و",  # ؤ waw hamza         -> و
    "ئ": "ي",  # ئ ya hamza          -> ي
}

# URLs and @-mentions are noise and dropped wholesale; hashtag bodies are kept
# because the '#' and '_' fall under the punctuation-to-space rule below.
_URL = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION = re.compile(r"@[A-Za-z0-9_]+")

_KEPT_CONTROLS = "\t\n\r\x0b\x0c"  # become spaces; other C-category chars are dropped


def normalize_arabic(raw: str) -> NormalizedText:
    """Normalize arbitrary Unicode text into the comparison form.

    Total function: any Python string is accepted, including lone surrogates
    from lenient decoding (they are dropped with the other control characters).
    """
    if not raw:
        return ""
    text = _URL.sub(" ", raw)
    text = _MENTION.sub(" ", text)
    out: list[str] = []
    for ch in text:
        if ch in DIACRITICS:
            continue
        ch = LETTER_FOLD.get(ch, ch)
        major = unicodedata.category(ch)[0]
        if major in ("P", "S", "Z"):
            # punctuation (incl. '#', '_'), symbols (incl. emoji), separators
            out.append(" ")
        elif major == "C":
            if ch in _KEPT_CONTROLS:
                out.append(" ")
            # zero-width joiners, BOM, surrogates, etc.: dropped
        else:
            out.append(ch)
    return " ".join("".join(out).split())


def tokenize(text: NormalizedText) -> list[str]:
    """Whitespace tokens of a normalized string."""
    return text.split()


# Quote-introduction phrases commonly prepended to a canonical quote. They are
# interchangeable and carry no content, so matching strips them. Stored raw;
# PrefixLexicon normalizes them on construction.
DEFAULT_PREFIX_PATTERNS = (
    "قال رسول الله صلى الله عليه وآله وسلم",
    "قال رسول الله صلى الله عليه وسلم",
    "قال النبي صلى الله عليه وسلم",
    "قال محمد صلى الله عليه وسلم",
    "قال محمد عليه الصلاة والسلام",
    "قال عليه الصلاة والسلام",
    "قال رسول الله",
    "قال النبي",
    "سمعت رسول الله صلى الله عليه وسلم يقول",
    "سمعت النبي صلى الله عليه وسلم يقول",
    "سمعت رسول الله يقول",
    "سمعت النبي يقول",
    "عن النبي صلى الله عليه وسلم قال",
    "عن رسول الله صلى الله عليه وسلم قال",
)


@dataclass(frozen=True)
class PrefixLexicon:
    """Ordered quote-introduction patterns, as normalized token tuples.

    Patterns are kept longest-first so the most specific introduction wins.
    """

    patterns: tuple[tuple[str, ...], ...]

    @classmethod
    def from_patterns(cls, patterns: Iterable[str]) -> "PrefixLexicon":
        toks = {tuple(normalize_arabic(p).split()) for p in patterns}
        toks.discard(())
        if not toks:
            raise ValueError("prefix lexicon is empty")
        return cls(patterns=tuple(sorted(toks, key=lambda t: (-len(t), t))))

    @classmethod
    def from_file(cls, path: str | Path) -> "PrefixLexicon":
        lines = Path(path).read_text(encoding="utf-8-sig").splitlines()
        return cls.from_patterns(line for line in lines if line.strip())

    def __len__(self) -> int:
        return len(self.patterns)


DEFAULT_PREFIXES = PrefixLexicon.from_patterns(DEFAULT_PREFIX_PATTERNS)


def strip_quote_prefix(
    text: NormalizedText, lexicon: PrefixLexicon | None = None
) -> NormalizedText:
    """Remove one leading quote-introduction phrase, longest match first.

    Operates on normalized text, where quote marks have already been folded to
    whitespace, so a pattern right after an opening quote mark still sits at
    the start of the token sequence. Non-matching text is returned unchanged.
    """
    lex = lexicon if lexicon is not None else DEFAULT_PREFIXES
    tokens = text.split()
    for pattern in lex.patterns:
        k = len(pattern)
        if len(tokens) >= k and tuple(tokens[:k]) == pattern:
            return " ".join(tokens[k:])
    return text


@dataclass(frozen=True)
class ShingleSet:
    """Set of token n-grams plus the token count of the source text."""

    shingles: frozenset[str]
    source_token_count: int

    def __len__(self) -> int:
        return len(self.shingles)

    def __bool__(self) -> bool:
        return bool(self.shingles)


def shingle(text: NormalizedText, n: int = 1) -> ShingleSet:
    """All consecutive n-token windows of a normalized string, as a set.

    For n=1 this is the token set. Texts with fewer than n tokens yield the
    empty set.
    """
    if n < 1:
        raise ValueError(f"shingle size must be >= 1, got {n}")
    tokens = text.split()
    if len(tokens) < n:
        return ShingleSet(frozenset(), len(tokens))
    if n == 1:
        grams: Iterable[str] = tokens
    else:
        grams = (" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
    return ShingleSet(frozenset(grams), len(tokens))

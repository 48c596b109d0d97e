"""Normalization and word tokenization for mixed Latin/Devanagari text.

Word-level tokens only: the bias metrics and lexicons in this package
operate on whole words, so there is no subword segmentation here.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field

_ZERO_WIDTH = {"‌", "‍"}  # ZWNJ, ZWJ
_DANDA = {"।", "॥"}  # Devanagari danda and double danda

SCRIPT_CLASSES = ("latin", "devanagari", "digit", "other")


def _is_devanagari(ch: str) -> bool:
    return "ऀ" <= ch <= "ॿ"


def normalize(text: str) -> str:
    """Canonical form used for every token comparison in the package.

    NFC normalization, lowercasing (a no-op outside cased scripts), and
    removal of zero-width joiners/non-joiners except where both
    neighbouring codepoints are Devanagari, where they can be part of a
    conjunct and are kept.  Idempotent.
    """
    s = unicodedata.normalize("NFC", text).lower()
    if any(zw in s for zw in _ZERO_WIDTH):
        kept = []
        for i, ch in enumerate(s):
            if ch in _ZERO_WIDTH:
                prev_dev = i > 0 and _is_devanagari(s[i - 1])
                next_dev = i + 1 < len(s) and _is_devanagari(s[i + 1])
                if not (prev_dev and next_dev):
                    continue
            kept.append(ch)
        s = unicodedata.normalize("NFC", "".join(kept))
    return s


def _is_punct(ch: str) -> bool:
    return ch in _DANDA or unicodedata.category(ch).startswith("P")


def _strip_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[start:end]


def _script_class(token: str) -> str:
    counts = dict.fromkeys(SCRIPT_CLASSES, 0)
    for ch in token:
        if _is_devanagari(ch):
            counts["devanagari"] += 1
        elif ch.isdigit():
            counts["digit"] += 1
        elif ch.isascii() and ch.isalpha() or "LATIN" in unicodedata.name(ch, ""):
            counts["latin"] += 1
        else:
            counts["other"] += 1
    # majority class; ties resolved by the fixed order of SCRIPT_CLASSES
    return max(SCRIPT_CLASSES, key=lambda c: counts[c])


@dataclass
class TokenStream:
    tokens: list[str]
    script_histogram: dict[str, int] = field(default_factory=dict)


def tokenize(text: str) -> TokenStream:
    """Split normalized text into word tokens.

    Whitespace-delimited, leading/trailing punctuation stripped (Unicode
    P* categories plus danda/double danda), hyphenated words split on the
    hyphen, punctuation-only tokens dropped.  Input is normalized
    defensively, so callers may pass raw text.
    """
    text = normalize(text)
    tokens: list[str] = []
    for raw in text.split():
        stripped = _strip_punct(raw)
        if not stripped:
            continue
        for part in stripped.split("-"):
            part = _strip_punct(part)
            if part:
                tokens.append(part)
    histogram = Counter(_script_class(t) for t in tokens)
    return TokenStream(tokens=tokens, script_histogram=dict(histogram))

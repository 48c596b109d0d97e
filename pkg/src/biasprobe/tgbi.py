"""Translation gender bias index over sets of classified sentences.

Each sentence in a set is classified he/she/neutral by the first token
that hits either gender lexicon.  A set with class proportions p_he,
p_she, p_neutral scores P = sqrt(p_he * p_she + p_neutral), which is 1
for all-neutral output, 0.5 for a perfect he/she balance with no
neutrals, and 0 when everything lands on one side.  The index is the
arithmetic mean of the set scores, so 1 means unbiased.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .lexicon import WordSetSpec
from .tokenization import TokenStream, tokenize

HE, SHE, NEUTRAL = "he", "she", "neutral"


@dataclass
class GenderClassCounts:
    set_id: str
    n_he: int
    n_she: int
    n_neutral: int

    def __post_init__(self):
        if min(self.n_he, self.n_she, self.n_neutral) < 0:
            raise ValueError(f"set {self.set_id!r}: negative count")
        if self.total < 1:
            raise ValueError(f"set {self.set_id!r}: empty set (total 0)")

    @property
    def total(self) -> int:
        return self.n_he + self.n_she + self.n_neutral

    @property
    def proportions(self) -> tuple[float, float, float]:
        t = self.total
        return self.n_he / t, self.n_she / t, self.n_neutral / t


@dataclass
class SetScore:
    set_id: str
    p_he: float
    p_she: float
    p_neutral: float
    score: float


@dataclass
class TgbiResult:
    per_set: list[SetScore]
    index: float
    diagnostics: dict[str, dict[str, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_set": [
                {
                    "set_id": s.set_id,
                    "p_he": s.p_he,
                    "p_she": s.p_she,
                    "p_neutral": s.p_neutral,
                    "score": s.score,
                }
                for s in self.per_set
            ],
            "index": self.index,
            "diagnostics": {k: dict(v) for k, v in self.diagnostics.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TgbiResult":
        return cls(
            per_set=[SetScore(**s) for s in data["per_set"]],
            index=data["index"],
            diagnostics={k: dict(v) for k, v in data.get("diagnostics", {}).items()},
        )


def set_score(counts: GenderClassCounts) -> float:
    p_he, p_she, p_neutral = counts.proportions
    return math.sqrt(p_he * p_she + p_neutral)


def tgbi(sets: list[GenderClassCounts], diagnostics: dict | None = None) -> TgbiResult:
    """Score every set and average; per-set detail is retained."""
    if not sets:
        raise ValueError("tgbi needs at least one set of counts")
    per_set = []
    for counts in sets:
        p_he, p_she, p_neutral = counts.proportions
        per_set.append(
            SetScore(
                set_id=counts.set_id,
                p_he=p_he,
                p_she=p_she,
                p_neutral=p_neutral,
                score=set_score(counts),
            )
        )
    index = math.fsum(s.score for s in per_set) / len(per_set)
    return TgbiResult(per_set=per_set, index=index, diagnostics=diagnostics or {})


class SentenceClassifier:
    """Classifies token streams by first-match against two disjoint lexicons."""

    def __init__(self, he_lexicon: WordSetSpec, she_lexicon: WordSetSpec):
        he_set, she_set = set(he_lexicon.tokens), set(she_lexicon.tokens)
        both = he_set & she_set
        if both:
            raise ValueError(
                f"gender lexicons overlap: {', '.join(sorted(both))}"
            )
        self.he_tokens = he_set
        self.she_tokens = she_set

    def classify(self, tokens: TokenStream | list[str]) -> str:
        toks = tokens.tokens if isinstance(tokens, TokenStream) else tokens
        for tok in toks:
            if tok in self.he_tokens:
                return HE
            if tok in self.she_tokens:
                return SHE
        return NEUTRAL

    def count_set(self, set_id: str, sentences: list[str]) -> tuple[GenderClassCounts, int]:
        """Counts for one set plus a diagnostic tally of sentences that
        contain tokens from both lexicons (counted under the first hit)."""
        n = {HE: 0, SHE: 0, NEUTRAL: 0}
        both_present = 0
        for sentence in sentences:
            toks = tokenize(sentence).tokens
            n[self.classify(toks)] += 1
            tok_set = set(toks)
            if tok_set & self.he_tokens and tok_set & self.she_tokens:
                both_present += 1
        counts = GenderClassCounts(
            set_id=set_id, n_he=n[HE], n_she=n[SHE], n_neutral=n[NEUTRAL]
        )
        return counts, both_present


def classify_sentence(
    tokens: TokenStream | list[str],
    he_lexicon: WordSetSpec,
    she_lexicon: WordSetSpec,
) -> str:
    return SentenceClassifier(he_lexicon, she_lexicon).classify(tokens)


def load_counts(path: str | Path) -> list[GenderClassCounts]:
    """Read a counts table: header ``set_id,n_he,n_she,n_neutral``."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"counts file not found: {path}")
    reader = csv.DictReader(io.StringIO(path.read_text(encoding="utf-8"), newline=""))
    required = {"set_id", "n_he", "n_she", "n_neutral"}
    if reader.fieldnames is None or not required <= set(reader.fieldnames):
        raise ValueError(
            f"{path}: header must contain set_id,n_he,n_she,n_neutral; "
            f"found {reader.fieldnames}"
        )
    out = []
    for row_no, row in enumerate(reader, start=2):
        try:
            out.append(
                GenderClassCounts(
                    set_id=row["set_id"],
                    n_he=int(row["n_he"]),
                    n_she=int(row["n_she"]),
                    n_neutral=int(row["n_neutral"]),
                )
            )
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{path}: row {row_no}: {exc}") from None
    if not out:
        raise ValueError(f"{path}: no count rows")
    return out


def load_sentence_sets(
    sentences_path: str | Path, manifest_path: str | Path
) -> dict[str, list[str]]:
    """Group a one-sentence-per-line file into sets via a JSON manifest.

    The manifest maps set_id to a [start, end] line range (1-based,
    inclusive) or a list of such ranges.
    """
    sentences_path, manifest_path = Path(sentences_path), Path(manifest_path)
    if not sentences_path.is_file():
        raise FileNotFoundError(f"sentence file not found: {sentences_path}")
    if not manifest_path.is_file():
        raise FileNotFoundError(f"manifest not found: {manifest_path}")
    lines = sentences_path.read_text(encoding="utf-8").splitlines()
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if not isinstance(manifest, dict) or not manifest:
        raise ValueError(f"{manifest_path}: manifest must map set ids to line ranges")

    sets: dict[str, list[str]] = {}
    for set_id, ranges in manifest.items():
        if ranges and isinstance(ranges[0], int):
            ranges = [ranges]
        collected = []
        for rng in ranges:
            if len(rng) != 2 or rng[0] < 1 or rng[1] < rng[0] or rng[1] > len(lines):
                raise ValueError(
                    f"{manifest_path}: set {set_id!r}: bad line range {rng} "
                    f"(file has {len(lines)} lines)"
                )
            collected.extend(lines[rng[0] - 1 : rng[1]])
        if not collected:
            raise ValueError(f"{manifest_path}: set {set_id!r} selects no lines")
        sets[set_id] = collected
    return sets


def tgbi_from_sentences(
    sentence_sets: dict[str, list[str]], classifier: SentenceClassifier
) -> TgbiResult:
    counts, diagnostics = [], {}
    for set_id in sorted(sentence_sets):
        c, both = classifier.count_set(set_id, sentence_sets[set_id])
        counts.append(c)
        diagnostics[set_id] = {
            "n_he": c.n_he,
            "n_she": c.n_she,
            "n_neutral": c.n_neutral,
            "total": c.total,
            "both_present": both,
        }
    return tgbi(counts, diagnostics)

"""Synthetic corpora with a planted gender-topic co-occurrence skew.

Used to validate the pipeline end to end: four generated domains with
increasing skew should come back from ingest -> split -> train -> WEAT
in the planted effect-size order.  Sentences pair a gendered word with a
career or family word plus neutral filler; `skew` is the probability
that a career sentence carries a masculine word (and a family sentence a
feminine one), so 0.5 plants no association and 1.0 a maximal one.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .rng import SplitMix64

MALE = ["he", "him", "his", "man", "boy"]
FEMALE = ["she", "her", "hers", "woman", "girl"]
CAREER = ["office", "work", "salary", "business", "manager", "career", "money", "job"]
FAMILY = ["home", "family", "children", "wedding", "kitchen", "marriage", "parents", "cousins"]
FILLER = [
    "the", "day", "was", "long", "and", "people", "talked", "about",
    "things", "while", "time", "passed", "slowly", "there", "again",
]


def planted_sentences(skew: float, n_sentences: int, seed: int) -> list[str]:
    """Generate sentences with the given gender-topic skew.

    Each sentence interleaves two gendered words with two topic words
    plus one filler word ("he office his salary today"), so gendered and
    topic words share context mass the way they do in natural text; the
    association is then recoverable from trained vectors, not only from
    raw co-occurrence counts.
    """
    if not 0.0 <= skew <= 1.0:
        raise ValueError(f"skew must be in [0, 1], got {skew}")
    rng = SplitMix64(seed)

    def pick(words):
        return words[rng.next_below(len(words))]

    sentences = []
    for i in range(n_sentences):
        career_topic = i % 2 == 0
        topic_words = CAREER if career_topic else FAMILY
        masculine = rng.uniform() < (skew if career_topic else 1.0 - skew)
        gender_words = MALE if masculine else FEMALE
        words = [
            pick(gender_words),
            pick(topic_words),
            pick(gender_words),
            pick(topic_words),
            pick(FILLER),
        ]
        sentences.append(" ".join(words))
    return sentences


def write_planted_csv(
    path: str | Path, skew: float, n_sentences: int, seed: int, column: str = "desc"
) -> None:
    """Write a planted corpus as a two-column delimited file."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", column])
    for i, sentence in enumerate(planted_sentences(skew, n_sentences, seed)):
        writer.writerow([i, sentence])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")

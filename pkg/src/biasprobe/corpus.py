"""Domain corpus ingestion, cleaning, and seeded train/test splitting.

Input is a UTF-8 delimiter-separated file (RFC-4180 style, comma
delimiter, quoted fields allowed) with a header row.  One designated
column holds the text.  Cleaned documents are exchanged between pipeline
stages as plain text files, one document per line, with a JSON metadata
sidecar at ``<path>.meta.json``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .rng import SplitMix64

_URL_PREFIXES = ("http://", "https://", "www.")


class Domain(str, Enum):
    NEWS = "news"
    SPORTS = "sports"
    SOCIAL_MEDIA = "social_media"
    ENTERTAINMENT = "entertainment"


@dataclass
class DomainCorpus:
    domain_id: Domain
    documents: list[str]
    source_column: str
    source_path: str

    @property
    def record_count(self) -> int:
        return len(self.documents)


@dataclass
class CorpusSplit:
    train: DomainCorpus
    test: DomainCorpus
    ratio: float
    seed: int
    # positions of train/test documents in the input corpus, for audit
    train_indices: list[int] = field(default_factory=list)
    test_indices: list[int] = field(default_factory=list)


def clean(text: str) -> str:
    """NFC-normalize, drop URL tokens, collapse whitespace. Idempotent.

    A URL token is any whitespace-delimited token whose lowercased form
    starts with ``http://``, ``https://`` or ``www.``.  Devanagari
    codepoints pass through unmodified (NFC is canonical for them).
    """
    text = unicodedata.normalize("NFC", text)
    kept = [t for t in text.split() if not t.lower().startswith(_URL_PREFIXES)]
    return " ".join(kept)


def load_table(path: str | Path, column: str, domain: Domain | str) -> DomainCorpus:
    """Extract one column of a delimited file as a cleaned document list.

    Rows whose cell is empty (or becomes empty after cleaning) are
    dropped.  Raises with the 1-based row number on ragged rows and
    names the available columns when `column` is missing.
    """
    path = Path(path)
    domain = Domain(domain)
    if not path.is_file():
        raise FileNotFoundError(f"corpus file not found: {path}")
    try:
        raw = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ValueError(f"{path} is not valid UTF-8: {exc}") from None

    reader = csv.reader(io.StringIO(raw, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError(f"{path} is empty, expected a header row") from None
    if column not in header:
        raise ValueError(
            f"column not found: {column}; available: {', '.join(header)}"
        )
    col_idx = header.index(column)

    documents = []
    row_no = 1
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            raise ValueError(f"{path}: malformed row {row_no + 1}: {exc}") from None
        row_no += 1
        if not row:
            continue  # blank line
        if len(row) != len(header):
            raise ValueError(
                f"{path}: malformed row {row_no}: expected {len(header)} "
                f"fields, found {len(row)}"
            )
        doc = clean(row[col_idx])
        if doc:
            documents.append(doc)
    return DomainCorpus(
        domain_id=domain,
        documents=documents,
        source_column=column,
        source_path=str(path),
    )


def split(corpus: DomainCorpus, ratio: float, seed: int) -> CorpusSplit:
    """Deterministic shuffled split; train gets floor(ratio * n) documents.

    Documents are shuffled by a Fisher-Yates walk driven by splitmix64
    seeded with `seed` (see the rng module for the exact stream), then
    cut.  Identical (corpus, ratio, seed) reproduce the split exactly.
    """
    if corpus.record_count == 0:
        raise ValueError("cannot split an empty corpus")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")

    indices = list(range(corpus.record_count))
    SplitMix64(seed).shuffle(indices)
    cut = math.floor(ratio * corpus.record_count)
    train_idx, test_idx = indices[:cut], indices[cut:]

    def subset(idx: list[int]) -> DomainCorpus:
        return DomainCorpus(
            domain_id=corpus.domain_id,
            documents=[corpus.documents[i] for i in idx],
            source_column=corpus.source_column,
            source_path=corpus.source_path,
        )

    return CorpusSplit(
        train=subset(train_idx),
        test=subset(test_idx),
        ratio=ratio,
        seed=seed,
        train_indices=train_idx,
        test_indices=test_idx,
    )


def meta_path(path: str | Path) -> Path:
    return Path(str(path) + ".meta.json")


def write_corpus(
    corpus: DomainCorpus,
    path: str | Path,
    seed: int | None = None,
    ratio: float | None = None,
    extra_meta: dict | None = None,
) -> None:
    """Write the interchange file (one document per line, LF) plus sidecar."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in corpus.documents:
            fh.write(doc + "\n")
    meta = {
        "domain_id": corpus.domain_id.value,
        "source_path": corpus.source_path,
        "source_column": corpus.source_column,
        "record_count": corpus.record_count,
        "seed": seed,
        "ratio": ratio,
    }
    if extra_meta:
        meta.update(extra_meta)
    with open(meta_path(path), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2, ensure_ascii=False)
        fh.write("\n")


def read_corpus(path: str | Path, domain: Domain | str | None = None) -> DomainCorpus:
    """Read an interchange file back; sidecar metadata used when present."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"corpus file not found: {path}")
    meta = {}
    if meta_path(path).is_file():
        meta = json.loads(meta_path(path).read_text(encoding="utf-8"))
    if domain is None:
        if "domain_id" not in meta:
            raise ValueError(
                f"{path}: no domain given and no {meta_path(path).name} sidecar"
            )
        domain = meta["domain_id"]
    documents = [
        line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()
    ]
    return DomainCorpus(
        domain_id=Domain(domain),
        documents=documents,
        source_column=meta.get("source_column", ""),
        source_path=meta.get("source_path", str(path)),
    )

"""Word sets and gender pair lists that parameterize the bias metrics.

File formats:

* word set: UTF-8, one token per line, ``#`` starts a comment line,
  blank lines ignored.
* pair list: same, but each line is ``masculine,feminine``.

Default sets ship under ``biasprobe/data/<language>/`` and can be
referenced by name (for example ``en/career``) wherever a word-set path
is accepted.  ``BIASPROBE_DATA_DIR`` overrides the data directory.
The Hindi defaults are editable placeholders, not curated gold lists:
Hindi marks gender mostly through agreement, so reviewing them against
the corpus at hand is expected.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .embed import EmbeddingSpace, lookup
from .rng import SplitMix64
from .tokenization import normalize

_PACKAGE_DATA = Path(__file__).parent / "data"


def data_dir() -> Path:
    return Path(os.environ.get("BIASPROBE_DATA_DIR", _PACKAGE_DATA))


@dataclass
class WordSetSpec:
    name: str
    language: str
    tokens: list[str]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError(f"word set {self.name!r} is empty")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError(f"word set {self.name!r} has duplicate tokens")


@dataclass
class ResolvedWordSet:
    spec: WordSetSpec
    found: list[str]
    dropped: list[str]


@dataclass
class GenderPairList:
    language: str
    pairs: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("gender pair list is empty")
        masc = {m for m, _ in self.pairs}
        fem = {f for _, f in self.pairs}
        both = masc & fem
        if both:
            raise ValueError(f"tokens appear on both sides: {', '.join(sorted(both))}")


def _read_lines(path: Path) -> list[tuple[int, str]]:
    if not path.is_file():
        raise FileNotFoundError(f"word set file not found: {path}")
    out = []
    for no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        out.append((no, line))
    return out


def load_wordset(path: str | Path, name: str | None = None, language: str = "en") -> WordSetSpec:
    """Load one token per line; normalized, deduplicated keeping first occurrence."""
    path = Path(path)
    tokens: list[str] = []
    seen = set()
    for no, line in _read_lines(path):
        token = normalize(line)
        if any(ch.isspace() for ch in token):
            raise ValueError(f"{path}:{no}: token contains whitespace: {line!r}")
        if token not in seen:
            seen.add(token)
            tokens.append(token)
    if not tokens:
        raise ValueError(f"{path}: word set is empty after filtering")
    return WordSetSpec(name=name or path.stem, language=language, tokens=tokens)


def load_pairs(path: str | Path, language: str = "en") -> GenderPairList:
    """Load ``masculine,feminine`` lines into a GenderPairList."""
    path = Path(path)
    pairs = []
    for no, line in _read_lines(path):
        parts = [normalize(p.strip()) for p in line.split(",")]
        if len(parts) != 2 or not all(parts):
            raise ValueError(f"{path}:{no}: expected 'masculine,feminine', got {line!r}")
        if any(any(ch.isspace() for ch in p) for p in parts):
            raise ValueError(f"{path}:{no}: token contains whitespace: {line!r}")
        pairs.append((parts[0], parts[1]))
    return GenderPairList(language=language, pairs=pairs)


def resolve_name(name_or_path: str | Path, suffix: str = ".txt") -> Path:
    """Map a word-set reference to a file: an existing path wins, else a
    data-directory name like ``en/career``."""
    p = Path(name_or_path)
    if p.is_file():
        return p
    candidate = data_dir() / str(name_or_path)
    if candidate.is_file():
        return candidate
    candidate = candidate.with_suffix(suffix)
    if candidate.is_file():
        return candidate
    raise FileNotFoundError(
        f"no word set file {name_or_path!r} (searched literal path and {data_dir()})"
    )


def resolve(space: EmbeddingSpace, spec: WordSetSpec, min_size: int = 2) -> ResolvedWordSet:
    """Partition a word set into found/dropped against a space's vocabulary.

    Raises when fewer than `min_size` tokens resolve, naming the dropped
    tokens so coverage problems are visible instead of silently
    shrinking the test.
    """
    if min_size < 2:
        raise ValueError(f"min_size must be >= 2, got {min_size}")
    found, dropped = [], []
    for token in spec.tokens:
        (found if lookup(space, token) is not None else dropped).append(token)
    if len(found) < min_size:
        raise ValueError(
            f"word set {spec.name!r} resolved to {len(found)} < {min_size} tokens"
            f" (dropped: {', '.join(dropped) or 'none'})"
        )
    return ResolvedWordSet(spec=spec, found=found, dropped=dropped)


def balance(
    x: ResolvedWordSet, y: ResolvedWordSet, seed: int
) -> tuple[ResolvedWordSet, ResolvedWordSet]:
    """Equalize found-set sizes by seeded sampling without replacement.

    The larger set keeps a random subset of the smaller set's size,
    preserving original order; the smaller set is returned unchanged.
    """
    for r in (x, y):
        if len(r.found) < 2:
            raise ValueError(f"set {r.spec.name!r} has fewer than 2 resolved tokens")
    if len(x.found) == len(y.found):
        return x, y

    def shrink(r: ResolvedWordSet, size: int) -> ResolvedWordSet:
        keep = sorted(SplitMix64(seed).sample_indices(len(r.found), size))
        kept = [r.found[i] for i in keep]
        extra = [t for t in r.found if t not in set(kept)]
        return ResolvedWordSet(spec=r.spec, found=kept, dropped=r.dropped + extra)

    target = min(len(x.found), len(y.found))
    if len(x.found) > target:
        return shrink(x, target), y
    return x, shrink(y, target)

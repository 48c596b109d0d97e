"""Embedding spaces, cosine similarity, and the text interchange formats.

The interchange format is word2vec text: a ``<V> <m>`` header line, then
one ``<token> <c1> ... <cm>`` line per vector, single-space separated,
UTF-8, LF line endings.  glove text is the same without the header.
Components are written with shortest round-trip decimal representation,
so save followed by load reproduces vectors exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .tokenization import normalize

Vector = np.ndarray


@dataclass
class EmbeddingSpace:
    """Immutable token-to-vector map with fixed dimensionality.

    Vectors are rows of a float64 matrix; `index` maps token to row.
    """

    dimension: int
    tokens: list[str]
    matrix: np.ndarray
    language: str = "en"
    domain_id: str | None = None
    source: str = ""
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.shape != (len(self.tokens), self.dimension):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match "
                f"{len(self.tokens)} tokens x {self.dimension} dimensions"
            )
        if len(self.tokens) == 0:
            raise ValueError("embedding space has no vectors")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("embedding space contains non-finite components")
        self.index = {}
        for i, tok in enumerate(self.tokens):
            if not tok or any(ch.isspace() for ch in tok):
                raise ValueError(f"invalid token at row {i}: {tok!r}")
            if tok in self.index:
                raise ValueError(f"duplicate token: {tok}")
            self.index[tok] = i
        if not np.any(np.linalg.norm(self.matrix, axis=1) > 0.0):
            raise ValueError("all vectors have zero norm")

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return normalize(token) in self.index

    def vector(self, token: str) -> Vector:
        v = lookup(self, token)
        if v is None:
            raise KeyError(token)
        return v


def cosine(x: Vector, y: Vector) -> float:
    """Cosine similarity in double precision, clamped to [-1, 1].

    Raises on dimension mismatch and on zero-norm operands rather than
    producing NaN.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    nx = math.sqrt(float(np.dot(x, x)))
    ny = math.sqrt(float(np.dot(y, y)))
    if nx == 0.0 or ny == 0.0:
        raise ValueError("cosine undefined for zero-norm vector")
    return min(1.0, max(-1.0, float(np.dot(x, y)) / (nx * ny)))


def lookup(space: EmbeddingSpace, token: str) -> Vector | None:
    """Exact-match lookup after normalization; None when absent."""
    i = space.index.get(normalize(token))
    return None if i is None else space.matrix[i]


def _parse_vector_line(line: str, line_no: int, path: Path) -> tuple[str, list[float]]:
    parts = line.split(" ")
    if len(parts) < 2:
        raise ValueError(f"{path}:{line_no}: expected '<token> <components>'")
    token, raw = parts[0], parts[1:]
    values = []
    for pos, item in enumerate(raw, start=1):
        try:
            v = float(item)
        except ValueError:
            raise ValueError(
                f"{path}:{line_no}: non-numeric component {pos}: {item!r}"
            ) from None
        if not math.isfinite(v):
            raise ValueError(f"{path}:{line_no}: non-finite component {pos}: {item!r}")
        values.append(v)
    return token, values


def load_vectors(
    path: str | Path,
    format: str = "word2vec_text",
    language: str = "en",
    domain_id: str | None = None,
    on_zero_norm: str = "error",
) -> EmbeddingSpace:
    """Read a word2vec_text or glove_text file into an EmbeddingSpace.

    `on_zero_norm` is "error" (default) or "drop"; dropping logs nothing
    here but the dropped tokens simply do not appear in the space.
    """
    if format not in ("word2vec_text", "glove_text"):
        raise ValueError(f"unknown format: {format}")
    if on_zero_norm not in ("error", "drop"):
        raise ValueError(f"on_zero_norm must be 'error' or 'drop', got {on_zero_norm}")
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"vector file not found: {path}")
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ValueError(f"{path} is not valid UTF-8: {exc}") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    start = 0
    expected_v = expected_m = None
    if format == "word2vec_text":
        if not lines:
            raise ValueError(f"{path}: empty file, expected '<V> <m>' header")
        head = lines[0].split(" ")
        if len(head) != 2 or not all(p.isdigit() for p in head):
            raise ValueError(f"{path}:1: malformed header {lines[0]!r}, expected '<V> <m>'")
        expected_v, expected_m = int(head[0]), int(head[1])
        start = 1

    tokens: list[str] = []
    rows: list[list[float]] = []
    dim = expected_m
    seen: set[str] = set()
    for offset, line in enumerate(lines[start:]):
        line_no = start + offset + 1
        token, values = _parse_vector_line(line, line_no, path)
        if dim is None:
            dim = len(values)
        if len(values) != dim:
            raise ValueError(
                f"{path}:{line_no}: expected {dim} components, found {len(values)}"
            )
        if token in seen:
            raise ValueError(f"{path}:{line_no}: duplicate token: {token}")
        seen.add(token)
        if on_zero_norm == "drop" and all(v == 0.0 for v in values):
            continue
        tokens.append(token)
        rows.append(values)

    if expected_v is not None and len(seen) != expected_v:
        raise ValueError(
            f"{path}: header declares {expected_v} vectors, found {len(seen)}"
        )
    if not tokens:
        raise ValueError(f"{path}: no vectors loaded")
    matrix = np.array(rows, dtype=np.float64)
    if on_zero_norm == "error" and np.any(np.linalg.norm(matrix, axis=1) == 0.0):
        bad = [tokens[i] for i in np.flatnonzero(np.linalg.norm(matrix, axis=1) == 0.0)]
        raise ValueError(f"{path}: zero-norm vectors for tokens: {', '.join(bad)}")
    return EmbeddingSpace(
        dimension=int(dim),
        tokens=tokens,
        matrix=matrix,
        language=language,
        domain_id=domain_id,
        source=str(path),
    )


def save_vectors(space: EmbeddingSpace, path: str | Path) -> None:
    """Write word2vec_text with lexicographic token order (deterministic)."""
    if len(space) == 0:
        raise ValueError("refusing to write an empty embedding space")
    for tok in space.tokens:
        if any(ch.isspace() for ch in tok):
            raise ValueError(f"token not representable in word2vec text: {tok!r}")
    path = Path(path)
    order = sorted(range(len(space.tokens)), key=lambda i: space.tokens[i])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(space.tokens)} {space.dimension}\n")
        for i in order:
            comps = " ".join(repr(float(c)) for c in space.matrix[i])
            fh.write(f"{space.tokens[i]} {comps}\n")

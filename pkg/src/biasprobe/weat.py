"""Word Embedding Association Test: statistic, effect size, permutation p.

For target sets X, Y and attribute sets A, B, each target word w gets an
association s(w, A, B) = mean_a cos(w, a) - mean_b cos(w, b).  The test
statistic is S = sum_X s - sum_Y s and the effect size is the mean
difference of associations standardized by the sample (n-1) standard
deviation over X union Y.

Significance comes from re-partitioning X union Y into equal halves:
exact mode enumerates all C(2n, n) partitions, Monte-Carlo mode samples
them by seeded Fisher-Yates shuffles with one derived seed per
iteration, so the returned p is identical no matter how the iterations
are scheduled.  Ties count as extreme (>=), so the observed partition
always counts and p is never zero; this is the conservative variant of
the usual strict inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .embed import EmbeddingSpace, cosine, lookup
from .lexicon import ResolvedWordSet, WordSetSpec, balance, resolve
from .rng import derive_seed

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)


@dataclass
class WeatConfig:
    method: str = "auto"  # auto | exact | monte_carlo
    max_exact: int = 200_000
    iterations: int = 10_000
    seed: int = 0
    balance: bool = False
    min_size: int = 2

    def __post_init__(self):
        if self.method not in ("auto", "exact", "monte_carlo"):
            raise ValueError(f"unknown p-value method: {self.method}")


@dataclass
class WeatInput:
    x: ResolvedWordSet
    y: ResolvedWordSet
    a: ResolvedWordSet
    b: ResolvedWordSet
    space: EmbeddingSpace

    def __post_init__(self):
        nx, ny = len(self.x.found), len(self.y.found)
        if nx != ny:
            raise ValueError(
                f"target sets must have equal size after resolution: "
                f"|{self.x.spec.name}|={nx}, |{self.y.spec.name}|={ny} "
                f"(enable balancing or edit the sets)"
            )
        if nx < 2:
            raise ValueError("target sets need at least 2 resolved tokens")
        if len(self.a.found) < 2 or len(self.b.found) < 2:
            raise ValueError("attribute sets need at least 2 resolved tokens")
        overlap = set(self.x.found) & set(self.y.found)
        if overlap:
            raise ValueError(
                f"target sets overlap: {', '.join(sorted(overlap))}"
            )


@dataclass
class WeatResult:
    statistic: float
    effect_size: float
    p_value: float
    method: str
    n_partitions_evaluated: int
    seed: int | None
    per_word_associations: dict[str, float]
    dropped_tokens: dict[str, list[str]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "effect_size": self.effect_size,
            "p_value": self.p_value,
            "method": self.method,
            "n_partitions_evaluated": self.n_partitions_evaluated,
            "seed": self.seed,
            "per_word_associations": dict(self.per_word_associations),
            "dropped_tokens": {k: list(v) for k, v in self.dropped_tokens.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WeatResult":
        return cls(
            statistic=data["statistic"],
            effect_size=data["effect_size"],
            p_value=data["p_value"],
            method=data["method"],
            n_partitions_evaluated=data["n_partitions_evaluated"],
            seed=data["seed"],
            per_word_associations=dict(data["per_word_associations"]),
            dropped_tokens={k: list(v) for k, v in data["dropped_tokens"].items()},
        )


def association(w: str, a: ResolvedWordSet, b: ResolvedWordSet, space: EmbeddingSpace) -> float:
    """s(w, A, B): difference of mean cosines, accumulated with fsum so the
    value is independent of set iteration order and negates exactly when
    A and B swap."""
    wv = lookup(space, w)
    if wv is None:
        raise ValueError(f"token not in embedding space: {w}")
    mean_a = math.fsum(cosine(wv, lookup(space, t)) for t in a.found) / len(a.found)
    mean_b = math.fsum(cosine(wv, lookup(space, t)) for t in b.found) / len(b.found)
    return mean_a - mean_b


def _associations(inp: WeatInput) -> dict[str, float]:
    return {
        w: association(w, inp.a, inp.b, inp.space)
        for w in (*inp.x.found, *inp.y.found)
    }


def test_statistic(inp: WeatInput, assoc: dict[str, float] | None = None) -> float:
    assoc = assoc if assoc is not None else _associations(inp)
    return math.fsum(assoc[w] for w in inp.x.found) - math.fsum(
        assoc[w] for w in inp.y.found
    )


def effect_size(inp: WeatInput, assoc: dict[str, float] | None = None) -> float:
    """Standardized mean association difference (sample stdev, n-1)."""
    assoc = assoc if assoc is not None else _associations(inp)
    xs = [assoc[w] for w in inp.x.found]
    ys = [assoc[w] for w in inp.y.found]
    pooled = xs + ys
    mean = math.fsum(pooled) / len(pooled)
    ss = math.fsum((v - mean) ** 2 for v in pooled)
    if ss == 0.0:
        raise ValueError(
            "degenerate variance: all associations are equal, effect size undefined"
        )
    sd = math.sqrt(ss / (len(pooled) - 1))
    return (math.fsum(xs) / len(xs) - math.fsum(ys) / len(ys)) / sd


def _np_mix64(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> _U64(30))
    z = z * _U64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> _U64(27))
    z = z * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


def _mc_partition_sums(pooled: np.ndarray, n: int, iterations: int, seed: int) -> np.ndarray:
    """Sum over the X side of `iterations` random equal partitions.

    Iteration i shuffles the pooled associations with a splitmix64
    Fisher-Yates walk seeded with derive_seed(seed, i) and takes the
    first n entries; vectorized across iterations but bit-identical to
    running the scalar generator per iteration.
    """
    size = pooled.shape[0]
    counters = np.arange(1, iterations + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        states = _np_mix64(_U64(seed & (2**64 - 1)) + counters * _GOLDEN)
        perm = np.tile(np.arange(size, dtype=np.intp), (iterations, 1))
        rows = np.arange(iterations)
        for i in range(size - 1, 0, -1):
            states = states + _GOLDEN
            draws = (_np_mix64(states) % _U64(i + 1)).astype(np.intp)
            cur = perm[rows, i].copy()
            perm[rows, i] = perm[rows, draws]
            perm[rows, draws] = cur
    return pooled[perm[:, :n]].sum(axis=1)


def p_value(
    inp: WeatInput,
    method: str = "auto",
    max_exact: int = 200_000,
    iterations: int = 10_000,
    seed: int = 0,
    assoc: dict[str, float] | None = None,
) -> tuple[float, str, int]:
    """One-sided permutation p for the observed statistic.

    Returns (p, method_used, n_partitions_evaluated).  Exact mode runs
    when chosen or when C(2n, n) <= max_exact under "auto"; it returns
    count(S_i >= S_obs) / C(2n, n).  Monte-Carlo returns
    (1 + count) / (1 + iterations).  The observed statistic is evaluated
    through the same summation path as the permuted ones, so the
    identity partition always ties with itself.
    """
    assoc = assoc if assoc is not None else _associations(inp)
    n = len(inp.x.found)
    pooled = np.array(
        [assoc[w] for w in (*inp.x.found, *inp.y.found)], dtype=np.float64
    )
    total_exact = math.comb(2 * n, n)
    if method == "auto":
        method = "exact" if total_exact <= max_exact else "monte_carlo"

    if method == "exact":
        combos = np.fromiter(
            (i for combo in combinations(range(2 * n), n) for i in combo),
            dtype=np.intp,
            count=total_exact * n,
        ).reshape(total_exact, n)
        sums = pooled[combos].sum(axis=1)
        # combinations() yields (0..n-1) first: the identity partition
        count = int(np.count_nonzero(sums >= sums[0]))
        return count / total_exact, "exact", total_exact

    if method == "monte_carlo":
        if iterations < 100:
            raise ValueError(
                f"monte_carlo needs at least 100 iterations, got {iterations}"
            )
        sums = _mc_partition_sums(pooled, n, iterations, seed)
        observed = pooled[np.arange(n, dtype=np.intp)[None, :]].sum(axis=1)[0]
        count = int(np.count_nonzero(sums >= observed))
        return (1 + count) / (1 + iterations), "monte_carlo", iterations + 1

    raise ValueError(f"unknown p-value method: {method}")


def run_weat(
    space: EmbeddingSpace,
    x: WordSetSpec,
    y: WordSetSpec,
    a: WordSetSpec,
    b: WordSetSpec,
    config: WeatConfig | None = None,
) -> WeatResult:
    """Resolve the four sets against `space`, then compute S, d, and p."""
    cfg = config or WeatConfig()
    rx = resolve(space, x, cfg.min_size)
    ry = resolve(space, y, cfg.min_size)
    ra = resolve(space, a, cfg.min_size)
    rb = resolve(space, b, cfg.min_size)
    if cfg.balance:
        rx, ry = balance(rx, ry, cfg.seed)
    inp = WeatInput(x=rx, y=ry, a=ra, b=rb, space=space)
    assoc = _associations(inp)
    p, method_used, n_evaluated = p_value(
        inp,
        method=cfg.method,
        max_exact=cfg.max_exact,
        iterations=cfg.iterations,
        seed=cfg.seed,
        assoc=assoc,
    )
    return WeatResult(
        statistic=test_statistic(inp, assoc),
        effect_size=effect_size(inp, assoc),
        p_value=p,
        method=method_used,
        n_partitions_evaluated=n_evaluated,
        seed=cfg.seed if method_used == "monte_carlo" else None,
        per_word_associations=assoc,
        dropped_tokens={
            "x": rx.dropped,
            "y": ry.dropped,
            "a": ra.dropped,
            "b": rb.dropped,
        },
    )

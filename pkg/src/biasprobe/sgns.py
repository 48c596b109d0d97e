"""Skip-gram negative sampling, trained from scratch on a domain corpus.

Desk-scale replacement for extracting vectors from a large translation
model: the bias metrics only need one vector per word, so any
well-trained embedding space slots in.  Single-threaded training is
bit-for-bit reproducible from (corpus, config); the optional multi-worker
mode uses lock-free racy updates and is explicitly nondeterministic.

Deterministic mode consumes one splitmix64 stream seeded with
``config.seed`` in this exact order: input-matrix initialization
(row-major uniform draws), then per epoch, per document: one keep draw
per in-vocab token occurrence, then per kept position one window draw
``b = 1 + next_below(window)``, then per (center, context) pair
``negatives`` noise draws (a draw equal to the context index is
discarded).  Documents are visited in corpus order; windows never cross
document boundaries.
"""

from __future__ import annotations

import math
import threading
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .embed import EmbeddingSpace
from .rng import SplitMix64, derive_seed


@dataclass
class SgnsConfig:
    dimension: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    subsample_threshold: float = 1e-4
    min_count: int = 5
    seed: int = 0
    drop_digit_tokens: bool = True
    workers: int = 1

    def __post_init__(self):
        positive = {
            "dimension": self.dimension,
            "window": self.window,
            "negatives": self.negatives,
            "epochs": self.epochs,
            "initial_learning_rate": self.initial_learning_rate,
            "min_learning_rate": self.min_learning_rate,
            "subsample_threshold": self.subsample_threshold,
            "min_count": self.min_count,
            "workers": self.workers,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")

    def provenance(self) -> str:
        return (
            f"sgns(dim={self.dimension},window={self.window},k={self.negatives},"
            f"epochs={self.epochs},lr0={self.initial_learning_rate},"
            f"min_lr={self.min_learning_rate},t={self.subsample_threshold},"
            f"min_count={self.min_count},seed={self.seed},workers={self.workers})"
        )


@dataclass
class Vocab:
    tokens: list[str]  # dense index order: descending count, ties lexicographic
    counts: dict[str, int]
    total_tokens: int
    min_count: int
    noise_distribution: np.ndarray = field(repr=False)

    @property
    def index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)


def build_vocab(
    documents: Iterable[Sequence[str]],
    min_count: int,
    drop_digit_tokens: bool = True,
) -> Vocab:
    """Count tokens, filter rare ones, build the unigram^0.75 noise table."""
    counts = Counter()
    for doc in documents:
        counts.update(doc)
    if not counts:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    if drop_digit_tokens:
        counts = Counter({t: c for t, c in counts.items() if not t.isdigit()})
    kept = {t: c for t, c in counts.items() if c >= min_count}
    if not kept:
        raise ValueError(
            f"vocabulary is empty after filtering (min_count={min_count})"
        )
    tokens = sorted(kept, key=lambda t: (-kept[t], t))
    weights = np.array([kept[t] for t in tokens], dtype=np.float64) ** 0.75
    return Vocab(
        tokens=tokens,
        counts=kept,
        total_tokens=sum(kept.values()),
        min_count=min_count,
        noise_distribution=weights / weights.sum(),
    )


def _sigmoid(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _log_sigmoid(x: float) -> float:
    if x >= 0.0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


def sgns_step(
    center: np.ndarray,
    context: np.ndarray,
    negatives: Sequence[np.ndarray],
    lr: float,
) -> float:
    """One SGD step on -log s(u_ctx.v_c) - sum(log s(-u_neg.v_c)).

    Returns the loss at the current parameters, then updates `center`
    (input matrix row) and `context`/`negatives` (output matrix rows) in
    place.  All gradients are evaluated at the pre-update values.
    """
    if lr <= 0.0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    if context.shape != center.shape or any(n.shape != center.shape for n in negatives):
        raise ValueError("dimension mismatch between center, context, and negatives")

    pos_dot = float(np.dot(context, center))
    neg_dots = [float(np.dot(n, center)) for n in negatives]
    loss = -_log_sigmoid(pos_dot) - math.fsum(_log_sigmoid(-d) for d in neg_dots)

    g_pos = _sigmoid(pos_dot) - 1.0  # d loss / d (context . center)
    g_negs = [_sigmoid(d) for d in neg_dots]

    grad_center = g_pos * context
    for g, neg in zip(g_negs, negatives):
        grad_center += g * neg
    context -= (lr * g_pos) * center
    for g, neg in zip(g_negs, negatives):
        neg -= (lr * g) * center
    center -= lr * grad_center
    return loss


class _Trainer:
    def __init__(self, documents: Sequence[Sequence[str]], config: SgnsConfig):
        self.cfg = config
        self.docs = documents
        self.vocab = build_vocab(documents, config.min_count, config.drop_digit_tokens)
        index = self.vocab.index
        self.doc_ids = [
            [index[t] for t in doc if t in index] for doc in documents
        ]
        self.total_occurrences = sum(len(d) for d in self.doc_ids)
        freqs = (
            np.array([self.vocab.counts[t] for t in self.vocab.tokens], dtype=np.float64)
            / self.vocab.total_tokens
        )
        t = config.subsample_threshold
        self.keep_prob = np.minimum(1.0, np.sqrt(t / freqs) + t / freqs)
        self.noise_cum = np.cumsum(self.vocab.noise_distribution)
        m = config.dimension
        rng = SplitMix64(config.seed)
        self.input = np.empty((len(self.vocab), m), dtype=np.float64)
        for i in range(len(self.vocab)):
            for j in range(m):
                self.input[i, j] = (rng.uniform() - 0.5) / m
        self.output = np.zeros((len(self.vocab), m), dtype=np.float64)
        self.rng = rng

    def _lr(self, scanned: int) -> float:
        span = self.cfg.epochs * max(1, self.total_occurrences)
        progress = min(1.0, scanned / span)
        lr = self.cfg.initial_learning_rate * (1.0 - progress) + (
            self.cfg.min_learning_rate * progress
        )
        return max(lr, self.cfg.min_learning_rate)

    def _train_document(
        self, ids: list[int], rng: SplitMix64, lr: float
    ) -> tuple[float, int]:
        cfg = self.cfg
        kept = [w for w in ids if rng.uniform() < self.keep_prob[w]]
        loss, steps = 0.0, 0
        for pos, center_id in enumerate(kept):
            b = 1 + rng.next_below(cfg.window)
            lo, hi = max(0, pos - b), min(len(kept), pos + b + 1)
            for ctx_pos in range(lo, hi):
                if ctx_pos == pos:
                    continue
                ctx_id = kept[ctx_pos]
                negs = []
                last = len(self.noise_cum) - 1
                for _ in range(cfg.negatives):
                    neg = min(
                        int(np.searchsorted(self.noise_cum, rng.uniform(), side="right")),
                        last,
                    )
                    if neg != ctx_id:
                        negs.append(neg)
                loss += sgns_step(
                    self.input[center_id],
                    self.output[ctx_id],
                    [self.output[n] for n in negs],
                    lr,
                )
                steps += 1
        return loss, steps

    def run(self, epoch_losses: list[float] | None = None) -> None:
        scanned = 0
        for _ in range(self.cfg.epochs):
            epoch_loss, epoch_steps = 0.0, 0
            for ids in self.doc_ids:
                lr = self._lr(scanned)
                scanned += len(ids)
                loss, steps = self._train_document(ids, self.rng, lr)
                epoch_loss += loss
                epoch_steps += steps
            if epoch_losses is not None:
                epoch_losses.append(epoch_loss / epoch_steps if epoch_steps else 0.0)

    def run_parallel(self, epoch_losses: list[float] | None = None) -> None:
        # Lock-free racy updates over document shards: nondeterministic by
        # design, excluded from the reproducibility contract.
        workers = self.cfg.workers
        shards = [self.doc_ids[w::workers] for w in range(workers)]
        totals = [sum(len(d) for d in shard) for shard in shards]
        for epoch in range(self.cfg.epochs):
            results = [(0.0, 0)] * workers

            def work(w: int) -> None:
                rng = SplitMix64(derive_seed(self.cfg.seed, epoch * workers + w))
                scanned = epoch * self.total_occurrences
                loss_sum, step_sum = 0.0, 0
                for ids in shards[w]:
                    lr = self._lr(scanned)
                    scanned += len(ids) * max(1, self.total_occurrences // max(1, totals[w]))
                    loss, steps = self._train_document(ids, rng, lr)
                    loss_sum += loss
                    step_sum += steps
                results[w] = (loss_sum, step_sum)

            threads = [threading.Thread(target=work, args=(w,)) for w in range(workers)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            total_loss = sum(r[0] for r in results)
            total_steps = sum(r[1] for r in results)
            if epoch_losses is not None:
                epoch_losses.append(total_loss / total_steps if total_steps else 0.0)


def train(
    documents: Sequence[Sequence[str]],
    config: SgnsConfig,
    language: str = "en",
    domain_id: str | None = None,
    epoch_losses: list[float] | None = None,
) -> EmbeddingSpace:
    """Train and return the input-matrix vectors as an EmbeddingSpace.

    `documents` is a sequence of token lists (one per document).  When
    `epoch_losses` is given, the mean per-step loss of each epoch is
    appended to it.
    """
    documents = list(documents)
    trainer = _Trainer(documents, config)
    if config.workers == 1:
        trainer.run(epoch_losses)
    else:
        trainer.run_parallel(epoch_losses)
    return EmbeddingSpace(
        dimension=config.dimension,
        tokens=list(trainer.vocab.tokens),
        matrix=trainer.input,
        language=language,
        domain_id=domain_id,
        source=config.provenance(),
    )

import math

import numpy as np
import pytest

from biasprobe.embed import cosine
from biasprobe.sgns import SgnsConfig, Vocab, _Trainer, build_vocab, sgns_step, train


def numeric_gradient(center, context, negatives, h=1e-5):
    """Central finite-difference oracle for the step loss.

    Evaluates the loss (without any update) at perturbed parameter
    values, independently of the analytic gradient path.
    """

    def loss_at(c, ctx, negs):
        def log_sigma(z):
            return -math.log1p(math.exp(-z)) if z >= 0 else z - math.log1p(math.exp(z))

        total = -log_sigma(float(np.dot(ctx, c)))
        for n in negs:
            total -= log_sigma(-float(np.dot(n, c)))
        return total

    params = [center, context, *negatives]
    grads = []
    for which in range(len(params)):
        g = np.zeros_like(params[which])
        for j in range(len(g)):
            bumped = [p.copy() for p in params]
            bumped[which][j] += h
            up = loss_at(bumped[0], bumped[1], bumped[2:])
            bumped = [p.copy() for p in params]
            bumped[which][j] -= h
            down = loss_at(bumped[0], bumped[1], bumped[2:])
            g[j] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def analytic_gradient(center, context, negatives, lr=0.5):
    """Recover the analytic gradient from sgns_step's parameter updates."""
    params = [center.copy(), context.copy(), *[n.copy() for n in negatives]]
    before = [p.copy() for p in params]
    sgns_step(params[0], params[1], params[2:], lr)
    return [(b - a) / lr for b, a in zip(before, params)]


class TestVocab:
    def test_min_count_threshold(self):
        v = build_vocab([["a", "a", "b"]], min_count=2)
        assert v.tokens == ["a"]
        assert v.counts == {"a": 2}

    def test_tie_break_lexicographic(self):
        v = build_vocab([["a", "b", "c"]], min_count=1)
        assert v.tokens == ["a", "b", "c"]

    def test_count_order_dominates(self):
        v = build_vocab([["z", "z", "a"]], min_count=1)
        assert v.tokens == ["z", "a"]

    def test_empty_after_filter(self):
        with pytest.raises(ValueError, match="empty"):
            build_vocab([["a"]], min_count=2)

    def test_empty_corpus(self):
        with pytest.raises(ValueError, match="empty"):
            build_vocab([], min_count=1)

    def test_digit_tokens_dropped_by_default(self):
        v = build_vocab([["a", "42", "a", "42"]], min_count=1)
        assert v.tokens == ["a"]
        kept = build_vocab([["a", "42"]], min_count=1, drop_digit_tokens=False)
        assert "42" in kept.tokens

    def test_noise_distribution_normalized_and_powered(self):
        v = build_vocab([["a"] * 16 + ["b"]], min_count=1)
        assert v.noise_distribution.sum() == pytest.approx(1.0, abs=1e-9)
        # counts 16 and 1 -> weights 8 and 1
        assert v.noise_distribution[0] == pytest.approx(8 / 9, abs=1e-12)


class TestStep:
    def test_loss_all_zero_dots_k1(self):
        loss = sgns_step(np.zeros(4), np.zeros(4), [np.zeros(4)], 0.025)
        assert loss == pytest.approx(2 * math.log(2), abs=1e-12)

    def test_loss_all_zero_dots_k5(self):
        loss = sgns_step(np.zeros(4), np.zeros(4), [np.zeros(4)] * 5, 0.025)
        assert loss == pytest.approx(6 * math.log(2), abs=1e-12)

    def test_loss_nonnegative_random(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            loss = sgns_step(
                rng.normal(size=6), rng.normal(size=6), [rng.normal(size=6)], 0.01
            )
            assert loss >= 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            sgns_step(np.zeros(3), np.zeros(4), [], 0.1)

    @pytest.mark.parametrize("seed", range(25))
    def test_gradient_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 8))
        k = int(rng.integers(1, 5))
        center = rng.normal(scale=0.5, size=dim)
        context = rng.normal(scale=0.5, size=dim)
        negatives = [rng.normal(scale=0.5, size=dim) for _ in range(k)]
        numeric = numeric_gradient(center, context, negatives)
        analytic = analytic_gradient(center, context, negatives)
        for num, ana in zip(numeric, analytic):
            rel = np.abs(ana - num) / np.maximum(1.0, np.abs(ana))
            assert rel.max() < 1e-5

    def test_updates_reduce_loss_locally(self):
        rng = np.random.default_rng(1)
        center = rng.normal(size=5)
        context = rng.normal(size=5)
        negs = [rng.normal(size=5) for _ in range(3)]
        first = sgns_step(center, context, negs, 0.1)
        second = sgns_step(center, context, negs, 0.1)
        assert second < first


def _repeat_docs(docs, times):
    return [list(d) for _ in range(times) for d in docs]


class TestTrain:
    CORPUS = _repeat_docs(
        [
            ["the", "cat", "sat", "on", "the", "mat"],
            ["the", "dog", "ran", "to", "the", "cat"],
            ["a", "bird", "flew", "over", "a", "dog"],
        ],
        40,
    )

    def _config(self, **kw):
        base = dict(
            dimension=12,
            window=2,
            negatives=3,
            epochs=2,
            min_count=1,
            subsample_threshold=1.0,
            seed=11,
        )
        base.update(kw)
        return SgnsConfig(**base)

    def test_epoch_loss_decreases(self):
        losses = []
        train(self.CORPUS, self._config(), epoch_losses=losses)
        assert len(losses) == 2
        assert losses[1] < losses[0]

    def test_bitwise_determinism(self):
        a = train(self.CORPUS, self._config())
        b = train(self.CORPUS, self._config())
        assert a.tokens == b.tokens
        assert np.array_equal(a.matrix, b.matrix)

    def test_seed_changes_vectors(self):
        a = train(self.CORPUS, self._config())
        b = train(self.CORPUS, self._config(seed=12))
        assert not np.array_equal(a.matrix, b.matrix)

    def test_provenance_recorded(self):
        space = train(self.CORPUS, self._config())
        assert "sgns(" in space.source and "seed=11" in space.source

    def test_subsample_keeps_rare_tokens(self):
        # with threshold 1.0 every frequency is <= t, nothing is dropped:
        # every in-vocab occurrence must contribute context pairs
        losses = []
        cfg = self._config(subsample_threshold=1.0, epochs=1)
        train(self.CORPUS, cfg, epoch_losses=losses)
        assert losses[0] > 0.0

    def test_subsample_keep_probability_formula(self):
        # tokens at or below the threshold frequency are never dropped;
        # frequent tokens keep with probability sqrt(t/f) + t/f
        docs = [["a"] * 50 + ["b"] * 10 + ["c"] * 2]
        t = 0.05
        trainer = _Trainer(docs, self._config(subsample_threshold=t, epochs=1))
        total = trainer.vocab.total_tokens
        for token, keep in zip(trainer.vocab.tokens, trainer.keep_prob):
            f = trainer.vocab.counts[token] / total
            if f <= t:
                assert keep == 1.0
            else:
                assert keep == pytest.approx(math.sqrt(t / f) + t / f, abs=1e-12)
        assert trainer.keep_prob[trainer.vocab.index["a"]] < 1.0

    def test_planted_adjacent_pairs_align(self):
        # xi and yi are always adjacent and the pair block repeats, so the
        # two tokens share context distributions; their vectors should end
        # up far more similar than unrelated token pairs
        rng = np.random.default_rng(3)
        n_pairs, occurrences = 100, 200
        docs = []
        for _ in range(occurrences):
            for i in rng.permutation(n_pairs):
                docs.append([f"x{i}", f"y{i}", f"x{i}", f"y{i}"])
        cfg = SgnsConfig(
            dimension=20,
            window=2,
            negatives=4,
            epochs=2,
            min_count=1,
            subsample_threshold=1.0,
            seed=5,
        )
        space = train(docs, cfg)
        paired = [
            cosine(space.vector(f"x{i}"), space.vector(f"y{i}"))
            for i in range(n_pairs)
        ]
        unpaired = []
        for i in range(n_pairs):
            for j in range(n_pairs):
                if i != j:
                    unpaired.append(cosine(space.vector(f"x{i}"), space.vector(f"y{j}")))
        threshold = np.percentile(unpaired, 95)
        assert np.median(paired) > threshold

    def test_parallel_mode_runs(self):
        space = train(self.CORPUS, self._config(workers=2))
        assert len(space) == len(build_vocab(self.CORPUS, 1))

    def test_config_validation(self):
        with pytest.raises(ValueError, match="window"):
            SgnsConfig(window=0)
        with pytest.raises(ValueError, match="negatives"):
            SgnsConfig(negatives=0)

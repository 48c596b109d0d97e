import json
import math

import numpy as np
import pytest

from biasprobe.embed import EmbeddingSpace
from biasprobe.lexicon import WordSetSpec, resolve
from biasprobe.rng import SplitMix64, derive_seed
from biasprobe.weat import (
    WeatConfig,
    WeatInput,
    WeatResult,
    _mc_partition_sums,
    association,
    effect_size,
    p_value,
    run_weat,
)
from biasprobe.weat import test_statistic as weat_statistic

from oracles import naive_weat


def make_space(vectors: dict[str, list[float]]) -> EmbeddingSpace:
    tokens = list(vectors)
    matrix = np.array([vectors[t] for t in tokens], dtype=np.float64)
    return EmbeddingSpace(dimension=matrix.shape[1], tokens=tokens, matrix=matrix)


def make_input(space, x, y, a, b) -> WeatInput:
    def rs(name, toks):
        return resolve(space, WordSetSpec(name, "en", list(toks)), min_size=2)

    return WeatInput(x=rs("x", x), y=rs("y", y), a=rs("a", a), b=rs("b", b), space=space)


# space engineered so assoc(x*) = +1 and assoc(y*) = -1
POLAR = make_space(
    {
        "x1": [1.0, 0.0],
        "x2": [1.0, 0.0],
        "y1": [0.0, 1.0],
        "y2": [0.0, 1.0],
        "a1": [1.0, 0.0],
        "a2": [1.0, 0.0],
        "b1": [0.0, 1.0],
        "b2": [0.0, 1.0],
    }
)
POLAR_INPUT = make_input(POLAR, ["x1", "x2"], ["y1", "y2"], ["a1", "a2"], ["b1", "b2"])


def random_input(seed, n=4, n_attr=4, dim=8):
    rng = np.random.default_rng(seed)
    names = (
        [f"x{i}" for i in range(n)]
        + [f"y{i}" for i in range(n)]
        + [f"a{i}" for i in range(n_attr)]
        + [f"b{i}" for i in range(n_attr)]
    )
    space = make_space({t: rng.normal(size=dim).tolist() for t in names})
    return make_input(
        space,
        [f"x{i}" for i in range(n)],
        [f"y{i}" for i in range(n)],
        [f"a{i}" for i in range(n_attr)],
        [f"b{i}" for i in range(n_attr)],
    )


class TestAssociation:
    def test_opposite_attribute_poles(self):
        inp = POLAR_INPUT
        assert association("x1", inp.a, inp.b, inp.space) == pytest.approx(1.0, abs=1e-15)

    def test_equal_attribute_sets_give_zero(self):
        space = make_space(
            {"w": [1.0, 2.0], "a1": [1.0, 0.0], "a2": [0.5, 1.0], "b1": [1.0, 0.0], "b2": [0.5, 1.0]}
        )
        inp = make_input(space, ["w", "a1"], ["a2", "b1"], ["a1", "a2"], ["b1", "b2"])
        # a and b hold identical vectors pairwise
        assert association("w", inp.a, inp.b, space) == 0.0

    def test_symmetric_word_scores_zero(self):
        space = make_space({"w": [1.0, 1.0], "a1": [1.0, 0.0], "a2": [1.0, 0.0], "b1": [0.0, 1.0], "b2": [0.0, 1.0]})
        inp = make_input(space, ["w", "a1"], ["b1", "b2"], ["a1", "a2"], ["b1", "b2"])
        assert association("w", inp.a, inp.b, space) == pytest.approx(0.0, abs=1e-15)

    def test_absent_token_is_error(self):
        inp = POLAR_INPUT
        with pytest.raises(ValueError, match="not in embedding space"):
            association("ghost", inp.a, inp.b, inp.space)


class TestStatistic:
    def test_polar_statistic_is_four(self):
        assert weat_statistic(POLAR_INPUT) == pytest.approx(4.0, abs=1e-12)

    def test_swapping_targets_negates_exactly(self):
        inp = POLAR_INPUT
        swapped = WeatInput(x=inp.y, y=inp.x, a=inp.a, b=inp.b, space=inp.space)
        assert weat_statistic(swapped) == -weat_statistic(inp)

    def test_swapping_attributes_negates_exactly(self):
        for seed in range(10):
            inp = random_input(seed)
            swapped = WeatInput(x=inp.x, y=inp.y, a=inp.b, b=inp.a, space=inp.space)
            assert weat_statistic(swapped) == -weat_statistic(inp)


class TestEffectSize:
    def test_polar_effect_size(self):
        # numerator 2, stdev over {1,1,-1,-1} is sqrt(4/3)
        expected = 2.0 / math.sqrt(4.0 / 3.0)
        assert effect_size(POLAR_INPUT) == pytest.approx(expected, abs=1e-12)
        assert effect_size(POLAR_INPUT) == pytest.approx(math.sqrt(3.0), abs=1e-12)

    def test_identical_association_multisets_give_zero(self):
        space = make_space(
            {
                "x1": [1.0, 0.0],
                "x2": [0.0, 1.0],
                "y1": [1.0, 0.0],
                "y2": [0.0, 1.0],
                "a1": [1.0, 0.0],
                "a2": [1.0, 0.0],
                "b1": [0.0, 1.0],
                "b2": [0.0, 1.0],
            }
        )
        inp = make_input(space, ["x1", "x2"], ["y1", "y2"], ["a1", "a2"], ["b1", "b2"])
        assert effect_size(inp) == 0.0
        assert weat_statistic(inp) == 0.0

    def test_degenerate_variance_is_error(self):
        with pytest.raises(ValueError, match="degenerate variance"):
            space = make_space(
                {
                    "x1": [1.0, 0.0],
                    "x2": [1.0, 0.0],
                    "y1": [1.0, 0.0],
                    "y2": [1.0, 0.0],
                    "a1": [1.0, 0.0],
                    "a2": [1.0, 0.0],
                    "b1": [0.0, 1.0],
                    "b2": [0.0, 1.0],
                }
            )
            effect_size(make_input(space, ["x1", "x2"], ["y1", "y2"], ["a1", "a2"], ["b1", "b2"]))

    def test_swaps_negate_exactly(self):
        for seed in range(10):
            inp = random_input(seed)
            xy = WeatInput(x=inp.y, y=inp.x, a=inp.a, b=inp.b, space=inp.space)
            ab = WeatInput(x=inp.x, y=inp.y, a=inp.b, b=inp.a, space=inp.space)
            d = effect_size(inp)
            assert effect_size(xy) == -d
            assert effect_size(ab) == -d


class TestPValue:
    def test_polar_exact_p_is_one_sixth(self):
        p, method, n_eval = p_value(POLAR_INPUT, method="exact")
        assert method == "exact"
        assert n_eval == 6
        assert p == pytest.approx(1 / 6, abs=1e-15)

    def test_all_equal_associations_tie_to_one(self):
        space = make_space(
            {
                "x1": [1.0, 0.0],
                "x2": [1.0, 0.0],
                "y1": [1.0, 0.0],
                "y2": [1.0, 0.0],
                "a1": [1.0, 0.0],
                "a2": [1.0, 0.0],
                "b1": [0.0, 1.0],
                "b2": [0.0, 1.0],
            }
        )
        inp = make_input(space, ["x1", "x2"], ["y1", "y2"], ["a1", "a2"], ["b1", "b2"])
        p, _, _ = p_value(inp, method="exact")
        assert p == 1.0

    def test_auto_selects_exact_below_threshold(self):
        _, method, n_eval = p_value(random_input(0, n=4), method="auto", max_exact=200_000)
        assert method == "exact" and n_eval == math.comb(8, 4)

    def test_auto_selects_monte_carlo_above_threshold(self):
        _, method, _ = p_value(
            random_input(0, n=4), method="auto", max_exact=10, iterations=200, seed=1
        )
        assert method == "monte_carlo"

    def test_monte_carlo_needs_iterations(self):
        with pytest.raises(ValueError, match="at least 100 iterations"):
            p_value(random_input(0), method="monte_carlo", iterations=50)

    def test_monte_carlo_denominator_and_floor(self):
        inp = random_input(3, n=3)
        p, _, n_eval = p_value(inp, method="monte_carlo", iterations=500, seed=9)
        assert n_eval == 501
        assert p >= 1 / 501
        assert (p * 501) == pytest.approx(round(p * 501), abs=1e-9)

    def test_monte_carlo_deterministic_in_seed(self):
        inp = random_input(4, n=5)
        a = p_value(inp, method="monte_carlo", iterations=1000, seed=77)
        b = p_value(inp, method="monte_carlo", iterations=1000, seed=77)
        c = p_value(inp, method="monte_carlo", iterations=1000, seed=78)
        assert a == b
        assert a != c

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_exact_matches_oracle(self, n):
        for seed in range(5):
            inp = random_input(seed, n=n)
            vectors = {t: inp.space.vector(t) for t in inp.space.tokens}
            s_oracle, d_oracle, p_oracle, total = naive_weat(
                vectors, inp.x.found, inp.y.found, inp.a.found, inp.b.found
            )
            p, _, n_eval = p_value(inp, method="exact")
            assert n_eval == total
            assert p == p_oracle
            assert weat_statistic(inp) == pytest.approx(s_oracle, abs=1e-12)
            assert effect_size(inp) == pytest.approx(d_oracle, abs=1e-12)

    def test_monte_carlo_converges_to_exact(self):
        inp = random_input(11, n=6)
        p_exact, _, _ = p_value(inp, method="exact")
        p_mc, _, _ = p_value(inp, method="monte_carlo", iterations=40_000, seed=5)
        assert abs(p_mc - p_exact) < 0.02

    def test_vectorized_stream_matches_scalar_fisher_yates(self):
        rng = np.random.default_rng(0)
        pooled = rng.normal(size=10)
        n, iterations, seed = 5, 300, 424242
        vec_sums = _mc_partition_sums(pooled, n, iterations, seed)
        for i in range(iterations):
            perm = list(range(10))
            SplitMix64(derive_seed(seed, i)).shuffle(perm)
            scalar = pooled[np.array(perm[:n], dtype=np.intp)].sum()
            assert scalar == vec_sums[i]


class TestRunWeat:
    def _planted(self, seed=0, n=8, sep=1.0):
        rng = np.random.default_rng(seed)
        dim = 12
        vectors = {}
        for i in range(n):
            vectors[f"x{i}"] = (sep * np.eye(dim)[0] + 0.3 * rng.normal(size=dim)).tolist()
            vectors[f"y{i}"] = (sep * np.eye(dim)[1] + 0.3 * rng.normal(size=dim)).tolist()
        for i in range(6):
            vectors[f"a{i}"] = (sep * np.eye(dim)[0] + 0.3 * rng.normal(size=dim)).tolist()
            vectors[f"b{i}"] = (sep * np.eye(dim)[1] + 0.3 * rng.normal(size=dim)).tolist()
        space = make_space(vectors)
        sets = {
            "x": WordSetSpec("x", "en", [f"x{i}" for i in range(n)]),
            "y": WordSetSpec("y", "en", [f"y{i}" for i in range(n)]),
            "a": WordSetSpec("a", "en", [f"a{i}" for i in range(6)]),
            "b": WordSetSpec("b", "en", [f"b{i}" for i in range(6)]),
        }
        return space, sets

    def test_planted_bias_detected(self):
        space, sets = self._planted()
        result = run_weat(space, sets["x"], sets["y"], sets["a"], sets["b"], WeatConfig(seed=1))
        assert result.effect_size > 0.5
        assert result.p_value < 0.05
        assert result.method == "exact"

    def test_attribute_swap_mirrors(self):
        space, sets = self._planted()
        cfg = WeatConfig(seed=1)
        fwd = run_weat(space, sets["x"], sets["y"], sets["a"], sets["b"], cfg)
        rev = run_weat(space, sets["x"], sets["y"], sets["b"], sets["a"], cfg)
        assert rev.effect_size == -fwd.effect_size
        assert rev.statistic == -fwd.statistic
        assert rev.p_value > 0.5

    def test_fixed_seed_bit_identical(self):
        space, sets = self._planted()
        cfg = WeatConfig(method="monte_carlo", iterations=2000, seed=42)
        a = run_weat(space, sets["x"], sets["y"], sets["a"], sets["b"], cfg)
        b = run_weat(space, sets["x"], sets["y"], sets["a"], sets["b"], cfg)
        assert a == b

    def test_scale_invariance(self):
        space, sets = self._planted()
        scaled = EmbeddingSpace(
            dimension=space.dimension,
            tokens=list(space.tokens),
            matrix=space.matrix * 37.5,
        )
        cfg = WeatConfig(seed=0)
        a = run_weat(space, sets["x"], sets["y"], sets["a"], sets["b"], cfg)
        b = run_weat(scaled, sets["x"], sets["y"], sets["a"], sets["b"], cfg)
        assert b.statistic == pytest.approx(a.statistic, abs=1e-12)
        assert b.effect_size == pytest.approx(a.effect_size, abs=1e-12)
        assert b.p_value == pytest.approx(a.p_value, abs=1e-12)

    def test_unequal_targets_need_balance(self):
        space, sets = self._planted()
        short_y = WordSetSpec("y", "en", [f"y{i}" for i in range(5)])
        with pytest.raises(ValueError, match="equal size"):
            run_weat(space, sets["x"], short_y, sets["a"], sets["b"], WeatConfig())
        balanced = run_weat(
            space, sets["x"], short_y, sets["a"], sets["b"], WeatConfig(balance=True, seed=3)
        )
        assert len(balanced.per_word_associations) == 10
        assert len(balanced.dropped_tokens["x"]) == 3

    def test_oov_tokens_reported(self):
        space, sets = self._planted()
        with_oov = WordSetSpec("x", "en", sets["x"].tokens + ["missingword"])
        result = run_weat(
            space, with_oov, sets["y"], sets["a"], sets["b"], WeatConfig(balance=True, seed=0)
        )
        assert "missingword" in result.dropped_tokens["x"]

    def test_overlapping_targets_rejected(self):
        space, sets = self._planted()
        overlap = WordSetSpec("y", "en", ["x0"] + [f"y{i}" for i in range(7)])
        with pytest.raises(ValueError, match="overlap"):
            run_weat(space, sets["x"], overlap, sets["a"], sets["b"], WeatConfig())

    def test_result_serialization_round_trip(self):
        space, sets = self._planted()
        result = run_weat(space, sets["x"], sets["y"], sets["a"], sets["b"], WeatConfig(seed=2))
        restored = WeatResult.from_dict(json.loads(json.dumps(result.to_dict())))
        assert restored == result


class TestNullBehaviour:
    def test_null_p_values_not_degenerate(self):
        # quick sanity version of the full calibration: under the null the
        # rejection rate at 0.05 should be plausible, not 0 or huge
        hits = 0
        replicates = 40
        for seed in range(replicates):
            inp = random_input(seed, n=6, n_attr=5, dim=30)
            p, _, _ = p_value(inp, method="exact")
            hits += p < 0.05
        assert hits / replicates <= 0.2

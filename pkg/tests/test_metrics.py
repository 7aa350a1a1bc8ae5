import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctrboost.metrics import MetricError, RunAggregate, aggregate_runs, auroc, logloss

from .oracles import pairwise_auroc_oracle


class TestLogloss:
    def test_ln2_case(self):
        assert logloss([1.0], [0.5]) == pytest.approx(0.693147, abs=1e-6)

    def test_two_row_hand_case(self):
        assert logloss([1.0, 0.0], [0.9, 0.2]) == pytest.approx(0.164252, abs=1e-6)

    def test_perfect_predictions_hit_clip_floor(self):
        y = np.array([1.0, 0.0, 1.0])
        assert logloss(y, y) <= -math.log(1 - 1e-15) + 1e-18

    def test_constant_mean_equals_binary_entropy(self):
        rng = np.random.default_rng(0)
        y = (rng.random(500) < 0.37).astype(float)
        m = y.mean()
        entropy = -(m * math.log(m) + (1 - m) * math.log(1 - m))
        assert logloss(y, np.full(len(y), m)) == pytest.approx(entropy, abs=1e-12)

    def test_empty_input(self):
        with pytest.raises(MetricError):
            logloss([], [])

    def test_bad_eps(self):
        with pytest.raises(MetricError):
            logloss([1.0], [0.5], eps=0.7)

    @given(st.lists(st.tuples(st.integers(0, 1), st.floats(0.0, 1.0)), min_size=1, max_size=50))
    @settings(max_examples=50, deadline=None)
    def test_never_below_perfect(self, pairs):
        y = np.array([float(a) for a, _ in pairs])
        p = np.array([b for _, b in pairs])
        assert logloss(y, p) >= logloss(y, y) - 1e-15


class TestAuroc:
    def test_hand_case(self):
        assert auroc([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8]) == pytest.approx(0.75)

    def test_all_ties_is_half(self):
        assert auroc([0, 1, 0, 1], [0.3, 0.3, 0.3, 0.3]) == pytest.approx(0.5)

    def test_perfect_separation(self):
        assert auroc([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]) == pytest.approx(1.0)

    def test_single_class_is_an_error(self):
        with pytest.raises(MetricError, match="positive and one negative"):
            auroc([1, 1, 1], [0.2, 0.4, 0.6])

    def test_matches_pairwise_oracle_with_ties(self):
        rng = np.random.default_rng(7)
        for trial in range(50):
            n = int(rng.integers(4, 60))
            y = rng.integers(0, 2, n).astype(float)
            if y.min() == y.max():
                y[0] = 1.0 - y[0]
            s = rng.choice([0.1, 0.25, 0.5, 0.8], size=n) if trial % 2 else rng.random(n)
            assert auroc(y, s) == pairwise_auroc_oracle(y.tolist(), s.tolist())

    @given(st.data())
    @settings(max_examples=50, deadline=None)
    def test_complement_and_monotone_invariance(self, data):
        n = data.draw(st.integers(4, 40))
        rng = np.random.default_rng(data.draw(st.integers(0, 10**6)))
        y = rng.integers(0, 2, n).astype(float)
        if y.min() == y.max():
            y[0] = 1.0 - y[0]
        s = rng.normal(size=n)  # continuous, ties almost surely absent
        assert auroc(y, s) + auroc(y, -s) == pytest.approx(1.0, abs=1e-12)
        assert auroc(y, np.exp(2.0 * s) + 3.0) == pytest.approx(auroc(y, s), abs=1e-12)


class TestAggregateRuns:
    def test_identical_values(self):
        agg = aggregate_runs([0.5] * 10)
        assert agg.mean == 0.5 and agg.half_width == 0.0 and agg.n_runs == 10

    def test_hand_case(self):
        agg = aggregate_runs([0.4] * 5 + [0.6] * 5)
        assert agg.mean == pytest.approx(0.5)
        assert agg.half_width == pytest.approx(1.959964 * 0.1054093 / math.sqrt(10), abs=1e-5)
        assert agg.half_width == pytest.approx(0.06533, abs=1e-5)

    def test_scaling_linearity(self):
        vals = [0.2, 0.5, 0.9, 0.4]
        base = aggregate_runs(vals)
        scaled = aggregate_runs([-3.0 * v for v in vals])
        assert scaled.mean == pytest.approx(-3.0 * base.mean)
        assert scaled.half_width == pytest.approx(3.0 * base.half_width)

    def test_mean_within_range(self):
        agg = aggregate_runs([0.1, 0.9, 0.5])
        assert min(agg.values) <= agg.mean <= max(agg.values)

    def test_requires_two_values(self):
        with pytest.raises(MetricError):
            aggregate_runs([0.5])

    def test_confidence_validation(self):
        with pytest.raises(MetricError):
            aggregate_runs([0.1, 0.2], confidence=1.5)

    def test_is_dataclass_with_metadata(self):
        agg = aggregate_runs([1.0, 2.0], metric="auroc")
        assert isinstance(agg, RunAggregate)
        assert agg.metric == "auroc" and agg.confidence == 0.95

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ctrboost as cb
from ctrboost.data import from_arrays
from ctrboost.gbdt import (
    GBDTConfig,
    Histogram,
    ModelFormatError,
    TrainError,
    best_categorical_split,
    best_numeric_split,
    build_feature_bins,
    build_histogram,
    compute_grad_hess,
    grow_tree,
    load,
    predict,
    save,
    sigmoid,
    split_gain,
    train,
)
from ctrboost.gbdt.tree import FeatureSet, GrowParams
from ctrboost.synthetic import random_instance, separable, xor_pattern

from .oracles import categorical_partition_oracle, grad_hess_fd_oracle, numeric_split_oracle


class TestGradHess:
    def test_raw_zero(self):
        g, h = compute_grad_hess(np.array([1.0]), np.array([0.0]))
        assert g[0] == pytest.approx(-0.5) and h[0] == pytest.approx(0.25)

    def test_saturation(self):
        g, h = compute_grad_hess(np.array([1.0]), np.array([40.0]))
        assert abs(g[0]) < 1e-15 and abs(h[0]) < 1e-15

    def test_finite_difference_point(self):
        g, h = compute_grad_hess(np.array([0.0]), np.array([0.7]))
        fg, fh = grad_hess_fd_oracle(0.0, 0.7)
        assert g[0] == pytest.approx(fg, abs=1e-6)
        assert h[0] == pytest.approx(fh, abs=1e-6)

    def test_finite_differences_random_points(self):
        rng = np.random.default_rng(0)
        raws = rng.uniform(-6, 6, 100)
        ys = rng.integers(0, 2, 100).astype(float)
        g, h = compute_grad_hess(ys, raws)
        for i in range(100):
            fg, fh = grad_hess_fd_oracle(ys[i], raws[i])
            assert g[i] == pytest.approx(fg, abs=1e-5)
            assert h[i] == pytest.approx(fh, abs=1e-5)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            compute_grad_hess(np.zeros(3), np.zeros(4))


class TestBinning:
    def test_three_distinct_values(self):
        fb = build_feature_bins("x", np.array([1.0, 5.0, 1.0, 9.0]), max_bins=256)
        assert fb.n_value_bins == 3
        assert fb.edges.tolist() == [3.0, 7.0]

    def test_constant_feature_single_bin(self):
        fb = build_feature_bins("x", np.full(10, 2.5), max_bins=256)
        assert fb.n_value_bins == 1

    def test_quantile_boundaries_near_quartiles(self):
        rng = np.random.default_rng(1)
        fb = build_feature_bins("x", rng.uniform(0, 1, 10_000), max_bins=4)
        assert fb.edges == pytest.approx([0.25, 0.5, 0.75], abs=0.05)

    def test_bin_count_capped(self):
        rng = np.random.default_rng(2)
        fb = build_feature_bins("x", rng.normal(size=5000), max_bins=16)
        assert fb.n_value_bins <= 16

    def test_nan_reserved_bin(self):
        fb = build_feature_bins("x", np.array([1.0, np.nan, 2.0]), max_bins=8)
        codes = fb.assign(np.array([1.0, np.nan, 2.0]))
        assert codes[1] == fb.nan_bin
        assert codes[0] != codes[2]

    def test_assignment_consistent_with_threshold_compare(self):
        rng = np.random.default_rng(3)
        values = rng.normal(size=500)
        fb = build_feature_bins("x", values, max_bins=8)
        codes = fb.assign(values)
        for cut in range(fb.n_value_bins - 1):
            left_by_bin = codes <= cut
            left_by_value = values <= fb.edges[cut]
            assert np.array_equal(left_by_bin, left_by_value)


class TestHistogram:
    def test_single_row_lands_in_one_bin(self):
        hist = build_histogram(np.array([2]), np.array([0.3]), np.array([0.2]), n_bins=5)
        assert hist.count.tolist() == [0, 0, 1, 0, 0]
        assert hist.grad[2] == 0.3 and hist.hess[2] == 0.2

    def test_totals_conserved(self):
        rng = np.random.default_rng(5)
        codes = rng.integers(0, 16, 500).astype(np.int32)
        g = rng.normal(size=500)
        h = rng.uniform(0.01, 0.25, 500)
        hist = build_histogram(codes, g, h, 16)
        tg, th, tc = hist.totals
        assert tg == pytest.approx(g.sum(), abs=1e-9)
        assert th == pytest.approx(h.sum(), abs=1e-9)
        assert tc == 500

    def test_sibling_subtraction_matches_direct(self):
        rng = np.random.default_rng(6)
        codes = rng.integers(0, 8, 400).astype(np.int32)
        g = rng.normal(size=400)
        h = rng.uniform(0.01, 0.25, 400)
        rows = np.arange(400)
        left = rows[rng.random(400) < 0.4]
        right = np.setdiff1d(rows, left)
        parent = build_histogram(codes, g, h, 8, rows)
        left_h = build_histogram(codes, g, h, 8, left)
        right_direct = build_histogram(codes, g, h, 8, right)
        derived = parent.subtract(left_h)
        assert np.allclose(derived.grad, right_direct.grad, atol=1e-9)
        assert np.allclose(derived.hess, right_direct.hess, atol=1e-9)
        assert np.array_equal(derived.count, right_direct.count)

    def test_empty_rows_rejected(self):
        with pytest.raises(ValueError):
            build_histogram(np.array([0]), np.array([0.1]), np.array([0.1]), 2, rows=np.array([], dtype=int))


def hist_from(bins, g, h, n_bins):
    return build_histogram(np.asarray(bins, dtype=np.int32), np.asarray(g, float), np.asarray(h, float), n_bins)


class TestNumericSplit:
    def test_two_bin_hand_case(self):
        # (GL, HL) = (-2, 3), (GR, HR) = (1, 2), lam=1, gamma=0 -> 0.58333
        hist = Histogram(np.array([-2.0, 1.0, 0.0]), np.array([3.0, 2.0, 0.0]), np.array([2, 2, 0]))
        cand = best_numeric_split(hist, nan_bin=2, lam=1.0, gamma=0.0, min_child_weight=0.0)
        assert cand.bin == 0
        assert cand.gain == pytest.approx(0.5 * (4 / 4 + 1 / 3 - 1 / 6))
        assert cand.gain == pytest.approx(0.58333, abs=1e-5)

    def test_symmetric_children_no_split(self):
        hist = Histogram(np.array([1.0, 1.0, 0.0]), np.array([2.0, 2.0, 0.0]), np.array([3, 3, 0]))
        assert best_numeric_split(hist, nan_bin=2, lam=1.0, gamma=0.0, min_child_weight=0.0) is None

    def test_gamma_penalty_can_veto(self):
        hist = Histogram(np.array([-2.0, 1.0, 0.0]), np.array([3.0, 2.0, 0.0]), np.array([2, 2, 0]))
        assert best_numeric_split(hist, nan_bin=2, lam=1.0, gamma=1.0, min_child_weight=0.0) is None

    def test_min_child_weight_respected(self):
        hist = Histogram(np.array([-2.0, 1.0, 0.0]), np.array([0.5, 2.0, 0.0]), np.array([2, 2, 0]))
        assert best_numeric_split(hist, nan_bin=2, lam=1.0, gamma=0.0, min_child_weight=1.0) is None

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(9)
        for trial in range(60):
            n = int(rng.integers(5, 200))
            n_value_bins = int(rng.integers(2, 12))
            nan_bin = n_value_bins
            bins = rng.integers(0, n_value_bins, n).astype(np.int32)
            if trial % 3 == 0:  # inject missing rows
                bins[rng.random(n) < 0.15] = nan_bin
            g = rng.normal(size=n)
            h = rng.uniform(0.01, 0.3, n)
            mcw = float(rng.choice([0.0, 0.5]))
            hist = build_histogram(bins, g, h, nan_bin + 1)
            cand = best_numeric_split(hist, nan_bin, lam=1.0, gamma=0.0, min_child_weight=mcw)
            oracle = numeric_split_oracle(bins.tolist(), g.tolist(), h.tolist(), n_value_bins, nan_bin, 1.0, 0.0, mcw)
            if oracle is None:
                assert cand is None
            else:
                assert cand is not None
                assert cand.bin == oracle[0]
                assert cand.gain == pytest.approx(oracle[1], abs=1e-9)


class TestCategoricalSplit:
    def test_fisher_hand_case(self):
        # A(-3,2) B(1,1) C(-0.5,1): sorted by g/(h+1) -> [A, C, B]; best prefix {A, C}
        hist = Histogram(np.array([-3.0, 1.0, -0.5]), np.array([2.0, 1.0, 1.0]), np.array([4, 2, 2]))
        cand = best_categorical_split(hist, lam=1.0, gamma=0.0, min_child_weight=0.0)
        assert cand.left_cats.tolist() == [0, 2]
        assert cand.gain == pytest.approx(0.5 * ((-3.5) ** 2 / 4 + 1.0 / 2 - (-2.5) ** 2 / 5))
        assert cand.gain == pytest.approx(1.15625)

    def test_two_categories_forced_partition(self):
        hist = Histogram(np.array([-2.0, 1.0]), np.array([3.0, 2.0]), np.array([2, 2]))
        cand = best_categorical_split(hist, lam=1.0, gamma=0.0, min_child_weight=0.0)
        assert cand.left_cats.tolist() == [0]
        numeric = best_numeric_split(
            Histogram(np.array([-2.0, 1.0, 0.0]), np.array([3.0, 2.0, 0.0]), np.array([2, 2, 0])),
            nan_bin=2, lam=1.0, gamma=0.0, min_child_weight=0.0,
        )
        assert cand.gain == pytest.approx(numeric.gain)

    def test_absent_categories_excluded(self):
        hist = Histogram(np.array([-2.0, 9.0, 1.0]), np.array([3.0, 0.0, 2.0]), np.array([2, 0, 2]))
        cand = best_categorical_split(hist, lam=1.0, gamma=0.0, min_child_weight=0.0)
        assert 1 not in cand.left_cats.tolist()

    def test_never_exceeds_exhaustive_and_mostly_matches(self):
        rng = np.random.default_rng(23)
        matches, trials = 0, 100
        for _ in range(trials):
            k = int(rng.integers(2, 9))
            counts = rng.integers(2, 30, k)
            h = counts * rng.uniform(0.1, 0.25, k)
            g = rng.normal(scale=np.sqrt(counts * 0.25))
            hist = Histogram(g.astype(float), h.astype(float), counts.astype(np.int64))
            cand = best_categorical_split(hist, lam=1.0, gamma=0.0, min_child_weight=0.0)
            stats = {c: (float(g[c]), float(h[c]), int(counts[c])) for c in range(k)}
            oracle = categorical_partition_oracle(stats, 1.0, 0.0, 0.0)
            if cand is None:
                assert oracle is None or oracle <= 1e-12
                matches += 1
                continue
            assert oracle is not None
            assert cand.gain <= oracle + 1e-9  # Fisher scan can never beat exhaustive search
            if abs(cand.gain - oracle) <= 1e-9:
                matches += 1
        assert matches >= 95


def make_feature_set(values: dict[str, np.ndarray], max_bins: int = 256):
    names = list(values)
    n = len(next(iter(values.values())))
    fs = FeatureSet(names=names, kinds={}, codes={}, n_bins={}, nan_bins={}, n_rows=n)
    thresholds = {}
    for name, vals in values.items():
        fb = build_feature_bins(name, np.asarray(vals, float), max_bins)
        fs.kinds[name] = "numeric"
        fs.codes[name] = fb.assign(np.asarray(vals, float))
        fs.n_bins[name] = fb.n_bins
        fs.nan_bins[name] = fb.nan_bin
        thresholds[name] = fb.edges
    return fs, thresholds


class TestGrowTree:
    def test_depth_one_is_stump(self):
        fs, thr = make_feature_set({"x": np.array([1.0, 2.0, 3.0, 4.0])})
        g = np.array([0.5, 0.5, -0.5, -0.5])
        h = np.full(4, 0.25)
        tree, out = grow_tree(fs, g, h, GrowParams(1, 1.0, 0.0, 0.0), thr)
        internal = [k for k in tree.kind if k != 0]
        assert len(internal) == 1
        assert tree.depth() == 1

    def test_pure_node_leaf_weight(self):
        fs, thr = make_feature_set({"x": np.array([1.0, 1.0, 1.0])})
        g = np.array([-0.5, -0.5, -1.0])  # G = -2
        h = np.array([1.0, 1.0, 1.0])  # H = 3
        tree, out = grow_tree(fs, g, h, GrowParams(3, 1.0, 0.0, 0.0), thr)
        assert tree.n_nodes == 1
        assert tree.weight[0] == pytest.approx(0.5)  # -G/(H+lam) = 2/4
        assert np.allclose(out, 0.5)

    def test_max_depth_respected(self):
        rng = np.random.default_rng(0)
        fs, thr = make_feature_set({"x": rng.normal(size=200), "z": rng.normal(size=200)})
        g = rng.normal(size=200)
        h = np.full(200, 0.25)
        tree, _ = grow_tree(fs, g, h, GrowParams(3, 1.0, 0.0, 0.0), thr)
        assert tree.depth() <= 3

    def test_split_gain_consistency_with_partition(self):
        rng = np.random.default_rng(1)
        fs, thr = make_feature_set({"x": rng.normal(size=300), "z": rng.normal(size=300)})
        g = rng.normal(size=300)
        h = np.full(300, 0.25)
        params = GrowParams(4, 1.0, 0.0, 0.0)
        tree, _ = grow_tree(fs, g, h, params, thr)
        # recompute the root split gain from the actual induced row partition
        if tree.kind[0] != 0:
            name = tree.feature[0]
            left = fs.codes[name] <= tree.bin[0]
            gl, hl = g[left].sum(), h[left].sum()
            gr, hr = g[~left].sum(), h[~left].sum()
            root_hist = build_histogram(fs.codes[name], g, h, fs.n_bins[name])
            cand = best_numeric_split(root_hist, fs.nan_bins[name], 1.0, 0.0, 0.0)
            if cand is not None and cand.bin == tree.bin[0]:
                assert cand.gain == pytest.approx(float(split_gain(gl, hl, gr, hr, 1.0, 0.0)), abs=1e-9)


class TestTrain:
    def test_separable_converges(self):
        ds = separable(100, seed=0)
        cfg = GBDTConfig(n_trees=200, learning_rate=0.1, min_child_weight=0.0, early_stopping_rounds=0)
        model = train(ds, None, cfg)
        assert cb.logloss(ds.target, predict(model, ds)) < 0.01

    def test_zero_learning_rate_keeps_base(self):
        ds = random_instance(80, seed=2)
        cfg = GBDTConfig(n_trees=10, learning_rate=0.0, early_stopping_rounds=0)
        model = train(ds, None, cfg)
        p = predict(model, ds)
        assert np.allclose(p, sigmoid(model.base_score))

    def test_monotone_training_loss(self):
        for seed in range(5):
            ds = random_instance(150, seed=seed)
            cfg = GBDTConfig(n_trees=30, gamma=0.0, early_stopping_rounds=0)
            losses = []

            def track(it, raw_train, raw_valid):
                losses.append(cb.logloss(ds.target, sigmoid(raw_train)))

            train(ds, None, cfg, callback=track)
            assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_xor_needs_depth_two(self):
        ds = xor_pattern((2, 1, 1, 1))
        base = dict(n_trees=300, learning_rate=0.5, min_child_weight=0.0, early_stopping_rounds=0)
        shallow = train(ds, None, GBDTConfig(max_depth=1, **base))
        deep = train(ds, None, GBDTConfig(max_depth=2, **base))
        acc = lambda m: float(((predict(m, ds) > 0.5) == ds.target.astype(bool)).mean())
        assert acc(deep) == 1.0
        assert acc(shallow) < 1.0

    def test_single_class_warns_but_trains(self):
        ds = from_arrays(numerical={"x": np.arange(20.0)}, target=np.ones(20))
        with pytest.warns(RuntimeWarning, match="single-class"):
            model = train(ds, None, GBDTConfig(n_trees=3, early_stopping_rounds=0))
        assert (predict(model, ds) > 0.99).all()

    def test_early_stopping_truncates_to_best(self):
        ds = random_instance(400, n_cat=3, seed=7)
        tr, va, _ = cb.split(ds, cb.SplitSpec(seed=1))
        cfg = GBDTConfig(n_trees=150, early_stopping_rounds=10, max_depth=4)
        model = train(tr, va, cfg)
        curve = model.metadata["valid_logloss"]
        best_iter = model.metadata["best_iteration"]
        assert model.n_trees == best_iter
        assert curve[best_iter] == min(curve)

    def test_early_stopping_needs_valid(self):
        ds = random_instance(50, seed=0)
        with pytest.raises(TrainError, match="validation"):
            train(ds, None, GBDTConfig(early_stopping_rounds=5))

    def test_native_handles_categorical_columns(self):
        ds = random_instance(300, n_num=0, n_cat=3, seed=4)
        tr, va, te = cb.split(ds, cb.SplitSpec(seed=2))
        model = train(tr, va, GBDTConfig(n_trees=60, early_stopping_rounds=10, min_child_weight=0.5))
        score = cb.auroc(te.target, predict(model, te))
        assert score > 0.6

    def test_encoded_mode_rejects_raw_categoricals(self):
        ds = random_instance(60, n_cat=1, seed=3)
        with pytest.raises(TrainError, match="encoded"):
            train(ds, None, GBDTConfig(cat_mode="encoded", early_stopping_rounds=0))

    def test_deterministic_training(self):
        ds = random_instance(200, seed=9)
        tr, va, _ = cb.split(ds, cb.SplitSpec(seed=5))
        cfg = GBDTConfig(n_trees=25, early_stopping_rounds=5)
        p1 = predict(train(tr, va, cfg), va)
        p2 = predict(train(tr, va, cfg), va)
        assert np.array_equal(p1, p2)


class TestPredict:
    def test_empty_ensemble_constant(self):
        ds = random_instance(30, seed=1)
        model = train(ds, None, GBDTConfig(n_trees=0, early_stopping_rounds=0))
        assert np.allclose(predict(model, ds), sigmoid(model.base_score))

    def test_stump_hand_trace(self):
        ds = from_arrays(numerical={"x": [1.0, 2.0, 3.0, 4.0]}, target=[0.0, 0.0, 1.0, 1.0])
        cfg = GBDTConfig(
            n_trees=1, learning_rate=0.5, max_depth=1, lam=1.0,
            min_child_weight=0.0, early_stopping_rounds=0,
        )
        model = train(ds, None, cfg)
        # base = 0; best cut x <= 2.5; leaves w = -G/(H+lam) = -(+1)/1.5, -(-1)/1.5
        expected_raw = np.array([-1, -1, 1, 1]) * 0.5 * (1.0 / 1.5)
        assert predict(model, ds) == pytest.approx(1 / (1 + np.exp(-expected_raw)))

    def test_unseen_category_routes_default(self):
        ds = from_arrays(
            categorical={"c": ([0, 0, 1, 1] * 10, ["a", "b"])},
            target=[0.0, 0.0, 1.0, 1.0] * 10,
        )
        model = train(ds, None, GBDTConfig(n_trees=5, min_child_weight=0.0, early_stopping_rounds=0))
        fresh = from_arrays(categorical={"c": ([0, 1, 2], ["a", "b", "zzz"])}, target=[0.0, 1.0, 0.0])
        p = predict(model, fresh)
        assert p.shape == (3,)
        assert np.isfinite(p).all()

    def test_schema_mismatch_rejected(self):
        ds = random_instance(40, seed=5)
        model = train(ds, None, GBDTConfig(n_trees=2, early_stopping_rounds=0))
        other = from_arrays(numerical={"unrelated": np.arange(5.0)}, target=np.ones(5) % 2)
        with pytest.raises(TrainError, match="missing feature"):
            predict(model, other)


class TestModelIO:
    def make_model(self, tmp_path, with_encoder=False):
        ds = random_instance(250, n_cat=2, seed=13)
        tr, va, te = cb.split(ds, cb.SplitSpec(seed=4))
        if with_encoder:
            from ctrboost.encode import EncoderSpec, apply as enc_apply, encode_for_training

            enc_train, enc = encode_for_training(tr, EncoderSpec(mode="kfold_target", k_folds=4, seed=1))
            model = train(enc_train, enc_apply(enc, va), GBDTConfig(n_trees=12, cat_mode="encoded", early_stopping_rounds=5), encoder=enc)
        else:
            model = train(tr, va, GBDTConfig(n_trees=12, early_stopping_rounds=5))
        path = tmp_path / "model.bin"
        save(model, path)
        return model, path, te

    def test_round_trip_leaf_weights_exact(self, tmp_path):
        model, path, _ = self.make_model(tmp_path)
        loaded = load(path)
        assert loaded.base_score == model.base_score
        for t1, t2 in zip(model.trees, loaded.trees):
            assert t1.weight == t2.weight
            assert t1.kind == t2.kind
            assert t1.threshold == pytest.approx(t2.threshold, nan_ok=True, abs=0)

    def test_round_trip_predictions_bit_identical(self, tmp_path):
        model, path, te = self.make_model(tmp_path)
        before = predict(model, te)
        after = predict(load(path), te)
        assert np.array_equal(before, after)

    def test_encoder_round_trip(self, tmp_path):
        model, path, te = self.make_model(tmp_path, with_encoder=True)
        loaded = load(path)
        assert loaded.encoder is not None
        assert loaded.encoder.prior == model.encoder.prior
        assert np.array_equal(predict(model, te), predict(loaded, te))

    def test_single_corrupt_byte_fails_checksum(self, tmp_path):
        _, path, _ = self.make_model(tmp_path)
        blob = bytearray(path.read_bytes())
        blob[len(blob) // 2] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(ModelFormatError, match="checksum"):
            load(path)

    def test_version_mismatch_rejected(self, tmp_path):
        _, path, _ = self.make_model(tmp_path)
        blob = bytearray(path.read_bytes())
        blob[8:12] = (99).to_bytes(4, "little")
        path.write_bytes(bytes(blob))
        with pytest.raises(ModelFormatError, match="version"):
            load(path)

    def test_truncated_file_rejected(self, tmp_path):
        _, path, _ = self.make_model(tmp_path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) // 3])
        with pytest.raises(ModelFormatError):
            load(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOTAMODL" + b"\x00" * 64)
        with pytest.raises(ModelFormatError, match="magic"):
            load(path)

    def test_identical_training_identical_files(self, tmp_path):
        ds = random_instance(150, seed=21)
        tr, va, _ = cb.split(ds, cb.SplitSpec(seed=3))
        cfg = GBDTConfig(n_trees=8, early_stopping_rounds=0)
        p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
        save(train(tr, va, cfg), p1)
        save(train(tr, va, cfg), p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestConfigValidation:
    def test_bad_values(self):
        with pytest.raises(TrainError):
            GBDTConfig(max_depth=0)
        with pytest.raises(TrainError):
            GBDTConfig(learning_rate=-0.1)
        with pytest.raises(TrainError):
            GBDTConfig(max_bins=1)
        with pytest.raises(TrainError):
            GBDTConfig(lam=-1.0)

    @given(st.integers(1, 4), st.integers(0, 10**6))
    @settings(max_examples=15, deadline=None)
    def test_histogram_conservation_property(self, depth, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(20, 120))
        codes = rng.integers(0, 6, n).astype(np.int32)
        g = rng.normal(size=n)
        h = rng.uniform(0.01, 0.3, n)
        hist = build_histogram(codes, g, h, 6)
        assert hist.grad.sum() == pytest.approx(g.sum(), abs=1e-9)
        assert hist.hess.sum() == pytest.approx(h.sum(), abs=1e-9)

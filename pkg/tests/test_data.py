import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctrboost.data import (
    ColumnKind,
    DataError,
    Dataset,
    MISSING_CATEGORY,
    SplitSpec,
    from_arrays,
    load_csv,
    read_schema_hint,
    split,
    subsample,
)


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:
    def test_three_row_readback(self, tmp_path):
        path = write_csv(tmp_path, "user,age,click\nu1,34,1\nu2,21,0\nu1,48,1\n")
        ds = load_csv(path, target="click")
        assert ds.n_rows == 3
        (cat,) = ds.categorical_columns
        assert cat.name == "user" and cat.cardinality == 2
        assert ds.num_values["age"].tolist() == [34.0, 21.0, 48.0]
        assert ds.target.tolist() == [1.0, 0.0, 1.0]

    def test_first_appearance_codes(self, tmp_path):
        path = write_csv(tmp_path, "user,click\nu1,0\nu2,1\nu1,0\n")
        ds = load_csv(path, target="click")
        assert ds.cat_codes["user"].tolist() == [0, 1, 0]
        assert ds.dictionaries["user"] == ("u1", "u2")

    def test_cardinality_counts_distinct(self, tmp_path):
        rng = np.random.default_rng(0)
        values = [f"c{rng.integers(0, 40)}" for _ in range(1000)]
        # one-pass oracle over the raw strings
        distinct = len(set(values))
        rows = "\n".join(f"{v},{i % 2}" for i, v in enumerate(values))
        ds = load_csv(write_csv(tmp_path, f"cat,click\n{rows}\n"), target="click")
        assert ds.categorical_columns[0].cardinality == distinct

    def test_missing_categorical_gets_reserved_code_zero(self, tmp_path):
        path = write_csv(tmp_path, "user,click\nu1,0\n,1\nu2,0\nu1,1\n")
        ds = load_csv(path, target="click")
        assert ds.dictionaries["user"][0] == MISSING_CATEGORY
        assert ds.cat_codes["user"].tolist() == [1, 0, 2, 1]
        assert ds.categorical_columns[0].cardinality == 3  # 2 distinct + missing

    def test_missing_numeric_is_nan(self, tmp_path):
        path = write_csv(tmp_path, "x,click\n1.5,0\n,1\nnot_a_number,0\n")
        ds = load_csv(path, schema_hint={"x": "numerical"}, target="click")
        vals = ds.num_values["x"]
        assert vals[0] == 1.5
        assert np.isnan(vals[1]) and np.isnan(vals[2])

    def test_target_parsing_accepts_bool_tokens(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, "x,click\n1,true\n2,FALSE\n3,0\n4,1\n"), target="click")
        assert ds.target.tolist() == [1.0, 0.0, 0.0, 1.0]

    def test_target_outside_binary_rejected(self, tmp_path):
        path = write_csv(tmp_path, "x,click\n1,2\n")
        with pytest.raises(DataError, match="non-binary"):
            load_csv(path, target="click")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "nope.csv", target="click")

    def test_duplicate_header(self, tmp_path):
        path = write_csv(tmp_path, "x,x,click\n1,2,0\n")
        with pytest.raises(DataError, match="duplicate"):
            load_csv(path, target="click")

    def test_blank_header(self, tmp_path):
        path = write_csv(tmp_path, "x,,click\n1,2,0\n")
        with pytest.raises(DataError, match="blank"):
            load_csv(path, target="click")

    def test_target_must_be_declared(self, tmp_path):
        path = write_csv(tmp_path, "x,click\n1,0\n")
        with pytest.raises(DataError, match="target"):
            load_csv(path)

    def test_schema_hint_file(self, tmp_path):
        hint = tmp_path / "schema.txt"
        hint.write_text("# kinds\nuser = categorical\nzip = categorical\nclick = target\n")
        path = write_csv(tmp_path, "user,zip,click\nu1,90210,1\nu2,10001,0\n")
        ds = load_csv(path, schema_hint=hint)
        assert {c.name for c in ds.categorical_columns} == {"user", "zip"}
        assert read_schema_hint(hint)["zip"] == "categorical"

    def test_unhinted_numeric_like_strings_stay_numeric(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, "a,b,click\n1.5,x1,0\n2,x2,1\n"), target="click")
        kinds = {c.name: c.kind for c in ds.schema}
        assert kinds["a"] is ColumnKind.NUMERICAL
        assert kinds["b"] is ColumnKind.CATEGORICAL

    def test_decode_round_trip(self, tmp_path):
        raw = [["u1", "1"], ["u2", "0"], ["", "1"], ["u1", "0"]]
        text = "user,click\n" + "\n".join(",".join(r) for r in raw) + "\n"
        ds = load_csv(write_csv(tmp_path, text), target="click")
        for i, (cell, _) in enumerate(raw):
            expected = cell if cell != "" else MISSING_CATEGORY
            assert ds.decode("user", i) == expected

    def test_configurable_delimiter(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, "x;click\n1;0\n2;1\n"), target="click", delimiter=";")
        assert ds.n_rows == 2


class TestSplit:
    def test_exact_division(self):
        ds = from_arrays(numerical={"x": np.arange(100.0)}, target=np.tile([0.0, 1.0], 50))
        tr, va, te = split(ds, SplitSpec(0.8, 0.1, 0.1, seed=7))
        assert (tr.n_rows, va.n_rows, te.n_rows) == (80, 10, 10)

    def test_remainder_goes_to_train(self):
        ds = from_arrays(numerical={"x": np.arange(103.0)}, target=np.arange(103) % 2)
        tr, va, te = split(ds, SplitSpec(0.8, 0.1, 0.1, seed=1))
        assert (tr.n_rows, va.n_rows, te.n_rows) == (83, 10, 10)

    def test_same_seed_identical_different_seed_differs(self):
        ds = from_arrays(numerical={"x": np.arange(60.0)}, target=np.arange(60) % 2)
        a1 = split(ds, SplitSpec(seed=5))
        a2 = split(ds, SplitSpec(seed=5))
        b = split(ds, SplitSpec(seed=6))
        for p1, p2 in zip(a1, a2):
            assert np.array_equal(p1.num_values["x"], p2.num_values["x"])
        assert not np.array_equal(a1[0].num_values["x"], b[0].num_values["x"])

    def test_disjoint_and_covering(self):
        ds = from_arrays(numerical={"x": np.arange(57.0)}, target=np.arange(57) % 2)
        parts = split(ds, SplitSpec(seed=11))
        gathered = np.concatenate([p.num_values["x"] for p in parts])
        assert sorted(gathered.tolist()) == list(np.arange(57.0))

    def test_too_few_rows(self):
        ds = from_arrays(numerical={"x": np.arange(9.0)}, target=np.arange(9) % 2)
        with pytest.raises(DataError, match="at least 10"):
            split(ds, SplitSpec(seed=0))

    def test_degenerate_spec(self):
        ds = from_arrays(numerical={"x": np.arange(12.0)}, target=np.arange(12) % 2)
        with pytest.raises(DataError, match="degenerate"):
            split(ds, SplitSpec(0.98, 0.01, 0.01, seed=0))

    def test_fraction_validation(self):
        with pytest.raises(DataError):
            SplitSpec(0.8, 0.1, 0.2)
        with pytest.raises(DataError):
            SplitSpec(0.8, -0.1, 0.3)

    @given(seed=st.integers(0, 2**31), n=st.integers(10, 200))
    @settings(max_examples=30, deadline=None)
    def test_split_concat_restores_multiset(self, seed, n):
        ds = from_arrays(numerical={"x": np.arange(float(n))}, target=np.arange(n) % 2)
        parts = split(ds, SplitSpec(seed=seed))
        gathered = sorted(np.concatenate([p.num_values["x"] for p in parts]).tolist())
        assert gathered == list(np.arange(float(n)))


class TestSubsample:
    def make(self, n=1000, seed=0):
        rng = np.random.default_rng(seed)
        return from_arrays(
            categorical={"c": (rng.integers(0, 5, n), [f"v{i}" for i in range(5)])},
            numerical={"x": rng.normal(size=n)},
            target=(rng.random(n) < 0.3).astype(float),
        )

    def test_fraction_sizes(self):
        ds = self.make()
        assert subsample(ds, 0.1, seed=0).n_rows == 100

    def test_full_fraction_is_permutation(self):
        ds = self.make(n=50)
        out = subsample(ds, 1.0, seed=3)
        assert out.n_rows == 50
        assert sorted(out.num_values["x"].tolist()) == sorted(ds.num_values["x"].tolist())
        assert not np.array_equal(out.num_values["x"], ds.num_values["x"])

    def test_dictionaries_preserved(self):
        ds = self.make()
        out = subsample(ds, 0.2, seed=1)
        assert out.dictionaries["c"] == ds.dictionaries["c"]
        assert out.schema == ds.schema

    def test_class_rate_stays_close(self):
        # Monte Carlo: sampled positive rate within 5 points of the parent
        ds = self.make(n=10000, seed=42)
        parent_rate = ds.target.mean()
        for seed in range(20):
            rate = subsample(ds, 0.1, seed=seed).target.mean()
            assert abs(rate - parent_rate) < 0.05

    def test_empty_result_rejected(self):
        ds = self.make(n=20)
        with pytest.raises(DataError):
            subsample(ds, 0.01, seed=0)

    def test_determinism(self):
        ds = self.make()
        a = subsample(ds, 0.3, seed=9)
        b = subsample(ds, 0.3, seed=9)
        assert np.array_equal(a.num_values["x"], b.num_values["x"])
        assert np.array_equal(a.cat_codes["c"], b.cat_codes["c"])


class TestDatasetInvariants:
    def test_immutable_arrays(self):
        ds = from_arrays(numerical={"x": [1.0, 2.0]}, target=[0.0, 1.0])
        with pytest.raises(ValueError):
            ds.num_values["x"][0] = 5.0
        with pytest.raises(ValueError):
            ds.target[0] = 1.0

    def test_exactly_one_target(self):
        with pytest.raises(DataError):
            Dataset(schema=(), cat_codes={}, dictionaries={}, num_values={}, target=np.array([]))

    def test_codes_in_range(self):
        with pytest.raises(DataError, match="out of range"):
            from_arrays(categorical={"c": ([0, 3], ["a", "b"])}, target=[0.0, 1.0])

    def test_target_binary(self):
        with pytest.raises(DataError, match="0 or 1"):
            from_arrays(numerical={"x": [1.0]}, target=[0.5])

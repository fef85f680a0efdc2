import numpy as np
import pytest

from survmatch.dataset import (
    FeatureSchema,
    SplitSpec,
    SurvDataset,
    compute_encode_stats,
    compute_impute_stats,
    encode,
    impute,
    load_csv,
    missing_mask,
    prepare_splits,
    stratified_split,
)
from survmatch.errors import DataError, SchemaError

SCHEMA = FeatureSchema(
    columns=[("age", "continuous"), ("stage", "categorical")],
    time_column="time",
    event_column="event",
)


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def raw_dataset(rows, schema=SCHEMA):
    X = np.empty((len(rows), len(schema.columns)), dtype=object)
    X[:] = [r[:-2] for r in rows]
    return SurvDataset(
        X=X,
        t=np.array([r[-2] for r in rows], dtype=float),
        y=np.array([r[-1] for r in rows], dtype=float),
        schema=schema,
    )


class TestSchema:
    def test_duplicate_columns_rejected(self):
        with pytest.raises(SchemaError):
            FeatureSchema([("a", "continuous"), ("a", "categorical")], "t", "e")

    def test_outcome_overlap_rejected(self):
        with pytest.raises(SchemaError):
            FeatureSchema([("t", "continuous")], "t", "e")

    def test_unknown_kind_rejected(self):
        with pytest.raises(SchemaError):
            FeatureSchema([("a", "ordinal")], "t", "e")


class TestLoadCsv:
    def test_blank_cell_marked_missing(self, tmp_path):
        path = write(tmp_path, "age,stage,time,event\n50,II,3.5,1\n,II,1.0,0\n60,I,2.0,1\n")
        ds = load_csv(path, SCHEMA)
        assert ds.n == 3
        assert missing_mask(ds).sum() == 1
        assert ds.X[1, 0] is None

    def test_na_sentinel(self, tmp_path):
        path = write(tmp_path, "age,stage,time,event\n50,NA,3.5,1\n")
        ds = load_csv(path, SCHEMA)
        assert ds.X[0, 1] is None

    def test_bad_event_names_line(self, tmp_path):
        path = write(tmp_path, "age,stage,time,event\n50,II,3.5,1\n60,I,2.0,2\n")
        with pytest.raises(DataError, match=":3:"):
            load_csv(path, SCHEMA)

    def test_bad_time_names_line(self, tmp_path):
        path = write(tmp_path, "age,stage,time,event\n50,II,oops,1\n")
        with pytest.raises(DataError, match=":2:"):
            load_csv(path, SCHEMA)

    def test_empty_data_section(self, tmp_path):
        path = write(tmp_path, "age,stage,time,event\n")
        with pytest.raises(DataError, match="no observations"):
            load_csv(path, SCHEMA)

    def test_missing_column_is_schema_error(self, tmp_path):
        path = write(tmp_path, "age,time,event\n50,3.5,1\n")
        with pytest.raises(SchemaError, match="stage"):
            load_csv(path, SCHEMA)

    def test_row_order_preserved(self, tmp_path):
        path = write(tmp_path, "age,stage,time,event\n1,I,9,0\n2,I,8,1\n3,I,7,0\n")
        ds = load_csv(path, SCHEMA)
        assert list(ds.t) == [9.0, 8.0, 7.0]


class TestImpute:
    def test_median_fill(self):
        ds = raw_dataset([[1.0, "A", 1, 1], [None, "A", 2, 0], [3.0, "A", 3, 1]])
        out = impute(ds)
        assert out.X[1, 0] == 2.0  # median of {1, 3}

    def test_mode_fill(self):
        ds = raw_dataset(
            [[1.0, "A", 1, 1], [1.0, "A", 2, 0], [1.0, None, 3, 1], [1.0, "B", 4, 1]]
        )
        assert impute(ds).X[2, 1] == "A"

    def test_identity_when_complete(self):
        ds = raw_dataset([[1.0, "A", 1, 1], [2.0, "B", 2, 0]])
        assert np.array_equal(impute(ds).X, ds.X)

    def test_idempotent(self):
        ds = raw_dataset([[1.0, "A", 1, 1], [None, None, 2, 0], [3.0, "B", 3, 1]])
        once = impute(ds)
        twice = impute(once)
        assert np.array_equal(once.X, twice.X)

    def test_all_missing_column_raises(self):
        ds = raw_dataset([[None, "A", 1, 1], [None, "B", 2, 0]])
        with pytest.raises(DataError, match="age"):
            impute(ds)

    def test_training_stats_reused_for_test(self):
        train = raw_dataset([[1.0, "A", 1, 1], [3.0, "A", 2, 0]])
        stats = compute_impute_stats(train)
        test = raw_dataset([[None, "B", 5, 1]])
        assert impute(test, stats).X[0, 0] == 2.0


class TestEncode:
    def test_one_hot_layout(self):
        ds = raw_dataset([[0.0, "A", 1, 1], [10.0, "B", 2, 0], [5.0, "C", 3, 1]])
        out = encode(ds)
        assert out.feature_names == ["age", "stage=A", "stage=B", "stage=C"]
        assert np.array_equal(out.X[1, 1:], [0.0, 1.0, 0.0])

    def test_zscore_uses_population_std(self):
        ds = raw_dataset([[0.0, "A", 1, 1], [10.0, "A", 2, 0]])
        out = encode(ds)
        assert np.allclose(out.X[:, 0], [-1.0, 1.0])  # mean 5, population std 5

    def test_zero_variance_passes_through_as_zeros(self):
        ds = raw_dataset([[7.0, "A", 1, 1], [7.0, "A", 2, 0]])
        with pytest.warns(UserWarning, match="zero variance"):
            out = encode(ds)
        assert np.array_equal(out.X[:, 0], [0.0, 0.0])

    def test_unseen_category_maps_to_zeros(self):
        train = raw_dataset([[1.0, "A", 1, 1], [2.0, "B", 2, 0]])
        stats = compute_encode_stats(train)
        test = encode(raw_dataset([[1.5, "Z", 5, 1]]), stats)
        assert np.array_equal(test.X[0, 1:], [0.0, 0.0])

    def test_row_count_and_width(self):
        ds = raw_dataset(
            [[1.0, "A", 1, 1], [2.0, "B", 2, 0], [3.0, "C", 3, 1], [4.0, "A", 4, 0]]
        )
        out = encode(ds)
        assert out.n == 4 and out.width == 1 + 3


class TestStratifiedSplit:
    def test_event_proportions_and_sizes(self):
        rng = np.random.default_rng(0)
        n = 1000
        X = np.empty((n, 1), dtype=object)
        X[:] = [[float(v)] for v in rng.standard_normal(n)]
        y = np.zeros(n)
        y[:300] = 1.0
        ds = SurvDataset(X=X, t=rng.exponential(1, n), y=y, schema=FeatureSchema(
            [("x", "continuous")], "time", "event"))
        train, valid, test = stratified_split(ds, SplitSpec((0.8, 0.1, 0.1), seed=4))
        assert (train.n, valid.n, test.n) == (800, 100, 100)
        for split in (train, valid, test):
            assert 0.28 <= split.y.mean() <= 0.32

    def test_deterministic_given_seed(self):
        ds = raw_dataset([[float(i), "A", i + 1.0, i % 2] for i in range(30)])
        a = stratified_split(ds, SplitSpec((0.6, 0.2, 0.2), seed=9))
        b = stratified_split(ds, SplitSpec((0.6, 0.2, 0.2), seed=9))
        for s1, s2 in zip(a, b):
            assert np.array_equal(s1.t, s2.t)

    def test_empty_split_raises(self):
        ds = raw_dataset([[1.0, "A", 1, 1], [2.0, "A", 2, 1], [3.0, "A", 3, 0]])
        with pytest.raises(DataError):
            stratified_split(ds, SplitSpec((0.8, 0.1, 0.1), seed=1))

    def test_partition_is_disjoint_and_exhaustive(self):
        ds = raw_dataset([[float(i), "A", float(i + 1), i % 3 != 0] for i in range(50)])
        splits = stratified_split(ds, SplitSpec((0.5, 0.25, 0.25), seed=2))
        times = np.concatenate([s.t for s in splits])
        assert sorted(times) == sorted(ds.t)
        assert sum(s.n for s in splits) == ds.n


class TestPrepareSplits:
    def test_pipeline_outputs_encoded_finite(self, tmp_path):
        rng = np.random.default_rng(1)
        lines = ["age,stage,time,event"]
        for i in range(60):
            age = "" if i % 13 == 0 else f"{rng.normal(50, 10):.1f}"
            stage = "NA" if i % 17 == 0 else ("I", "II", "III")[i % 3]
            lines.append(f"{age},{stage},{rng.exponential(3):.3f},{i % 2}")
        ds = load_csv(write(tmp_path, "\n".join(lines) + "\n"), SCHEMA)
        train, valid, test = prepare_splits(ds, SplitSpec((0.6, 0.2, 0.2), seed=3))
        for split in (train, valid, test):
            assert split.encoded and np.all(np.isfinite(split.X))
            assert split.width == 1 + 3

    def test_valid_test_stats_do_not_alter_train(self, tmp_path):
        # applying training statistics elsewhere never changes training output
        text = "age,stage,time,event\n" + "\n".join(
            f"{i},{'AB'[i % 2]},{i + 1},{i % 2}" for i in range(40)
        )
        ds = load_csv(write(tmp_path, text + "\n"), SCHEMA)
        spec = SplitSpec((0.5, 0.25, 0.25), seed=7)
        train_full = prepare_splits(ds, spec)[0]
        train_only, _, _ = stratified_split(ds, spec)
        train_alone = encode(impute(train_only))
        assert np.array_equal(train_full.X, train_alone.X)

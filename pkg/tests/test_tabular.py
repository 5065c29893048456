"""Loading, type inference, and preprocessing of delimited tables."""

import pytest

from biasaudit.errors import (
    AllRowsDroppedError,
    ConstantColumnError,
    DuplicateHeaderError,
    EmptyFileError,
    NonNumericalTargetError,
    RaggedRowError,
    UnknownColumnError,
)
from biasaudit.tabular import (
    AggregateFn,
    CleaningMode,
    CleaningPolicy,
    Kind,
    NormalizeMode,
    clean_missing,
    extract_columns,
    from_columns,
    group_and_aggregate,
    infer_kind,
    list_features,
    load_table,
    normalize_or_standardize,
    save_table,
)


def write(tmp_path, text, name="t.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestListFeatures:
    def test_header_echo(self, tmp_path):
        assert list_features(write(tmp_path, "a,b,c\n1,2,3\n")) == ["a", "b", "c"]

    def test_duplicate_header(self, tmp_path):
        with pytest.raises(DuplicateHeaderError):
            list_features(write(tmp_path, "a,a\n1,2\n"))

    def test_empty_file(self, tmp_path):
        with pytest.raises(EmptyFileError):
            list_features(write(tmp_path, ""))


class TestInferKind:
    def test_mixed_tokens_below_threshold(self):
        assert infer_kind(["1", "2", "x"]) is Kind.CATEGORICAL

    def test_all_reals(self):
        assert infer_kind(["1.5", "2.5"]) is Kind.NUMERICAL

    def test_binary_integer_code(self):
        assert infer_kind(["0", "1", "0", "1"] * 50) is Kind.CATEGORICAL

    def test_many_distinct_reals(self):
        assert infer_kind([f"{i}.25" for i in range(100)]) is Kind.NUMERICAL

    def test_mostly_numeric_with_junk(self):
        vals = [f"{i}.5" for i in range(96)] + ["junk"] * 4
        assert infer_kind(vals) is Kind.NUMERICAL


class TestLoadTable:
    def test_junk_cells_marked_missing(self, tmp_path):
        rows = "\n".join(f"{i}.5" for i in range(96)) + "\njunk\njunk\njunk\njunk\n"
        t = load_table(write(tmp_path, "x\n" + rows))
        col = t.column("x")
        assert col.kind is Kind.NUMERICAL
        assert col.missing_count() == 4

    def test_zero_data_rows(self, tmp_path):
        t = load_table(write(tmp_path, "a,b\n"))
        assert t.row_count == 0
        assert all(c.kind is Kind.CATEGORICAL for c in t.columns)

    def test_ragged_row_reports_row_number(self, tmp_path):
        with pytest.raises(RaggedRowError) as exc:
            load_table(write(tmp_path, "a,b\n1,2\n3\n"))
        assert "row 3" in str(exc.value)

    def test_na_tokens_become_missing(self, tmp_path):
        t = load_table(write(tmp_path, "g\nx\nNA\ny\n?\n"))
        assert t.column("g").missing_count() == 2

    def test_roundtrip(self, tmp_path):
        t = from_columns("r", [("g", "categorical", ("a", None, "b")),
                               ("x", "numerical", (1.5, 2.0, None))])
        p = tmp_path / "rt.csv"
        save_table(t, p)
        back = load_table(p)
        assert back.column("g").values == ("a", None, "b")
        assert back.column("x").values == (1.5, 2.0, None)


class TestExtract:
    def test_single_column(self):
        t = from_columns("t", [("a", "categorical", ("x", "y")),
                               ("b", "numerical", (1.0, 2.0))])
        sub = extract_columns(t, ["a"])
        assert sub.column_names == ["a"]
        assert sub.row_count == 2

    def test_unknown_column(self):
        t = from_columns("t", [("a", "categorical", ("x",))])
        with pytest.raises(UnknownColumnError):
            extract_columns(t, ["nope"])


class TestCleanMissing:
    def test_noop(self):
        t = from_columns("t", [("x", "numerical", (1.0, 2.0))])
        res = clean_missing(t, ["x"])
        assert res.cells_changed == 0 and res.rows_dropped == 0
        assert res.table.column("x").values == (1.0, 2.0)

    def test_fill_median(self):
        t = from_columns("t", [("x", "numerical", (1.0, 2.0, None, 4.0))])
        res = clean_missing(t, ["x"],
                            CleaningPolicy(mode=CleaningMode.FILL_MEDIAN))
        assert res.table.column("x").values == (1.0, 2.0, 2.0, 4.0)
        assert res.cells_changed == 1

    def test_drop_row(self):
        t = from_columns("t", [("x", "numerical", (1.0, None, 3.0)),
                               ("g", "categorical", ("a", "b", "c"))])
        res = clean_missing(t, ["x"])
        assert res.rows_dropped == 1
        assert res.table.column("g").values == ("a", "c")

    def test_all_rows_dropped(self):
        t = from_columns("t", [("x", "numerical", (None, None))])
        with pytest.raises(AllRowsDroppedError):
            clean_missing(t, ["x"])

    def test_fill_median_on_categorical(self):
        t = from_columns("t", [("g", "categorical", ("a", None))])
        with pytest.raises(NonNumericalTargetError):
            clean_missing(t, ["g"], CleaningPolicy(mode=CleaningMode.FILL_MEDIAN))


class TestNormalize:
    def test_normalize_unit_range(self):
        t = from_columns("t", [("x", "numerical", (0.0, 5.0, 10.0))])
        out = normalize_or_standardize(t, "x", NormalizeMode.NORMALIZE)
        assert out.column("x").values == (0.0, 0.5, 1.0)

    def test_standardize_population_sd(self):
        t = from_columns("t", [("x", "numerical", (2.0, 4.0, 6.0))])
        out = normalize_or_standardize(t, "x", NormalizeMode.STANDARDIZE)
        got = out.column("x").values
        assert got[1] == 0.0
        assert got[0] == pytest.approx(-1.224744871391589, abs=1e-12)
        assert got[2] == pytest.approx(1.224744871391589, abs=1e-12)

    def test_constant_column(self):
        t = from_columns("t", [("x", "numerical", (3.0, 3.0))])
        with pytest.raises(ConstantColumnError):
            normalize_or_standardize(t, "x", NormalizeMode.STANDARDIZE)


class TestGroupAggregate:
    def test_mean(self):
        t = from_columns("t", [("g", "categorical", ("a", "a", "b")),
                               ("x", "numerical", (1.0, 3.0, 5.0))])
        out = group_and_aggregate(t, "g", "x", AggregateFn.MEAN)
        assert out.columns[0].values == ("a", "b")
        assert out.columns[1].values == (2.0, 5.0)

    def test_count_ignores_target_kind(self):
        t = from_columns("t", [("g", "categorical", ("a", "a", "b")),
                               ("o", "categorical", ("x", "y", "z"))])
        out = group_and_aggregate(t, "g", "o", AggregateFn.COUNT)
        assert out.columns[1].values == (2.0, 1.0)

    def test_single_group(self):
        t = from_columns("t", [("g", "categorical", ("a", "a")),
                               ("x", "numerical", (1.0, 2.0))])
        out = group_and_aggregate(t, "g", "x", AggregateFn.SUM)
        assert out.row_count == 1

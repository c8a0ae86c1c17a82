import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import vecmkit as vk
from vecmkit import (
    DEFAULT_SCHEMA,
    Frame,
    QuarterIndex,
    Series,
    first_difference,
    lag_matrix,
    load_frame,
    loads_frame,
    location_quotient,
    parse_quarter,
    proxy_quarterly_output,
    summary_stats,
    write_frame,
)
from vecmkit.errors import (
    DomainError,
    EmptyInputError,
    InsufficientDataError,
    MissingColumnError,
    NonNumericCellError,
    QuarterGapError,
    QuarterParseError,
)

from conftest import make_frame


class TestQuarterIndex:
    def test_parse_examples(self):
        assert parse_quarter("2001Q1") == QuarterIndex(2001, 1)
        assert parse_quarter("2018Q1") == QuarterIndex(2018, 1)

    def test_span_of_reference_sample(self):
        # inclusive 2001Q1..2018Q1 holds 69 points
        a, b = parse_quarter("2001Q1"), parse_quarter("2018Q1")
        assert a.distance(b) == 68

    @pytest.mark.parametrize("bad", ["2001Q5", "2001Q0", "2001", "Q1", "2001q1", "20a1Q1", ""])
    def test_parse_rejects(self, bad):
        with pytest.raises(QuarterParseError):
            parse_quarter(bad)

    def test_year_rollover(self):
        assert QuarterIndex(2001, 4).next() == QuarterIndex(2002, 1)

    def test_ordering_is_lexicographic(self):
        assert QuarterIndex(2001, 4) < QuarterIndex(2002, 1)
        assert QuarterIndex(2003, 1) > QuarterIndex(2002, 4)

    @given(
        year=st.integers(min_value=1, max_value=9999),
        quarter=st.integers(min_value=1, max_value=4),
    )
    def test_roundtrip_through_formatting(self, year, quarter):
        q = QuarterIndex(year, quarter)
        assert parse_quarter(str(q)) == q

    @given(
        year=st.integers(min_value=100, max_value=5000),
        quarter=st.integers(min_value=1, max_value=4),
        n=st.integers(min_value=-200, max_value=200),
    )
    def test_shift_distance_inverse(self, year, quarter, n):
        q = QuarterIndex(year, quarter)
        assert q.distance(q.shift(n)) == n


CSV_3ROW = "quarter,value\n2001Q1,1.0\n2001Q2,2.0\n2001Q3,3.0\n"


class TestLoadFrame:
    def test_three_row_toy(self):
        frame = loads_frame(CSV_3ROW, schema=("value",))
        assert len(frame) == 3
        assert frame.start == QuarterIndex(2001, 1)
        np.testing.assert_array_equal(frame.column("value"), [1.0, 2.0, 3.0])

    def test_gap_detection(self):
        text = "quarter,value\n2001Q1,1.0\n2001Q3,3.0\n"
        with pytest.raises(QuarterGapError, match="2001Q2"):
            loads_frame(text, schema=("value",))

    def test_missing_column_named(self):
        with pytest.raises(MissingColumnError, match="price"):
            loads_frame(CSV_3ROW, schema=("value", "price"))

    def test_non_numeric_cell_names_row_and_column(self):
        text = "quarter,value\n2001Q1,1.0\n2001Q2,oops\n"
        with pytest.raises(NonNumericCellError, match=r"row 3.*value"):
            loads_frame(text, schema=("value",))

    def test_empty_file(self):
        with pytest.raises(EmptyInputError):
            loads_frame("", schema=("value",))
        with pytest.raises(EmptyInputError):
            loads_frame("quarter,value\n", schema=("value",))

    def test_columns_reordered_to_schema(self):
        text = "quarter,b,a\n2001Q1,2.0,1.0\n"
        frame = loads_frame(text, schema=("a", "b"))
        assert frame.names == ("a", "b")
        np.testing.assert_array_equal(frame.values, [[1.0, 2.0]])

    def test_reference_shaped_dataset(self, panel69, tmp_path):
        path = tmp_path / "panel.csv"
        write_frame(panel69, path)
        frame = load_frame(path, schema=DEFAULT_SCHEMA)
        assert len(frame) == 69
        assert frame.names == DEFAULT_SCHEMA

    def test_write_load_roundtrip_is_exact(self, panel69, tmp_path):
        path = tmp_path / "roundtrip.csv"
        write_frame(panel69, path)
        again = load_frame(path, schema=panel69.names)
        assert again.start == panel69.start
        np.testing.assert_array_equal(again.values, panel69.values)

    def test_values_are_immutable(self, panel69):
        with pytest.raises(ValueError):
            panel69.values[0, 0] = 99.0


class TestFirstDifference:
    def test_arithmetic(self):
        out = first_difference(make_frame([1.0, 3.0, 6.0]))
        np.testing.assert_array_equal(out.values[:, 0], [2.0, 3.0])
        assert out.start == QuarterIndex(2001, 2)

    def test_constant_series(self):
        out = first_difference(make_frame([5.0, 5.0, 5.0]))
        np.testing.assert_array_equal(out.values[:, 0], [0.0, 0.0])

    def test_linear_trend_becomes_constant(self):
        a, b = 2.0, 0.7
        frame = make_frame(a + b * np.arange(10.0))
        out = first_difference(frame)
        np.testing.assert_allclose(out.values[:, 0], b)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            first_difference(make_frame([1.0]))

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=40))
    def test_reconstruction_from_cumsum(self, values):
        frame = make_frame(values)
        diffed = first_difference(frame)
        rebuilt = values[0] + np.cumsum(diffed.values[:, 0])
        np.testing.assert_allclose(rebuilt, np.asarray(values)[1:], rtol=0, atol=1e-6)


class TestLagMatrix:
    def test_single_lag_alignment(self):
        frame = make_frame([1.0, 2.0, 3.0])
        block = lag_matrix(frame, 1)
        np.testing.assert_array_equal(block[:, 0], [1.0, 2.0])
        np.testing.assert_array_equal(frame.values[1:, 0], [2.0, 3.0])

    def test_usable_row_count(self):
        assert lag_matrix(make_frame([1.0, 2.0, 3.0]), 2).shape == (1, 2)

    def test_reference_counting(self, panel69):
        assert lag_matrix(panel69, 4).shape == (65, 24)

    def test_row_t_of_lag_j(self, panel69):
        block = lag_matrix(panel69, 3)
        k = panel69.n_columns
        for j in (1, 2, 3):
            np.testing.assert_array_equal(
                block[:, (j - 1) * k : j * k], panel69.values[3 - j : 69 - j]
            )

    def test_too_many_lags(self):
        with pytest.raises(InsufficientDataError):
            lag_matrix(make_frame([1.0, 2.0]), 2)


class TestSummaryStats:
    def test_basic(self):
        report = summary_stats(make_frame([1.0, 2.0, 3.0]))
        col = report.columns[0]
        assert col.mean == 2.0
        assert col.sd == pytest.approx(1.0)
        assert (col.minimum, col.maximum, col.count) == (1.0, 3.0, 3)

    def test_constant_column(self):
        assert summary_stats(make_frame([4.0, 4.0, 4.0])).columns[0].sd == 0.0

    def test_min_le_mean_le_max(self, panel69):
        for col in summary_stats(panel69).columns:
            assert col.minimum <= col.mean <= col.maximum
            assert col.count == len(panel69)

    @given(st.permutations(list(range(12))))
    def test_row_permutation_invariance(self, perm):
        base = np.arange(12.0) ** 1.5
        a = summary_stats(make_frame(base)).columns[0]
        b = summary_stats(make_frame(base[perm])).columns[0]
        assert (a.mean, a.minimum, a.maximum) == pytest.approx((b.mean, b.minimum, b.maximum))
        assert a.sd == pytest.approx(b.sd)


class TestOutputProxy:
    def test_uniform_share(self):
        us = Series("us", QuarterIndex(2001, 1), [1000.0] * 4)
        out = proxy_quarterly_output(us, {2001: 40.0}, {2001: 4000.0})
        np.testing.assert_allclose(out.values, 10.0)

    def test_full_share_is_identity(self):
        us = Series("us", QuarterIndex(2001, 1), [7.0, 8.0, 9.0, 10.0])
        out = proxy_quarterly_output(us, {2001: 5.0}, {2001: 5.0})
        np.testing.assert_allclose(out.values, us.values)

    def test_two_year_shares(self):
        us = Series("us", QuarterIndex(2001, 1), [100.0] * 8)
        out = proxy_quarterly_output(
            us, {2001: 1.0, 2002: 2.0}, {2001: 100.0, 2002: 100.0}
        )
        np.testing.assert_allclose(out.values, [1, 1, 1, 1, 2, 2, 2, 2])

    def test_missing_year(self):
        us = Series("us", QuarterIndex(2001, 1), [1.0] * 8)
        with pytest.raises(DomainError, match="2002"):
            proxy_quarterly_output(us, {2001: 1.0}, {2001: 100.0, 2002: 100.0})

    def test_nonpositive_annual(self):
        us = Series("us", QuarterIndex(2001, 1), [1.0])
        with pytest.raises(DomainError):
            proxy_quarterly_output(us, {2001: 0.0}, {2001: 100.0})

    @given(scale=st.floats(0.1, 50.0))
    def test_linear_in_quarterly_input(self, scale):
        base = np.array([3.0, 5.0, 7.0, 11.0])
        us1 = Series("us", QuarterIndex(2001, 1), base)
        us2 = Series("us", QuarterIndex(2001, 1), scale * base)
        out1 = proxy_quarterly_output(us1, {2001: 2.0}, {2001: 9.0})
        out2 = proxy_quarterly_output(us2, {2001: 2.0}, {2001: 9.0})
        np.testing.assert_allclose(out2.values, scale * out1.values, rtol=1e-12)


class TestLocationQuotient:
    def test_basic(self):
        assert location_quotient(10, 100, 1, 100) == pytest.approx(10.0)

    def test_equal_shares_are_neutral(self):
        assert location_quotient(5, 50, 20, 200) == pytest.approx(1.0)

    @pytest.mark.parametrize("bad", [(0, 1, 1, 1), (1, -1, 1, 1), (1, 1, 0, 1), (1, 1, 1, 0)])
    def test_nonpositive_inputs(self, bad):
        with pytest.raises(DomainError):
            location_quotient(*bad)

    @given(scale=st.floats(1e-3, 1e3))
    def test_common_rescale_invariance(self, scale):
        base = location_quotient(10, 100, 3, 600)
        scaled = location_quotient(10 * scale, 100 * scale, 3 * scale, 600 * scale)
        assert scaled == pytest.approx(base, rel=1e-9)

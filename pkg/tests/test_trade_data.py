import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ecivariants.trade_data import (
    DataError, EmptyMatrixError, MacroPanel, MacroRecord, compound_growth, load_exports,
    load_exports_by_year, load_macro, matrix_from_cells, write_exports, write_macro,
)
from oracles import growth_oracle

# frozen from growth_oracle (40-digit arithmetic)
GROWTH_DOUBLE = 0.0717735
GROWTH_HALF = -0.0669670


def csv_bytes(*lines):
    return io.BytesIO(("\n".join(lines) + "\n").encode())


EXPORTS_HEAD = "year,country,product,value"
MACRO_HEAD = "year,country,gdp_pc,population"


def test_duplicate_rows_are_summed():
    x = load_exports(csv_bytes(EXPORTS_HEAD, "2000,AAA,p1,5", "2000,AAA,p1,3", "2000,BBB,p2,4"), 2000)
    assert x.countries == ("AAA", "BBB")
    assert x.products == ("p1", "p2")
    assert x.to_dense().tolist() == [[8.0, 0.0], [0.0, 4.0]]


def test_year_without_rows_is_empty():
    with pytest.raises(EmptyMatrixError):
        load_exports(csv_bytes(EXPORTS_HEAD, "1999,AAA,p1,5"), 2000)


def test_negative_value_names_row():
    with pytest.raises(DataError, match="row 3"):
        load_exports(csv_bytes(EXPORTS_HEAD, "2000,AAA,p1,5", "2000,AAA,p1,-2"), 2000)


@pytest.mark.parametrize("bad", ["abc", "nan", "inf"])
def test_non_numeric_value_rejected(bad):
    with pytest.raises(DataError, match="row 2"):
        load_exports(csv_bytes(EXPORTS_HEAD, "2000,AAA,p1,%s" % bad), 2000)


def test_bad_header_and_field_count():
    with pytest.raises(DataError, match="header"):
        load_exports(csv_bytes("year,country,value", "2000,AAA,1"), 2000)
    with pytest.raises(DataError, match="fields"):
        load_exports(csv_bytes(EXPORTS_HEAD, "2000,AAA,p1"), 2000)


def test_zero_cells_not_stored():
    x = load_exports(csv_bytes(EXPORTS_HEAD, "2000,AAA,p1,0", "2000,AAA,p2,1", "2000,BBB,p1,2"), 2000)
    assert x.values.nnz == 2


def test_text_stream_and_comment_lines():
    x = load_exports(io.StringIO("# made by hand\n" + EXPORTS_HEAD + "\n2000,A,p,1\n"), 2000)
    assert x.to_dense().tolist() == [[1.0]]


def test_by_year_split():
    by = load_exports_by_year(csv_bytes(EXPORTS_HEAD, "2001,A,p,1", "2000,B,q,2", "2001,B,p,3"))
    assert sorted(by) == [2000, 2001]
    assert by[2001].countries == ("A", "B")


def test_macro_two_records():
    panel = load_macro(csv_bytes(MACRO_HEAD, "1995,AAA,1000,2e6", "2005,AAA,2000,2.2e6"))
    assert len(panel) == 2
    assert panel.gdp_pc("AAA", 2005) == 2000.0
    assert panel.population("AAA", 1995) == 2e6
    assert panel.gdp_pc("AAA", 2000) is None


def test_macro_missing_fields():
    panel = load_macro(csv_bytes(MACRO_HEAD, "1995,AAA,,2e6", "1995,BBB,10,"))
    assert panel.gdp_pc("AAA", 1995) is None
    assert panel.population("BBB", 1995) is None


def test_macro_duplicate_key():
    with pytest.raises(DataError, match="AAA, year 1995"):
        load_macro(csv_bytes(MACRO_HEAD, "1995,AAA,1000,2e6", "1995,AAA,1100,2e6"))


@pytest.mark.parametrize("row", ["1995,AAA,0,2e6", "1995,AAA,10,-1"])
def test_macro_nonpositive(row):
    with pytest.raises(DataError, match="positive"):
        load_macro(csv_bytes(MACRO_HEAD, row))


def test_macro_panel_validates_direct_construction():
    with pytest.raises(DataError):
        MacroPanel({("A", 2000): MacroRecord(-1.0, 1.0)})


def test_compound_growth_examples():
    assert compound_growth(100, 100, 10) == 0.0
    assert compound_growth(100, 200, 10) == pytest.approx(GROWTH_DOUBLE, abs=1e-6)
    assert compound_growth(100, 50, 10) == pytest.approx(GROWTH_HALF, abs=1e-6)


def test_frozen_growth_values_match_oracle():
    assert growth_oracle(100, 200, 10) == pytest.approx(GROWTH_DOUBLE, abs=5e-8)
    assert growth_oracle(100, 50, 10) == pytest.approx(GROWTH_HALF, abs=5e-8)


@pytest.mark.parametrize("args", [(0, 1, 10), (1, -1, 10), (1, 2, 0)])
def test_compound_growth_rejects(args):
    with pytest.raises(ValueError):
        compound_growth(*args)


pos = st.floats(1e-3, 1e6)


@given(pos, pos, st.integers(1, 30))
def test_compound_growth_geometric_midpoint(a, c, h):
    # two h-year legs compose into one 2h-year window
    b = math.sqrt(a * c)
    lhs = (1 + compound_growth(a, b, h)) * (1 + compound_growth(b, c, h))
    assert lhs == pytest.approx((1 + compound_growth(a, c, 2 * h)) ** 2, rel=1e-12)


@given(pos, pos, st.integers(1, 30))
def test_compound_growth_matches_oracle(a, b, h):
    g = compound_growth(a, b, h)
    assert g > -1
    assert g == pytest.approx(growth_oracle(a, b, h), rel=1e-12, abs=1e-15)


rows_strategy = st.lists(
    st.tuples(st.sampled_from(["AAA", "BBB", "CCC", "DDD"]), st.sampled_from(["p1", "p2", "p3"]),
              st.floats(0, 1e12, allow_nan=False) | st.sampled_from([0.1, 0.2, 0.3, 1e-17])),
    min_size=1, max_size=40,
).filter(lambda rows: any(v > 0 for _, _, v in rows))


def _load(rows):
    lines = [EXPORTS_HEAD] + ["2000,%s,%s,%r" % r for r in rows]
    return load_exports(csv_bytes(*lines), 2000)


@settings(max_examples=60)
@given(rows_strategy, st.randoms(use_true_random=False))
def test_aggregation_order_independent(rows, rnd):
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    assert _load(rows) == _load(shuffled)


@settings(max_examples=60)
@given(rows_strategy)
def test_round_trip(rows):
    x = _load(rows)
    buf = io.StringIO()
    write_exports(x, buf, provenance=["test"])
    assert load_exports(io.StringIO(buf.getvalue()), 2000) == x


def test_macro_round_trip():
    panel = MacroPanel({("A", 2000): MacroRecord(1234.5678901234, 3e6), ("B", 2000): MacroRecord(None, 1.0),
                        ("A", 2010): MacroRecord(0.1 + 0.2, None)})
    buf = io.StringIO()
    write_macro(panel, buf, provenance=["x"])
    again = load_macro(io.StringIO(buf.getvalue()))
    assert dict(again.records) == dict(panel.records)


def test_matrix_from_cells_sorted_registries():
    x = matrix_from_cells(1990, {("Z", "b"): 1.0, ("A", "a"): 2.0, ("M", "b"): 0.0})
    assert x.countries == ("A", "Z")
    assert x.products == ("a", "b")
    assert np.all(x.values.data > 0)

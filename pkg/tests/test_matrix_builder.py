import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ecivariants.matrix_builder import build_membership, prune, totals, write_weights
from ecivariants.trade_data import DataError, EmptyMatrixError, matrix_from_cells

from conftest import weight_matrix


def export_matrix(dense, year=2000):
    dense = np.asarray(dense, float)
    cells = {("C%02d" % i, "P%02d" % j): float(dense[i, j])
             for i in range(dense.shape[0]) for j in range(dense.shape[1])}
    return matrix_from_cells(year, cells)


def test_totals():
    xc, xp, world = totals(export_matrix([[5, 0], [3, 4]]))
    assert xc.tolist() == [5, 7]
    assert xp.tolist() == [8, 4]
    assert world == 12


def test_totals_single_cell():
    xc, xp, world = totals(export_matrix([[9]]))
    assert xc.tolist() == xp.tolist() == [9] and world == 9


def test_totals_zero_world():
    x = matrix_from_cells(2000, {("A", "p"): 0.0, ("B", "q"): 1.0})
    zero = type(x)(2000, ("A",), ("p",), x.values[:1, :1] * 0)
    with pytest.raises(EmptyMatrixError):
        totals(zero)


def test_binary_rca_hand_case():
    w = build_membership(export_matrix([[10, 0], [2, 8]]), "binary_rca")
    assert w.to_dense().tolist() == [[1, 0], [0, 1]]


def test_binary_rca_tie_is_zero():
    # X = [[1,1],[1,1]]: every X_cp*X equals X_p*X_c, nothing passes
    with pytest.raises(EmptyMatrixError):
        build_membership(export_matrix([[1, 1], [1, 1]]), "binary")


def test_raw_is_identity():
    x = export_matrix([[5, 0, 1], [3, 4, 0]])
    w = build_membership(x, "raw")
    assert np.array_equal(w.to_dense(), x.to_dense())


def test_share_hand_case():
    w = build_membership(export_matrix([[5, 0], [3, 4]]), "share")
    np.testing.assert_allclose(w.to_dense(), [[1.0, 0.0], [0.428571, 0.571429]], atol=1e-6)


def test_unknown_mode():
    with pytest.raises(ValueError):
        build_membership(export_matrix([[1]]), "rca2")


def test_prune_removes_zero_row():
    w, log = prune(weight_matrix([[1, 1], [0, 0], [0, 1]]))
    assert w.countries == ("C00", "C02")
    assert [(r.kind, r.code, r.pass_no) for r in log] == [("country", "C01", 1)]


def test_prune_identity():
    w0 = weight_matrix([[1, 0], [1, 1]])
    w, log = prune(w0)
    assert w == w0 and log == ()


def test_prune_cascade():
    # C01 and C02 have no entries, and P02 is exported by no one. Deleting an
    # empty line cannot empty another one, so everything falls on pass 1 and
    # the second scan confirms the fixed point.
    dense = [[1, 1, 0],
             [0, 0, 0],
             [0, 0, 0]]
    w, log = prune(weight_matrix(dense))
    assert w.countries == ("C00",)
    assert w.products == ("P00", "P01")
    assert {(r.kind, r.code, r.pass_no) for r in log} == {
        ("country", "C01", 1), ("country", "C02", 1), ("product", "P02", 1)}


def test_binary_country_without_rca_is_pruned():
    # C02 exports exactly the world mix: 1 * 4 > 2 * 2 fails on both products
    w = build_membership(export_matrix([[1, 0], [0, 1], [1, 1]]), "binary_rca")
    assert w.countries == ("C00", "C01")
    assert w.to_dense().tolist() == [[1, 0], [0, 1]]
    assert [(r.kind, r.code) for r in w.removed] == [("country", "C02")]


def test_prune_everything_removed():
    with pytest.raises(EmptyMatrixError):
        prune(weight_matrix([[0, 0], [0, 0]]))


def test_share_renormalized_after_pruning():
    w0 = weight_matrix([[0.3, 0.7, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]], mode="share")
    w, _ = prune(w0)
    np.testing.assert_allclose(w.diversity, 1.0, atol=1e-12)


def test_write_weights_sorted():
    buf = io.StringIO()
    write_weights(weight_matrix([[0, 1], [1, 1]]), buf)
    assert buf.getvalue().splitlines() == [
        "country,product,weight", "C00,P01,1.0", "C01,P00,1.0", "C01,P01,1.0"]


dense_exports = arrays(np.float64, st.tuples(st.integers(2, 8), st.integers(2, 10)),
                       elements=st.sampled_from([0.0, 0.0, 1.0, 2.5, 7.0, 100.0, 1e6, 3.3e9]))


def _maybe(fn):
    try:
        return fn()
    except DataError:
        return None


@settings(max_examples=80, deadline=None)
@given(dense_exports, st.sampled_from([0.5, 3.0, 1024.0, 1e-3]))
def test_binary_rca_scale_invariant(dense, lam):
    a = _maybe(lambda: build_membership(export_matrix(dense), "binary_rca"))
    b = _maybe(lambda: build_membership(export_matrix(dense * lam), "binary_rca"))
    assert (a is None) == (b is None)
    if a is not None:
        assert a == b


@settings(max_examples=80, deadline=None)
@given(dense_exports, st.sampled_from(["binary_rca", "share", "raw"]))
def test_builder_invariants(dense, mode):
    w = _maybe(lambda: build_membership(export_matrix(dense), mode))
    if w is None:
        return
    assert w.is_pruned()
    if mode == "binary_rca":
        assert np.all(w.weights.data == 1.0)
    if mode == "share":
        np.testing.assert_allclose(w.diversity, 1.0, atol=1e-12)
    again, log = prune(w)
    assert again == w and log == ()


@settings(max_examples=80, deadline=None)
@given(dense_exports)
def test_binary_rca_dropped_countries_are_logged(dense):
    # a country that exports something but fails every RCA test must be
    # pruned and recorded, never kept with an empty row
    x = _maybe(lambda: export_matrix(dense))
    w = x and _maybe(lambda: build_membership(x, "binary_rca"))
    if w is None:
        return
    xc, _, _ = totals(x)
    exporters = {c for c, v in zip(x.countries, xc) if v > 0}
    dropped = {r.code for r in w.removed if r.kind == "country"}
    assert exporters <= set(w.countries) | dropped
    assert np.all(w.diversity >= 1)

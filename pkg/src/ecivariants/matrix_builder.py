"""
Country-product weight matrices M_cp.

Three modes are supported:

``binary_rca``
    M_cp = 1 where X_cp * X > X_p * X_c (revealed comparative advantage
    above one, strict), else 0.
``share``
    M_cp = X_cp / X_c, the share of product p in the exports of country c.
``raw``
    M_cp = X_cp.

Every builder output is pruned so that no country or product has an empty
row or column; the iteration in :mod:`ecivariants.metric_engine` raises
entries to negative powers and relies on that.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np
import scipy.sparse as sp

from .trade_data import DataError, EmptyMatrixError, ExportMatrix

log = logging.getLogger(__name__)

MODES = ("binary_rca", "share", "raw")
MODE_ALIASES = {"binary": "binary_rca", "binary_rca": "binary_rca", "share": "share", "raw": "raw"}


@dataclass(frozen=True)
class Removal:
    kind: str  # "country" or "product"
    code: str
    pass_no: int


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    mode: str
    year: int
    countries: tuple[str, ...]
    products: tuple[str, ...]
    weights: sp.csr_array
    removed: tuple[Removal, ...] = field(default=())

    @property
    def diversity(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=1)).ravel()

    @property
    def ubiquity(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=0)).ravel()

    @property
    def shape(self) -> tuple[int, int]:
        return self.weights.shape

    def is_pruned(self) -> bool:
        m = self.weights
        return bool(m.shape[0] and m.shape[1]
                    and np.all(np.diff(m.indptr) > 0)
                    and np.all(np.bincount(m.indices, minlength=m.shape[1]) > 0))

    def to_dense(self) -> np.ndarray:
        return self.weights.toarray()

    def __eq__(self, other):
        if not isinstance(other, WeightMatrix):
            return NotImplemented
        a, b = self.weights, other.weights
        return (
            self.mode == other.mode
            and self.year == other.year
            and self.countries == other.countries
            and self.products == other.products
            and np.array_equal(a.indptr, b.indptr)
            and np.array_equal(a.indices, b.indices)
            and np.array_equal(a.data, b.data)
        )

    __hash__ = None


def _canonical(m) -> sp.csr_array:
    m = sp.csr_array(m, dtype=np.float64)
    m.eliminate_zeros()
    m.sum_duplicates()
    m.sort_indices()
    return m


def totals(x: ExportMatrix) -> tuple[np.ndarray, np.ndarray, float]:
    """Return (X_c, X_p, X): country totals, product totals and the world total."""
    xc = np.asarray(x.values.sum(axis=1)).ravel()
    xp = np.asarray(x.values.sum(axis=0)).ravel()
    world = float(x.values.sum())
    if not world > 0:
        raise EmptyMatrixError("world export total is zero for year %d" % x.year)
    if not (np.all(np.isfinite(xc)) and np.all(np.isfinite(xp)) and np.isfinite(world)):
        raise DataError("export totals overflow for year %d" % x.year)
    return xc, xp, world


def build_membership(x: ExportMatrix, mode: str = "binary_rca") -> WeightMatrix:
    """Weight matrix for ``mode``, pruned of empty countries and products."""
    try:
        mode = MODE_ALIASES[mode]
    except KeyError:
        raise ValueError("unknown matrix mode %r, expected one of %s" % (mode, MODES)) from None
    xc, xp, world = totals(x)
    coo = x.values.tocoo()
    r, c, v = coo.row, coo.col, coo.data
    if mode == "binary_rca":
        # cross-multiplied form of X_cp / X_c > X_p / X; equality gives 0
        keep = v * world > xp[c] * xc[r]
        data = np.ones(int(keep.sum()))
        r, c = r[keep], c[keep]
    elif mode == "share":
        data = v / xc[r]
    else:
        data = v.copy()
    weights = _canonical(sp.coo_array((data, (r, c)), shape=x.shape))
    w = WeightMatrix(mode, x.year, x.countries, x.products, weights)
    pruned, _ = prune(w)
    return pruned


def prune(w: WeightMatrix) -> tuple[WeightMatrix, tuple[Removal, ...]]:
    """Drop zero-diversity countries and zero-ubiquity products until none remain.

    Returns the pruned matrix and the removal log of this call. For ``share``
    weights, rows that lost a product are renormalized to sum to one.
    """
    m = _canonical(w.weights)
    countries = np.array(w.countries, dtype=object)
    products = np.array(w.products, dtype=object)
    removed: list[Removal] = []
    pass_no = 0
    while True:
        row_ok = np.diff(m.indptr) > 0
        col_ok = np.bincount(m.indices, minlength=m.shape[1]) > 0
        if row_ok.all() and col_ok.all():
            break
        pass_no += 1
        removed += [Removal("country", str(code), pass_no) for code in countries[~row_ok]]
        removed += [Removal("product", str(code), pass_no) for code in products[~col_ok]]
        m = _canonical(m[row_ok][:, col_ok])
        countries, products = countries[row_ok], products[col_ok]
        if m.shape[0] == 0 or m.shape[1] == 0:
            raise EmptyMatrixError("pruning removed every country or product (year %d)" % w.year)
    if w.mode == "share" and removed:
        sums = np.asarray(m.sum(axis=1)).ravel()
        off = np.abs(sums - 1.0) > 1e-12
        if off.any():
            log.info("renormalized %d share rows after pruning (year %d)", int(off.sum()), w.year)
            m = _canonical(sp.diags_array(1.0 / sums) @ m)
    removed_t = tuple(removed)
    out = WeightMatrix(w.mode, w.year, tuple(str(c) for c in countries),
                       tuple(str(p) for p in products), m, w.removed + removed_t)
    return out, removed_t


def write_weights(w: WeightMatrix, stream: IO[str], provenance: Iterable[str] = ()) -> None:
    """Debug export ``country,product,weight`` sorted by (country, product)."""
    for line in provenance:
        stream.write("# %s\n" % line)
    out = csv.writer(stream, lineterminator="\n")
    out.writerow(("country", "product", "weight"))
    coo = w.weights.tocoo()
    for k in np.lexsort((coo.col, coo.row)):
        out.writerow((w.countries[coo.row[k]], w.products[coo.col[k]], repr(float(coo.data[k]))))

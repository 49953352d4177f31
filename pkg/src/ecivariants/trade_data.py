"""
Loading of country-product export flows and macroeconomic panels.

Both loaders read the comma separated formats described in the README and
return immutable containers. Malformed rows raise :class:`DataError` with the
offending (1-based, header included) line number.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import IO, Iterable, Mapping

import numpy as np
import scipy.sparse as sp

EXPORTS_HEADER = ("year", "country", "product", "value")
MACRO_HEADER = ("year", "country", "gdp_pc", "population")


class DataError(ValueError):
    """Raised for invalid or unusable input data."""


class EmptyMatrixError(DataError):
    pass


def _text(source: IO) -> IO[str]:
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def _rows(source: IO, header: tuple[str, ...]) -> Iterable[tuple[int, list[str]]]:
    reader = csv.reader(_text(source))
    skipped = 0
    for first in reader:
        # leading '#' lines carry provenance headers
        if first and first[0].startswith("#"):
            skipped += 1
            continue
        break
    else:
        raise DataError("input is empty, expected header %s" % ",".join(header))
    if tuple(h.strip() for h in first) != header:
        raise DataError("bad header %r, expected %s" % (first, ",".join(header)))
    for lineno, row in enumerate(reader, start=skipped + 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError("row %d: expected %d fields, got %d" % (lineno, len(header), len(row)))
        yield lineno, [c.strip() for c in row]


def _parse_year(text: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise DataError("row %d: year %r is not an integer" % (lineno, text)) from None


def _parse_float(text: str, name: str, lineno: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError("row %d: %s %r is not numeric" % (lineno, name, text)) from None
    if not math.isfinite(value):
        raise DataError("row %d: %s %r is not finite" % (lineno, name, text))
    return value


@dataclass(frozen=True, eq=False)
class ExportMatrix:
    """Export values X_cp of one year.

    ``values`` is a canonical CSR array (sorted indices, no explicit zeros)
    with rows following ``countries`` and columns following ``products``.
    """

    year: int
    countries: tuple[str, ...]
    products: tuple[str, ...]
    values: sp.csr_array

    def __post_init__(self):
        if len(set(self.countries)) != len(self.countries):
            raise DataError("duplicate country codes")
        if len(set(self.products)) != len(self.products):
            raise DataError("duplicate product codes")
        if self.values.shape != (len(self.countries), len(self.products)):
            raise DataError("values shape does not match registries")
        data = self.values.data
        if not np.all(np.isfinite(data)) or np.any(data < 0):
            raise DataError("export values must be finite and nonnegative")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def to_dense(self) -> np.ndarray:
        return self.values.toarray()

    def __eq__(self, other):
        if not isinstance(other, ExportMatrix):
            return NotImplemented
        return (
            self.year == other.year
            and self.countries == other.countries
            and self.products == other.products
            and np.array_equal(self.values.indptr, other.values.indptr)
            and np.array_equal(self.values.indices, other.values.indices)
            and np.array_equal(self.values.data, other.values.data)
        )

    __hash__ = None


def matrix_from_cells(year: int, cells: Mapping[tuple[str, str], float]) -> ExportMatrix:
    """Build an ExportMatrix from a ``{(country, product): value}`` mapping.

    Zero-valued cells are dropped; codes are sorted lexicographically.
    """
    cells = {k: float(v) for k, v in cells.items() if v != 0}
    countries = tuple(sorted({c for c, _ in cells}))
    products = tuple(sorted({p for _, p in cells}))
    if not cells:
        raise EmptyMatrixError("no nonzero export values for year %d" % year)
    ci = {c: i for i, c in enumerate(countries)}
    pi = {p: j for j, p in enumerate(products)}
    keys = sorted(cells)
    rows = np.fromiter((ci[c] for c, _ in keys), dtype=np.int64, count=len(keys))
    cols = np.fromiter((pi[p] for _, p in keys), dtype=np.int64, count=len(keys))
    vals = np.fromiter((cells[k] for k in keys), dtype=np.float64, count=len(keys))
    values = sp.csr_array((vals, (rows, cols)), shape=(len(countries), len(products)))
    values.sum_duplicates()
    values.sort_indices()
    return ExportMatrix(year, countries, products, values)


def load_exports(source: IO, year: int) -> ExportMatrix:
    """Read the rows of ``year`` from an exports file into an ExportMatrix.

    Duplicate (country, product) rows are summed. All rows are validated,
    including those of other years.
    """
    cells = _collect(source, year).get(year)
    if not cells:
        raise EmptyMatrixError("no export rows for year %d" % year)
    return matrix_from_cells(year, cells)


def load_exports_by_year(source: IO) -> dict[int, ExportMatrix]:
    """Read every year of an exports file; years with only zero values are skipped."""
    out = {}
    for y, cells in sorted(_collect(source, None).items()):
        if any(v != 0 for v in cells.values()):
            out[y] = matrix_from_cells(y, cells)
    if not out:
        raise EmptyMatrixError("exports file holds no nonzero values")
    return out


def _collect(source: IO, year: int | None) -> dict[int, dict[tuple[str, str], float]]:
    parts: dict[int, dict[tuple[str, str], list[float]]] = {}
    for lineno, (y, country, product, value) in _rows(source, EXPORTS_HEADER):
        y = _parse_year(y, lineno)
        v = _parse_float(value, "value", lineno)
        if v < 0:
            raise DataError("row %d: negative export value %r" % (lineno, value))
        if not country or not product:
            raise DataError("row %d: empty country or product code" % lineno)
        if year is not None and y != year:
            continue
        parts.setdefault(y, {}).setdefault((country, product), []).append(v)
    # fsum is exact-rounded, so row order cannot change a cell total
    return {y: {k: math.fsum(vs) for k, vs in cells.items()} for y, cells in parts.items()}


def _comment(stream: IO[str], lines: Iterable[str]) -> None:
    for line in lines:
        stream.write("# %s\n" % line)


def write_exports(matrices: ExportMatrix | Iterable[ExportMatrix], stream: IO[str],
                  provenance: Iterable[str] = ()) -> None:
    """Write matrices in the canonical exports format, sorted by (year, country, product)."""
    if isinstance(matrices, ExportMatrix):
        matrices = [matrices]
    _comment(stream, provenance)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(EXPORTS_HEADER)
    for m in sorted(matrices, key=lambda m: m.year):
        coo = m.values.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for k in order:
            w.writerow((m.year, m.countries[coo.row[k]], m.products[coo.col[k]], repr(float(coo.data[k]))))


@dataclass(frozen=True)
class MacroRecord:
    gdp_pc: float | None
    population: float | None


@dataclass(frozen=True)
class MacroPanel:
    records: Mapping[tuple[str, int], MacroRecord] = field(default_factory=dict)

    def __post_init__(self):
        for key, rec in self.records.items():
            for name in ("gdp_pc", "population"):
                v = getattr(rec, name)
                if v is not None and not (math.isfinite(v) and v > 0):
                    raise DataError("%s for %s must be finite and positive, got %r" % (name, key, v))
        object.__setattr__(self, "records", MappingProxyType(dict(sorted(self.records.items()))))

    def gdp_pc(self, country: str, year: int) -> float | None:
        rec = self.records.get((country, year))
        return None if rec is None else rec.gdp_pc

    def population(self, country: str, year: int) -> float | None:
        rec = self.records.get((country, year))
        return None if rec is None else rec.population

    @property
    def years(self) -> list[int]:
        return sorted({y for _, y in self.records})

    @property
    def countries(self) -> list[str]:
        return sorted({c for c, _ in self.records})

    def __len__(self):
        return len(self.records)


def load_macro(source: IO) -> MacroPanel:
    """Read a macro panel; empty fields are missing values."""
    records: dict[tuple[str, int], MacroRecord] = {}
    for lineno, (y, country, gdp, pop) in _rows(source, MACRO_HEADER):
        y = _parse_year(y, lineno)
        if not country:
            raise DataError("row %d: empty country code" % lineno)
        values = []
        for name, text in (("gdp_pc", gdp), ("population", pop)):
            if text == "":
                values.append(None)
                continue
            v = _parse_float(text, name, lineno)
            if v <= 0:
                raise DataError("row %d: %s must be positive, got %r" % (lineno, name, text))
            values.append(v)
        key = (country, y)
        if key in records:
            raise DataError("row %d: duplicate macro record for country %s, year %d" % (lineno, country, y))
        records[key] = MacroRecord(*values)
    return MacroPanel(records)


def write_macro(panel: MacroPanel, stream: IO[str], provenance: Iterable[str] = ()) -> None:
    _comment(stream, provenance)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(MACRO_HEADER)
    for (country, year), rec in sorted(panel.records.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        w.writerow((
            year, country,
            "" if rec.gdp_pc is None else repr(rec.gdp_pc),
            "" if rec.population is None else repr(rec.population),
        ))


def compound_growth(v_start: float, v_end: float, horizon: float) -> float:
    """Annualized compound growth rate between two positive levels."""
    if not (v_start > 0 and v_end > 0):
        raise ValueError("levels must be positive, got %r and %r" % (v_start, v_end))
    if not horizon >= 1:
        raise ValueError("horizon must be at least 1 year, got %r" % horizon)
    return math.expm1(math.log(v_end / v_start) / horizon)

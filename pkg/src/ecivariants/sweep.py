"""
Sweeps of all 729 variants over a range of start years, and the statistics
computed from the resulting grid of growth regressions.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .econometrics import RankDeficientError, RegressionResult, _solow_only, fit_growth, growth_sample
from .matrix_builder import MODE_ALIASES, build_membership
from .metric_engine import (
    EXPONENT_NAMES, N_VARIANTS, ORIGINAL_ECI, ComplexityScores, IterationOptions, index_to_spec, iterate_variants,
)
from .trade_data import DataError, ExportMatrix, MacroPanel

log = logging.getLogger(__name__)

VARIANTS = tuple(range(1, N_VARIANTS + 1))


@dataclass(frozen=True, eq=False)
class SweepReport:
    mode: str
    horizon: int
    start_years: tuple[int, ...]
    grid: Mapping[tuple[int, int], RegressionResult]
    scores_cache: Mapping[tuple[int, int], ComplexityScores] | None = None
    dropped_years: Mapping[int, str] = field(default_factory=dict)
    variants: tuple[int, ...] = VARIANTS

    def result(self, variant: int, year: int) -> RegressionResult:
        return self.grid[variant, year]

    def r_squared(self, year: int) -> np.ndarray:
        """R^2 of every variant for ``year``, in variant order."""
        return np.array([self.grid[v, year].r_squared for v in self.variants])

    def scores(self, variant: int, year: int) -> ComplexityScores:
        if self.scores_cache is None or (variant, year) not in self.scores_cache:
            raise KeyError("scores for variant %d, year %d were not kept" % (variant, year))
        return self.scores_cache[variant, year]


def default_start_years(exports_by_year: Mapping[int, ExportMatrix], panel: MacroPanel, horizon: int) -> list[int]:
    """Years with export data whose window end is covered by the macro panel."""
    panel_years = set(panel.years)
    return [y for y in sorted(exports_by_year) if y in panel_years and y + horizon in panel_years]


def _sweep_year(x: ExportMatrix, panel: MacroPanel, year: int, horizon: int, mode: str,
                opts: IterationOptions, specs) -> tuple[list[ComplexityScores], list[RegressionResult]]:
    w = build_membership(x, mode)
    sample = growth_sample(w.countries, panel, year, horizon)
    scores = iterate_variants(w, specs, opts, on_overflow="degenerate")
    results = []
    for s in scores:
        if s.status == "overflow":
            log.warning("variant %d overflowed in year %d; kept as degenerate", s.index, year)
        try:
            results.append(fit_growth(sample, s.k_c, s.degenerate))
        except RankDeficientError:
            log.warning("variant %d is collinear with the controls in year %d; fitted without it", s.index, year)
            results.append(_solow_only(sample))
    return scores, results


def run_sweep(exports_by_year: Mapping[int, ExportMatrix], panel: MacroPanel,
              start_years: Sequence[int] | None = None, horizon: int = 10, mode: str = "binary_rca",
              opts: IterationOptions | None = None, threads: int = 1, keep_scores: bool = True,
              variants: Sequence[int] | None = None) -> SweepReport:
    """Compute every variant and its growth regression for each usable start year.

    Years without exports or with fewer than six complete macro records are
    dropped with a warning. Years run concurrently when ``threads > 1``; the
    report is assembled in year order, so the result does not depend on it.
    """
    opts = opts or IterationOptions()
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    variants = VARIANTS if variants is None else tuple(sorted(set(variants)))
    specs = [index_to_spec(v) for v in variants]
    years = default_start_years(exports_by_year, panel, horizon) if start_years is None else list(start_years)

    def job(year):
        if year not in exports_by_year:
            return year, None, "no export data for start year %d" % year
        try:
            return year, _sweep_year(exports_by_year[year], panel, year, horizon, mode, opts, specs), None
        except (DataError, RankDeficientError) as exc:
            return year, None, str(exc)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(job, years))
    else:
        outcomes = [job(y) for y in years]

    grid: dict[tuple[int, int], RegressionResult] = {}
    cache: dict[tuple[int, int], ComplexityScores] = {}
    used, dropped = [], {}
    for year, out, reason in outcomes:
        if out is None:
            log.warning("dropping start year %d: %s", year, reason)
            dropped[year] = reason
            continue
        used.append(year)
        for v, s, r in zip(variants, *out):
            grid[v, year] = r
            if keep_scores:
                cache[v, year] = s
    if not used:
        raise DataError("no usable start years (%d requested)" % len(years))
    return SweepReport(mode=MODE_ALIASES.get(mode, mode), horizon=horizon, start_years=tuple(used), grid=grid,
                       scores_cache=cache if keep_scores else None, dropped_years=dropped, variants=variants)


def within_fraction(report: SweepReport, fraction: float) -> tuple[float, dict[int, float]]:
    """Share of (variant, year) pairs whose R^2 reaches ``fraction`` of that year's best.

    Returns the pooled pair fraction and, per variant, the share of years in
    which it qualifies.
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    if not report.grid:
        raise ValueError("empty sweep grid")
    hits = np.zeros(len(report.variants))
    for y in report.start_years:
        r2 = report.r_squared(y)
        hits += r2 >= fraction * r2.max()
    n_years = len(report.start_years)
    per_variant = {v: float(h / n_years) for v, h in zip(report.variants, hits)}
    return float(hits.sum() / (n_years * len(report.variants))), per_variant


def significance_counts(report: SweepReport, p_threshold: float = 0.01) -> dict[int, int]:
    """Per variant, the number of years with a positive complexity coefficient at p < threshold."""
    counts = {}
    for v in report.variants:
        n = 0
        for y in report.start_years:
            r = report.grid[v, y]
            if not r.eci_degenerate and r.eci_coef > 0 and r.eci_p < p_threshold:
                n += 1
        counts[v] = n
    return counts


def robust_variants(counts: Mapping[int, int], min_count: int) -> list[int]:
    return sorted(v for v, c in counts.items() if c >= min_count)


def default_min_count(n_years: int) -> int:
    """Robustness threshold scaled from 9 significant fits out of 15."""
    return math.ceil(0.6 * n_years - 1e-9)


def correlation_with_reference(report: SweepReport, year: int, reference_variant: int = ORIGINAL_ECI) -> dict[int, float | None]:
    """Squared Pearson correlation of each variant's k_c with the reference variant, for one year.

    Degenerate variants map to ``None``.
    """
    ref = report.scores(reference_variant, year)
    if ref.degenerate:
        raise ValueError("reference variant %d is degenerate in year %d" % (reference_variant, year))
    ref_pos = {c: i for i, c in enumerate(ref.countries)}
    out: dict[int, float | None] = {}
    for v in report.variants:
        s = report.scores(v, year)
        if s.degenerate:
            out[v] = None
            continue
        common = [c for c in s.countries if c in ref_pos]
        if len(common) < 3:
            out[v] = None
            continue
        own = dict(zip(s.countries, s.k_c))
        a = np.array([own[c] for c in common])
        b = np.array([ref.k_c[ref_pos[c]] for c in common])
        if a.std() == 0 or b.std() == 0:
            out[v] = None
            continue
        r = float(np.corrcoef(a, b)[0, 1])
        out[v] = min(1.0, r * r)
    return out


PATTERN_HEADER = ("variant",) + EXPONENT_NAMES


def export_pattern(variants: Iterable[int]) -> list[tuple[int, ...]]:
    """Rows ``(index, alpha, ..., theta)`` for the given variant indices."""
    return [(v,) + index_to_spec(v).as_tuple() for v in variants]


def write_pattern(rows: Iterable[Sequence[int]], stream: IO[str], provenance: Iterable[str] = ()) -> None:
    _comment(stream, provenance)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(PATTERN_HEADER)
    w.writerows(rows)


class RankedCountry(NamedTuple):
    rank: int
    country: str
    value: float


class Rankings(NamedTuple):
    top: list[RankedCountry]
    bottom: list[RankedCountry]


def export_rankings(scores: ComplexityScores, top_n: int = 10, bottom_n: int = 10) -> Rankings:
    """Best and worst countries by k_c. Ties go to the smaller country code."""
    if scores.degenerate:
        raise ValueError("variant %d is degenerate; it does not rank countries" % scores.index)
    if top_n < 0 or bottom_n < 0:
        raise ValueError("list lengths must be nonnegative")
    items = list(zip(scores.countries, scores.k_c.tolist()))
    desc = sorted(items, key=lambda cv: (-cv[1], cv[0]))
    asc = sorted(items, key=lambda cv: (cv[1], cv[0]))
    n = len(items)
    top = [RankedCountry(i + 1, c, v) for i, (c, v) in enumerate(desc[:top_n])]
    # bottom ranks count from the top so both lists share one scale
    bottom = [RankedCountry(n - i, c, v) for i, (c, v) in enumerate(asc[:bottom_n])]
    return Rankings(top, bottom)


def write_rankings(rankings: Rankings, stream: IO[str], provenance: Iterable[str] = ()) -> None:
    _comment(stream, provenance)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(("list", "rank", "country", "k_c"))
    for name, rows in (("top", rankings.top), ("bottom", rankings.bottom)):
        for r in rows:
            w.writerow((name, r.rank, r.country, repr(r.value)))


def headline(report: SweepReport, fractions: Sequence[float] = (0.9, 0.8), p_threshold: float = 0.01,
             min_count: int | None = None, reference_variant: int = ORIGINAL_ECI,
             correlation_cut: float = 0.5) -> dict:
    """Summary numbers of a sweep: within-fraction shares, robust set, correlation with the reference."""
    out: dict = {"start_years": list(report.start_years), "n_variants": len(report.variants)}
    out["within"] = {}
    for f in fractions:
        pair, per_variant = within_fraction(report, f)
        out["within"][repr(float(f))] = {
            "pair_fraction": pair,
            "variant_share_always": float(np.mean([s == 1.0 for s in per_variant.values()])),
            "variant_share_mean": float(np.mean(list(per_variant.values()))),
            "reference_share": per_variant.get(reference_variant),
        }
    counts = significance_counts(report, p_threshold)
    if min_count is None:
        min_count = default_min_count(len(report.start_years))
    robust = robust_variants(counts, min_count)
    out["p_threshold"] = p_threshold
    out["min_count"] = min_count
    out["robust_variants"] = robust
    out["robust_count"] = len(robust)
    out["max_count"] = max(counts.values())
    degenerate = {v for v in report.variants if all(report.grid[v, y].eci_degenerate for y in report.start_years)}
    out["degenerate_variants"] = len(degenerate)
    if report.scores_cache is not None and reference_variant in report.variants:
        corr = {}
        for y in report.start_years:
            if report.scores(reference_variant, y).degenerate:
                continue
            r2 = [v for k, v in correlation_with_reference(report, y, reference_variant).items()
                  if v is not None and k != reference_variant]
            corr[str(y)] = float(np.mean([v >= correlation_cut for v in r2])) if r2 else None
        out["correlated_share"] = corr
    return out


def _comment(stream: IO[str], lines: Iterable[str]) -> None:
    for line in lines:
        stream.write("# %s\n" % line)


def report_to_dict(report: SweepReport) -> dict:
    grid = []
    for y in report.start_years:
        for v in report.variants:
            r = report.grid[v, y]
            grid.append({
                "variant": v,
                "start_year": y,
                "r_squared": r.r_squared,
                "eci_coef": r.eci_coef,
                "eci_p": r.eci_p,
                "n_obs": r.n_obs,
                "degenerate": r.eci_degenerate,
            })
    return {
        "mode": report.mode,
        "horizon": report.horizon,
        "start_years": list(report.start_years),
        "dropped_years": {str(k): v for k, v in sorted(report.dropped_years.items())},
        "grid": grid,
    }


def write_report(report: SweepReport, stream: IO[str], extra: Mapping | None = None) -> None:
    doc = dict(extra or {})
    doc.update(report_to_dict(report))
    json.dump(doc, stream, indent=1, sort_keys=True)
    stream.write("\n")


def write_landscape(report: SweepReport, year: int, stream: IO[str], provenance: Iterable[str] = ()) -> None:
    """``variant,r_squared`` for one start year in variant order."""
    _comment(stream, provenance)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(("variant", "r_squared"))
    for v in report.variants:
        w.writerow((v, repr(report.grid[v, year].r_squared)))


def write_counts(counts: Mapping[int, int], stream: IO[str], provenance: Iterable[str] = ()) -> None:
    _comment(stream, provenance)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(("variant", "significant_count"))
    for v in sorted(counts):
        w.writerow((v, counts[v]))

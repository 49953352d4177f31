"""
Seeded synthetic data for tests, demos and the null baseline.

Exports follow a latent-capability model: country c exports product p with
probability sigmoid(slope * (capability_c - difficulty_p)), which produces the
nested country-product structure seen in real trade data. Macro panels are
either independent of complexity, or carry a planted growth signal built
from one variant's scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .econometrics import fit_growth, growth_sample
from .matrix_builder import build_membership
from .metric_engine import ORIGINAL_ECI, IterationOptions, iterate_variant
from .trade_data import ExportMatrix, MacroPanel, MacroRecord, matrix_from_cells


# stream tags keep generators that share a user seed independent
_EXPORTS, _PANEL, _PLANTED, _BASELINE = 1, 2, 3, 4


def country_codes(n: int) -> list[str]:
    return ["C%03d" % i for i in range(n)]


def product_codes(n: int) -> list[str]:
    return ["P%04d" % i for i in range(n)]


def synthetic_exports(n_countries: int = 50, n_products: int = 200, years: Sequence[int] = (2000,),
                      seed: int = 0, slope: float = 2.5, drift: float = 0.05) -> dict[int, ExportMatrix]:
    rng = np.random.default_rng([seed, _EXPORTS])
    capability = rng.normal(size=n_countries)
    difficulty = rng.normal(size=n_products)
    size_c = rng.lognormal(0.0, 1.0, n_countries)
    size_p = rng.lognormal(0.0, 1.0, n_products)
    countries, products = country_codes(n_countries), product_codes(n_products)
    out = {}
    for year in sorted(years):
        cap = capability + drift * rng.normal(size=n_countries)
        gap = cap[:, None] - difficulty[None, :]
        exported = rng.random((n_countries, n_products)) < 1.0 / (1.0 + np.exp(-slope * gap))
        value = 1e6 * size_c[:, None] * size_p[None, :] * np.exp(0.5 * gap) \
            * rng.lognormal(0.0, 0.5, (n_countries, n_products))
        cells = {(countries[i], products[j]): float(value[i, j]) for i, j in zip(*np.nonzero(exported))}
        out[year] = matrix_from_cells(year, cells)
    return out


def _population(rng, n):
    return np.exp(rng.normal(16.0, 1.5, n))


def synthetic_panel(countries: Sequence[str], years: Sequence[int], seed: int = 0,
                    persistence: float = 0.8) -> MacroPanel:
    """GDP per capita random walks with persistent country growth rates, no link to exports."""
    rng = np.random.default_rng([seed, _PANEL])
    n = len(countries)
    years = sorted(years)
    log_gdp = 8.0 + rng.normal(0.0, 1.0, n)
    log_pop = np.log(_population(rng, n))
    trend = 0.02 + 0.01 * rng.normal(size=n)
    records = {}
    for k, year in enumerate(range(years[0], years[-1] + 1)):
        if k:
            shock = 0.02 * rng.normal(size=n)
            log_gdp = log_gdp + persistence * trend + (1 - persistence) * 0.02 + shock
            log_pop = log_pop + 0.01 + 0.002 * rng.normal(size=n)
        if year in years:
            for c, g, p in zip(countries, np.exp(log_gdp), np.exp(log_pop)):
                records[c, year] = MacroRecord(float(g), float(p))
    return MacroPanel(records)


def planted_panel(exports_by_year: Mapping[int, ExportMatrix], start_years: Sequence[int], horizon: int = 10,
                  seed: int = 0, variant: int = ORIGINAL_ECI, strength: float = 0.5, noise: float = 0.1,
                  mode: str = "binary_rca", opts: IterationOptions | None = None) -> MacroPanel:
    """Panel whose growth over each window is an affine function of strength * k_c + noise.

    k_c are the standardized scores of ``variant`` in the start year. Growth
    is 2% + 1% * (strength * k_c + noise * N(0, 1)); standardization in the
    regression makes the affine map irrelevant.
    """
    starts = sorted(start_years)
    ends = {y + horizon for y in starts}
    if ends & set(starts):
        raise ValueError("start years and window ends overlap")
    rng = np.random.default_rng([seed, _PLANTED])
    records = {}
    for year in starts:
        scores = iterate_variant(build_membership(exports_by_year[year], mode), variant, opts)
        n = len(scores.countries)
        gdp0 = np.exp(8.0 + rng.normal(0.0, 1.0, n))
        pop = _population(rng, n)
        growth = 0.02 + 0.01 * (strength * scores.k_c + noise * rng.normal(size=n))
        gdp1 = gdp0 * (1.0 + growth) ** horizon
        for c, g0, g1, p in zip(scores.countries, gdp0, gdp1, pop):
            records[c, year] = MacroRecord(float(g0), float(p))
            records[c, year + horizon] = MacroRecord(float(g1), None)
    return MacroPanel(records)


@dataclass(frozen=True)
class BaselineSummary:
    trials: int
    successes: int
    p_threshold: float
    n_countries: int

    @property
    def fraction(self) -> float:
        return self.successes / self.trials


def null_baseline(trials: int, n_countries: int = 100, seed: int = 0, p_threshold: float = 0.01,
                  panel: MacroPanel | None = None, start_year: int | None = None,
                  horizon: int = 10) -> BaselineSummary:
    """Fit the growth model with pure-noise complexity scores, ``trials`` times.

    Counts fits whose complexity coefficient is positive at p < threshold.
    With ``panel`` the real growth and controls of ``start_year`` are reused
    and only the scores are redrawn; otherwise every trial draws a fresh
    independent panel of ``n_countries``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hits = 0
    fixed = None
    if panel is not None:
        if start_year is None:
            raise ValueError("start_year is required with a panel")
        fixed = growth_sample(panel.countries, panel, start_year, horizon)
        n_countries = fixed.n_obs
    for t in range(trials):
        rng = np.random.default_rng([seed, _BASELINE, t])
        if fixed is None:
            countries = country_codes(n_countries)
            gdp0 = np.exp(8.0 + rng.normal(0.0, 1.0, n_countries))
            gdp1 = gdp0 * (1.0 + 0.02 + 0.02 * rng.normal(size=n_countries)) ** horizon
            pop = _population(rng, n_countries)
            recs = {}
            for c, a, b, p in zip(countries, gdp0, gdp1, pop):
                recs[c, 2000] = MacroRecord(float(a), float(p))
                recs[c, 2000 + horizon] = MacroRecord(float(b), None)
            sample = growth_sample(countries, MacroPanel(recs), 2000, horizon)
        else:
            sample = fixed
        k = np.zeros(int(sample.rows.max()) + 1)
        k[sample.rows] = rng.normal(size=sample.n_obs)
        r = fit_growth(sample, k)
        hits += r.eci_coef > 0 and r.eci_p < p_threshold
    return BaselineSummary(trials, int(hits), p_threshold, n_countries)

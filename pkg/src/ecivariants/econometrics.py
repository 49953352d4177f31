"""
Ordinary least squares with classical inference, and the ten-year growth
regression

    growth(t, t+h) ~ C + k_c(t) + log gdp_pc(t) + log population(t)

fitted on z-scored variables.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg
from scipy.special import betainc

from .metric_engine import ComplexityScores, zscore
from .trade_data import DataError, MacroPanel, compound_growth

COEF_NAMES = ("intercept", "eci", "gdp", "pop")
MIN_SAMPLE = 6


class RankDeficientError(np.linalg.LinAlgError):
    def __init__(self, column: int, name: str | None = None):
        label = name if name is not None else "column %d" % column
        super().__init__("design matrix is rank deficient: %s is collinear with earlier columns" % label)
        self.column = column


class InsufficientSampleError(DataError):
    pass


@dataclass(frozen=True)
class RegressionResult:
    coefficients: tuple[float, ...]
    standard_errors: tuple[float, ...]
    t_stats: tuple[float, ...]
    p_values: tuple[float, ...]
    r_squared: float
    n_obs: int
    eci_degenerate: bool = False

    def _get(self, seq, name):
        return seq[COEF_NAMES.index(name)]

    @property
    def intercept(self) -> float:
        return self.coefficients[0]

    @property
    def eci_coef(self) -> float:
        return self._get(self.coefficients, "eci")

    @property
    def eci_p(self) -> float:
        return self._get(self.p_values, "eci")

    @property
    def gdp_coef(self) -> float:
        return self._get(self.coefficients, "gdp")

    @property
    def pop_coef(self) -> float:
        return self._get(self.coefficients, "pop")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("coefficients", "standard_errors", "t_stats", "p_values"):
            d[k] = dict(zip(COEF_NAMES, d[k])) if len(d[k]) == len(COEF_NAMES) else list(d[k])
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def t_pvalue(t: float, dof: int) -> float:
    """Two-sided Student-t p-value, via the regularized incomplete beta function.

    P(|T| > t) = I_{dof / (dof + t^2)}(dof / 2, 1 / 2)
    """
    if not math.isfinite(t):
        raise ValueError("t statistic must be finite, got %r" % t)
    if dof < 1:
        raise ValueError("degrees of freedom must be >= 1, got %r" % dof)
    if t == 0:
        return 1.0
    x = dof / (dof + t * t)
    return float(min(1.0, max(0.0, betainc(0.5 * dof, 0.5, x))))


def ols(y, predictors, names=None) -> RegressionResult:
    """Least squares through a QR factorization.

    ``predictors`` must already contain the constant column. Residual variance
    uses n - k degrees of freedom; R^2 is unadjusted and taken as 0 when y has
    no variance.
    """
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(predictors, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValueError("shape mismatch between y %s and predictors %s" % (y.shape, x.shape))
    n, k = x.shape
    if n < k + 1:
        raise InsufficientSampleError("need at least %d observations for %d columns, got %d" % (k + 1, k, n))
    q, r = np.linalg.qr(x, mode="reduced")
    diag = np.abs(np.diag(r))
    col_norms = np.linalg.norm(x, axis=0)
    for j in range(k):
        if diag[j] <= 1e-10 * max(col_norms[j], 1e-300):
            raise RankDeficientError(j, None if names is None else names[j])
    beta = scipy.linalg.solve_triangular(r, q.T @ y)
    resid = y - x @ beta
    ssr = float(resid @ resid)
    dev = y - y.mean()
    sst = float(dev @ dev)
    r2 = 0.0 if sst <= 0 else min(1.0, max(0.0, 1.0 - ssr / sst))
    dof = n - k
    sigma2 = ssr / dof
    r_inv = scipy.linalg.solve_triangular(r, np.eye(k))
    se = np.sqrt(sigma2 * np.sum(r_inv * r_inv, axis=1))
    t = np.where(se > 0, beta / np.where(se > 0, se, 1.0), 0.0)
    p = [t_pvalue(float(ti), dof) if s > 0 else (1.0 if b == 0 else 0.0) for ti, s, b in zip(t, se, beta)]
    return RegressionResult(
        coefficients=tuple(float(b) for b in beta),
        standard_errors=tuple(float(s) for s in se),
        t_stats=tuple(float(v) for v in t),
        p_values=tuple(float(v) for v in p),
        r_squared=float(r2),
        n_obs=n,
    )


@dataclass(frozen=True, eq=False)
class GrowthSample:
    """Listwise-complete regression sample for one start year.

    ``rows`` indexes into the country order of the scores the sample was
    built for; ``y``, ``gdp`` and ``pop`` are already standardized.
    """

    start_year: int
    horizon: int
    countries: tuple[str, ...]
    rows: np.ndarray
    growth: np.ndarray
    y: np.ndarray
    gdp: np.ndarray
    pop: np.ndarray

    @property
    def n_obs(self) -> int:
        return len(self.rows)


def growth_sample(countries, panel: MacroPanel, start_year: int, horizon: int = 10) -> GrowthSample:
    """Countries with gdp_pc at both ends of the window and population at the start."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    rows, growth, lg, lp = [], [], [], []
    for i, country in enumerate(countries):
        g0 = panel.gdp_pc(country, start_year)
        g1 = panel.gdp_pc(country, start_year + horizon)
        pop = panel.population(country, start_year)
        if g0 is None or g1 is None or pop is None:
            continue
        rows.append(i)
        growth.append(compound_growth(g0, g1, horizon))
        lg.append(math.log(g0))
        lp.append(math.log(pop))
    n = len(rows)
    if n < MIN_SAMPLE:
        raise InsufficientSampleError(
            "growth regression %d->%d has %d complete countries, need %d"
            % (start_year, start_year + horizon, n, MIN_SAMPLE))
    growth = np.array(growth)
    y = zscore(growth)
    return GrowthSample(
        start_year=start_year,
        horizon=horizon,
        countries=tuple(countries[i] for i in rows),
        rows=np.array(rows, dtype=np.int64),
        growth=growth,
        y=growth if y is None else y,
        gdp=_standardize(np.array(lg), "log gdp per capita"),
        pop=_standardize(np.array(lp), "log population"),
    )


def _standardize(v: np.ndarray, name: str) -> np.ndarray:
    z = zscore(v)
    if z is None:
        raise RankDeficientError(-1, "%s (constant over the sample)" % name)
    return z


def _solow_only(sample: GrowthSample) -> RegressionResult:
    ones = np.ones(sample.n_obs)
    fit = ols(sample.y, np.column_stack([ones, sample.gdp, sample.pop]), names=("intercept", "gdp", "pop"))

    def widen(seq, v):
        return (seq[0], v, seq[1], seq[2])

    return RegressionResult(
        coefficients=widen(fit.coefficients, 0.0),
        standard_errors=widen(fit.standard_errors, 0.0),
        t_stats=widen(fit.t_stats, 0.0),
        p_values=widen(fit.p_values, 1.0),
        r_squared=fit.r_squared,
        n_obs=sample.n_obs,
        eci_degenerate=True,
    )


def fit_growth(sample: GrowthSample, k_c, degenerate: bool = False) -> RegressionResult:
    """Fit the growth model for one score vector aligned with the sample's source order."""
    eci = None if degenerate else zscore(np.asarray(k_c, dtype=np.float64)[sample.rows])
    if eci is None:
        # no ranking information on this sample: Solow baseline only
        return _solow_only(sample)
    ones = np.ones(sample.n_obs)
    return ols(sample.y, np.column_stack([ones, eci, sample.gdp, sample.pop]), names=COEF_NAMES)


def growth_regression(scores: ComplexityScores, panel: MacroPanel, start_year: int,
                      horizon: int = 10) -> RegressionResult:
    """Regress annualized growth over ``horizon`` years on standardized k_c and controls.

    Degenerate scores (or scores constant over the sample) are fitted without
    the complexity column; their eci coefficient is reported as 0 with p = 1.
    """
    sample = growth_sample(scores.countries, panel, start_year, horizon)
    return fit_growth(sample, scores.k_c, scores.degenerate)

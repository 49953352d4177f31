"""
Economic complexity variants.

The generalized reflection scheme

    K_c = (sum_p M_cp K_p^alpha)^gamma / D_c^epsilon
    K_p = (sum_c M_cp K_c^beta)^delta / U_p^theta

with each exponent in {-1, 0, 1} yields 729 score variants; index 729 is the
original Economic Complexity Index and 545 the fitness-complexity pattern.
Growth-regression sweeps over all variants live in :mod:`ecivariants.sweep`.
"""

from .econometrics import RegressionResult, growth_regression, ols, t_pvalue
from .matrix_builder import WeightMatrix, build_membership, prune
from .metric_engine import (
    FITNESS, N_VARIANTS, ORIGINAL_ECI, ComplexityScores, IterationOptions, VariantSpec, all_variants,
    index_to_spec, iterate_variant, iterate_variants, spec_to_index,
)
from .sweep import SweepReport, run_sweep, significance_counts, within_fraction
from .trade_data import (
    DataError, ExportMatrix, MacroPanel, MacroRecord, load_exports, load_exports_by_year, load_macro,
)

__all__ = [
    "ComplexityScores", "DataError", "ExportMatrix", "FITNESS", "IterationOptions", "MacroPanel",
    "MacroRecord", "N_VARIANTS", "ORIGINAL_ECI", "RegressionResult", "SweepReport", "VariantSpec",
    "WeightMatrix", "all_variants", "build_membership", "growth_regression", "index_to_spec",
    "iterate_variant", "iterate_variants", "load_exports", "load_exports_by_year", "load_macro", "ols",
    "prune", "run_sweep", "significance_counts", "spec_to_index", "t_pvalue", "within_fraction",
]

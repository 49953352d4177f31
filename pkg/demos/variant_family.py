"""
The 729 complexity variants on one synthetic year
=================================================

Builds a binary RCA matrix from synthetic exports, runs every variant of the
generalized reflection equations and looks at what comes out: how many
variants converge, which ones carry no ranking information, and how the
original ECI and fitness relate to the eigenvector formulation.
"""

import collections

import numpy as np

from ecivariants import synthetic
from ecivariants.matrix_builder import build_membership
from ecivariants.metric_engine import (
    FITNESS, ORIGINAL_ECI, eigen_eci_oracle, index_to_spec, is_connected, iterate_variants,
)

# 60 countries, 250 products, nested capability structure
x = synthetic.synthetic_exports(60, 250, years=(2000,), seed=1)[2000]
w = build_membership(x, "binary_rca")
print("M_cp: %d countries x %d products, %d ones, connected=%s" % (*w.shape, w.weights.nnz, is_connected(w)))
print("pruned: %d lines" % len(w.removed))

scores = iterate_variants(w)  # one batch, 729 columns
statuses = collections.Counter(s.status for s in scores)
print("status counts:", dict(sorted(statuses.items())))

# degenerate variants: alpha = 0 with gamma = epsilon makes K_c = 1 after one step
alpha0 = [s for s in scores if s.variant.alpha == 0 and s.variant.gamma == s.variant.epsilon]
print("alpha=0, gamma=epsilon: %d variants, all degenerate: %s" % (len(alpha0), all(s.degenerate for s in alpha0)))

eci, fit = scores[ORIGINAL_ECI - 1], scores[FITNESS - 1]
print("variant 729 %s: %s after %d iterations" % (eci.variant, eci.status, eci.iterations_used))
print("variant 545 %s: %s after %d iterations" % (fit.variant, fit.status, fit.iterations_used))

# the all-ones variant is the second eigenvector of D^-1 M U^-1 M^T
eig = eigen_eci_oracle(w)
print("max |k_c(729) - eigenvector| = %.2e" % np.abs(eci.k_c - eig).max())
print("corr(ECI, fitness) = %.3f" % np.corrcoef(eci.k_c, fit.k_c)[0, 1])

# how similar is the rest of the family to the original ECI?
r2 = np.array([np.corrcoef(s.k_c, eci.k_c)[0, 1] ** 2 for s in scores if not s.degenerate])
print("non-degenerate variants: %d, share with R^2 >= 0.5 vs ECI: %.2f" % (len(r2), np.mean(r2 >= 0.5)))

# reduced forms discussed alongside fitness
for v in (60, 222, 562, 724):
    s = scores[v - 1]
    print("  %3d %-18s %-14s corr with ECI %+.3f" % (v, index_to_spec(v), s.status,
                                                   np.corrcoef(s.k_c, eci.k_c)[0, 1] if not s.degenerate else 0))

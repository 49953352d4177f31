import numpy as np
import pytest

from ecivariants import synthetic
from ecivariants.matrix_builder import build_membership
from ecivariants.metric_engine import iterate_variant


def test_exports_deterministic_and_shaped():
    a = synthetic.synthetic_exports(20, 40, years=(2000, 2001), seed=3)
    b = synthetic.synthetic_exports(20, 40, years=(2001, 2000), seed=3)
    assert sorted(a) == [2000, 2001]
    assert all(a[y] == b[y] for y in a)
    assert a[2000].shape[0] == 20
    assert synthetic.synthetic_exports(20, 40, seed=4)[2000] != a[2000]


def test_exports_are_nested():
    # capability structure: the most diverse countries also hold rare products
    w = build_membership(synthetic.synthetic_exports(50, 200, seed=0)[2000])
    m = w.to_dense()
    d, u = m.sum(axis=1), m.sum(axis=0)
    avg_ubiquity = (m @ u) / d
    assert np.corrcoef(d, avg_ubiquity)[0, 1] < -0.3


def test_panel_independent_of_exports():
    ex = synthetic.synthetic_exports(80, 150, seed=6)[2000]
    k = iterate_variant(build_membership(ex), 729).k_c
    panel = synthetic.synthetic_panel(ex.countries, range(2000, 2011), seed=6)
    gdp = np.log([panel.gdp_pc(c, 2000) for c in ex.countries])
    assert abs(np.corrcoef(gdp, k)[0, 1]) < 0.3


def test_panel_covers_requested_years_only():
    panel = synthetic.synthetic_panel(["A", "B"], [1990, 1995, 2000], seed=1)
    assert panel.years == [1990, 1995, 2000]
    assert panel.gdp_pc("A", 1995) > 0


def test_planted_panel_overlap_rejected():
    ex = synthetic.synthetic_exports(10, 20, years=(2000,), seed=1)
    with pytest.raises(ValueError):
        synthetic.planted_panel(ex, [2000, 2010])


def test_null_baseline_basics():
    a = synthetic.null_baseline(50, n_countries=40, seed=2)
    b = synthetic.null_baseline(50, n_countries=40, seed=2)
    assert a == b
    assert 0 <= a.fraction <= 1 and a.trials == 50
    with pytest.raises(ValueError):
        synthetic.null_baseline(0)


def test_null_baseline_on_given_panel():
    cs = synthetic.country_codes(30)
    panel = synthetic.synthetic_panel(cs, range(2000, 2011), seed=8)
    r = synthetic.null_baseline(200, seed=1, panel=panel, start_year=2000)
    assert r.n_countries == 30
    assert r.fraction < 0.05
    with pytest.raises(ValueError):
        synthetic.null_baseline(3, panel=panel)

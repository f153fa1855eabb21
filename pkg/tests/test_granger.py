import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newsflow import granger
from newsflow.granger import DegenerateRegressionError, GrangerResult

import synth


# -- regressions ----------------------------------------------------------------

def test_ar1_coefficient():
    x = synth.ar1(np.random.default_rng(0), 5000, 0.8)
    fit = granger.fit_restricted(x, 1)
    assert 0.75 <= fit.a[0] <= 0.85
    assert fit.t_effective == 4999


def test_white_noise_ssr():
    rng = np.random.default_rng(1)
    m, n = 5, 5000
    x = rng.standard_normal(n)
    fit = granger.fit_restricted(x, m)
    # OLS coefficient standard error is about 1/sqrt(T)
    assert np.all(np.abs(fit.a) < 3 / math.sqrt(n) * 1.5)
    expected = n - m
    assert abs(fit.ssr - expected) < 3 * math.sqrt(2 * expected)
    assert abs(fit.residual_mean) < 1e-10


def test_intercept_only_fit_is_variance_identity():
    x = np.random.default_rng(2).standard_normal(100) + 3
    fit = granger.fit_restricted(x, 0)
    assert fit.a.size == 0
    assert math.isclose(fit.ssr, float(((x - x.mean()) ** 2).sum()), rel_tol=1e-12)
    assert math.isclose(fit.intercept, x.mean(), rel_tol=1e-12)


def test_zero_regressor_is_degenerate():
    x = np.random.default_rng(3).standard_normal(500)
    with pytest.raises(DegenerateRegressionError):
        granger.fit_unrestricted(x, np.zeros(500), 2, 2)
    with pytest.raises(DegenerateRegressionError):
        granger.granger_test(x, np.zeros(500), 2)


def test_fit_errors():
    with pytest.raises(DegenerateRegressionError):
        granger.fit_restricted(np.arange(4.0), 3)
    with pytest.raises(ValueError):
        granger.fit_unrestricted(np.zeros(10), np.zeros(11), 1, 1)
    with pytest.raises(ValueError):
        granger.granger_test(np.zeros(10), np.zeros(10), 4)


def test_cross_coefficient():
    rng = np.random.default_rng(4)
    n = 5000
    y = rng.standard_normal(n)
    x = np.zeros(n)
    e = rng.standard_normal(n)
    for t in range(1, n):
        x[t] = 0.5 * x[t - 1] + 0.7 * y[t - 1] + e[t]
    fit = granger.fit_unrestricted(x, y, 1, 1)
    assert 0.6 <= fit.b[0] <= 0.8
    assert fit.t_effective == n - 1


def test_unrelated_regressor_barely_reduces_ssr():
    ratios = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(2000)
        y = rng.permutation(rng.standard_normal(2000))
        r = granger.fit_restricted(x, 3).ssr
        u = granger.fit_unrestricted(x, y, 3, 3).ssr
        ratios.append((r - u) / r)
    assert 0 <= np.mean(ratios) < 0.01


# -- lag selection ----------------------------------------------------------------

def test_single_candidate_lag():
    x, y = synth.directional_pair(0, 200)
    for c in granger.CRITERIA:
        assert granger.select_lag(x, y, c, max_lag=1) == 1


def test_select_lag_errors():
    x, y = synth.directional_pair(0, 200)
    with pytest.raises(ValueError):
        granger.select_lag(x, y, "BIC", max_lag=0)
    with pytest.raises(ValueError):
        granger.select_lag(x, y, "BIC", max_lag=50)
    with pytest.raises(ValueError):
        granger.select_lag(x, y, "FPE", max_lag=3)


@pytest.mark.slow
def test_bic_recovers_true_order():
    hits = sum(granger.select_lag(*synth.bivariate_ar(s, 5000), "BIC", 8) == 3 for s in range(50))
    assert hits >= 45


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(100, 600), st.integers(1, 12))
def test_criterion_ordering(seed, n, max_lag):
    rng = np.random.default_rng(seed)
    x, y = synth.bivariate_ar(seed, n, order=int(rng.integers(1, 5)))
    max_lag = min(max_lag, n // 4 - 1)
    lags = {c: granger.select_lag(x, y, c, max_lag) for c in granger.CRITERIA}
    assert lags["BIC"] <= lags["HQC"] <= lags["AIC"]


# -- Granger F test ---------------------------------------------------------------------

def test_null_rarely_significant():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        x, y = rng.standard_normal(5000), rng.standard_normal(5000)
        hits += granger.granger_test(x, y, 2).p_value > 1e-7
    assert hits >= 99


def test_direction_recovered():
    good = 0
    for seed in range(20):
        x, y = synth.directional_pair(seed)
        fwd = granger.granger_test(x, y, 1, effect="x", cause="y")
        rev = granger.granger_test(y, x, 1, effect="y", cause="x")
        good += fwd.p_value < 1e-7 and rev.p_value > 1e-3
    assert good >= 19


def test_circular_shift_destroys_significance():
    lag, ok = 3, 0
    for seed in range(20):
        x, y = synth.directional_pair(seed)
        ok += granger.granger_test(x, np.roll(y, 50), lag).p_value > 1e-3
    assert ok >= 18


def test_matches_statsmodels():
    st_tools = pytest.importorskip("statsmodels.tsa.stattools")
    x, y = synth.directional_pair(7, 600, coef=0.15)
    for lag in (1, 4, 9):
        ours = granger.granger_test(x, y, lag)
        ref = st_tools.grangercausalitytests(np.column_stack([x, y]), [lag])
        f, p, d2, d1 = ref[lag][0]["ssr_ftest"]
        assert (ours.df_num, ours.df_den) == (d1, d2)
        assert math.isclose(ours.f_stat, f, rel_tol=1e-9)
        assert math.isclose(ours.p_value, p, rel_tol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(40, 400), st.integers(1, 6), st.floats(0, 1))
def test_ssr_monotone_and_f_nonnegative(seed, n, lag, coef):
    x, y = synth.directional_pair(seed, n, coef)
    r = granger.granger_test(x, y, lag)
    assert r.ssr_unrestricted <= r.ssr_restricted * (1 + 1e-8)
    assert r.f_stat >= 0
    assert 0 < r.p_value <= 1 or (r.p_value == 0 and r.f_stat > 100)
    assert r.df_den == n - lag - 2 * lag - 1


# -- F distribution tail -------------------------------------------------------------------

@pytest.mark.parametrize("f,d1,d2", [
    (0.5, 1, 10), (2.0, 3, 200), (10.0, 37, 1200), (35.0, 37, 3000), (80.0, 22, 3400),
    (200.0, 48, 2700), (1.0, 1, 1), (3.0, 5, 5),
])
def test_f_tail_against_mpmath(f, d1, d2):
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 50
    x = mpmath.mpf(d2) / (d2 + d1 * mpmath.mpf(f))
    ref = mpmath.betainc(mpmath.mpf(d2) / 2, mpmath.mpf(d1) / 2, 0, x, regularized=True)
    ours = granger.f_sf(f, d1, d2)
    assert abs(ours - float(ref)) <= 1e-10 * float(ref)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 50), st.integers(1, 60), st.integers(5, 5000))
def test_f_tail_against_scipy(f, d1, d2):
    stats = pytest.importorskip("scipy.stats")
    ref = stats.f.sf(f, d1, d2)
    if ref > 1e-280:
        assert abs(granger.f_sf(f, d1, d2) - ref) <= 1e-10 * ref + 1e-300


def test_f_tail_edges():
    assert granger.f_sf(0.0, 3, 10) == 1.0
    assert granger.f_sf(-1.0, 3, 10) == 1.0


# -- causality graph ----------------------------------------------------------------------

def _res(cause, effect, p):
    return GrangerResult(cause, effect, 37, 1.0, p, 1.0, 1.0, 37, 100)


def test_causality_strength():
    g = granger.causality_graph([_res("a", "b", 1e-9)], 1e-7)
    (cause, effect, s, p), = g.edges
    assert (cause, effect) == ("a", "b") and math.isclose(s, 2.0, rel_tol=1e-12)


def test_threshold_is_strict():
    assert granger.causality_graph([_res("a", "b", 1e-7)], 1e-7).edges == []


def test_causality_graph_validation():
    with pytest.raises(ValueError):
        granger.causality_graph([], 0)
    with pytest.raises(ValueError):
        granger.causality_graph([], 1.0)


@given(st.lists(st.floats(1e-300, 1), max_size=20), st.floats(1e-12, 0.5))
def test_edges_iff_below_threshold(ps, p0):
    g = granger.causality_graph([_res(str(k), "x", p) for k, p in enumerate(ps)], p0)
    assert len(g.edges) == sum(p < p0 for p in ps)
    assert all(s > 0 for _, _, s, _ in g.edges)


def test_exports(tmp_path):
    results = [_res("fake", "pro_trump", 7.41e-9), _res("pro_trump", "fake", 8.61e-36)]
    granger.write_results(results, tmp_path / "g.csv")
    lines = (tmp_path / "g.csv").read_text().splitlines()
    assert lines[0] == "cause,effect,lag,F,p_value" and len(lines) == 3
    granger.write_causality_dot(granger.causality_graph(results), tmp_path / "g.dot")
    dot = (tmp_path / "g.dot").read_text()
    assert '"fake" -> "pro_trump"' in dot and '"pro_trump" -> "fake"' in dot
    assert "penwidth=" in dot

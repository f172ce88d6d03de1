import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skflt import innovations as inn
from skflt import moving_average as ma
from skflt import tail_model as tm
from skflt.tail_model import TailParams

SYM1 = TailParams(1.0, 0.5)


def window_of(values, n, h):
    return inn.InnovationWindow(np.asarray(values, dtype=float), n, h)


def random_window(n, h, seed, tail=SYM1):
    return inn.generate(inn.InnovationModel(inn.IID, tail), n, h, seed)


# --- weight laws and models ------------------------------------------------


def test_weight_law_moments():
    assert ma.WeightLaw.constant(2.0).abs_moment(0.5) == pytest.approx(math.sqrt(2.0))
    assert ma.WeightLaw.uniform(0.0, 1.0).abs_moment(0.5) == pytest.approx(2.0 / 3.0)
    assert ma.WeightLaw.exponential(2.0).abs_moment(1.0) == pytest.approx(0.5)
    assert math.isinf(ma.WeightLaw.pareto(1.5).abs_moment(2.0))
    assert ma.WeightLaw.pareto(3.0, 2.0).mean == pytest.approx(3.0)


def test_weight_law_sample_moments():
    rng = np.random.default_rng(0)
    for law in (ma.WeightLaw.uniform(0.5, 2.0), ma.WeightLaw.exponential(3.0), ma.WeightLaw.pareto(4.0)):
        x = law.sample(rng, 200_000)
        assert abs(x.mean() - law.mean) <= 4 * x.std() / math.sqrt(x.size)
        assert law.nonnegative and law.single_signed


def test_hypothesis_checks():
    det = ma.Deterministic((1.0, 0.5, 0.25), delta=0.5)
    det.check_hypotheses(0.7)
    with pytest.raises(ValueError, match="delta < alpha"):
        ma.Deterministic((1.0,), delta=0.7).check_hypotheses(0.7)
    geo = ma.GeometricRandom(0.5, ma.WeightLaw.constant(1.0), delta=0.5)
    with pytest.raises(ValueError, match="gamma"):
        geo.check_hypotheses(0.7)
    ma.GeometricRandom(0.5, ma.WeightLaw.constant(1.0), delta=0.5, gamma=0.8).check_hypotheses(0.7)
    with pytest.raises(ValueError, match="r_order"):
        geo.check_hypotheses(1.5)
    heavy = ma.GeometricRandom(0.5, ma.WeightLaw.pareto(1.5), delta=0.5, r_order=2.0)
    with pytest.raises(ValueError, match="diverges"):
        heavy.check_hypotheses(1.5)
    ma.GeometricRandom(0.5, ma.WeightLaw.pareto(1.5), delta=0.5, r_order=1.2).check_hypotheses(1.5)


def test_moment_condition_checked_at_construction():
    with pytest.raises(ValueError, match="diverges"):
        ma.GeometricRandom(0.5, ma.WeightLaw.pareto(0.3), delta=0.5)
    with pytest.raises(ValueError):
        ma.Deterministic((1.0, -2.0, 3.0))
    with pytest.raises(ValueError):
        ma.GeometricRandom(1.0, ma.WeightLaw.constant(1.0))


def test_geometric_moment_sum_closed_form():
    geo = ma.GeometricRandom(0.5, ma.WeightLaw.uniform(0.0, 1.0), delta=0.5)
    expected = (2.0 / 3.0) / (1.0 - 0.5**0.5)
    assert geo.moment_sum(0.5) == pytest.approx(expected, rel=1e-12)


# --- coefficient sampling --------------------------------------------------


def test_sample_coefficients_examples():
    det = ma.Deterministic((1.0, 0.5, 0.25))
    for seed in (0, 1, 99):
        np.testing.assert_array_equal(ma.sample_coefficients(det, 3, seed), [1.0, 0.5, 0.25])
    geo = ma.GeometricRandom(0.5, ma.WeightLaw.constant(1.0))
    np.testing.assert_allclose(ma.sample_coefficients(geo, 5, 3), [1, 0.5, 0.25, 0.125, 0.0625])
    sp = ma.ScaledPattern((1.0, 1.0), ma.WeightLaw.uniform(0.0, 1.0))
    c = ma.sample_coefficients(sp, 2, 4)
    assert c[0] == c[1] and 0.0 < c[0] < 1.0


def test_sample_coefficients_deterministic_in_seed_and_padded():
    geo = ma.GeometricRandom(0.7, ma.WeightLaw.exponential(1.0))
    a = ma.sample_coefficients(geo, 30, 5)
    assert a.tobytes() == ma.sample_coefficients(geo, 30, 5).tobytes()
    np.testing.assert_array_equal(ma.sample_coefficients(ma.Deterministic((1.0, 2.0)), 4, 0), [1, 2, 0, 0])
    with pytest.raises(ValueError):
        ma.sample_coefficients(geo, 0, 0)


def test_sample_total_laws():
    rng = np.random.default_rng(6)
    assert np.all(ma.sample_total(ma.Deterministic((1.0, 0.5, 0.25)), 5, rng) == 1.75)
    assert np.all(ma.sample_total(ma.GeometricRandom(0.5, ma.WeightLaw.constant(1.0)), 5, rng) == 2.0)
    sp = ma.ScaledPattern((1.0, 1.0), ma.WeightLaw.uniform(0.0, 1.0))
    c = ma.sample_total(sp, 100_000, rng)
    assert abs(c.mean() - 1.0) < 0.01 and c.min() >= 0 and c.max() <= 2.0
    geo = ma.GeometricRandom(0.5, ma.WeightLaw.uniform(0.0, 1.0))
    c = ma.sample_total(geo, 100_000, rng)
    assert abs(c.mean() - 1.0) <= 4 * c.std() / math.sqrt(c.size)


# --- sandwich --------------------------------------------------------------


def test_sandwich_examples():
    assert ma.validate_sandwich([1, 0.5, 0.25])
    assert not ma.validate_sandwich([1, -2, 3])
    assert ma.validate_sandwich([0, 0])
    assert ma.validate_sandwich([-1, -2])
    with pytest.raises(ValueError):
        ma.validate_sandwich([])


@pytest.mark.parametrize("model", [
    ma.Deterministic((1.0, 0.5, 0.25)),
    ma.ScaledPattern((1.0, 0.0, 2.0), ma.WeightLaw.uniform(0.0, 1.0)),
    ma.GeometricRandom(0.5, ma.WeightLaw.exponential(1.0)),
    ma.GeometricRandom(0.9, ma.WeightLaw.pareto(3.0)),
])
def test_sandwich_preserved_by_sampling_and_tail_attachment(model):
    for seed in range(20):
        c = ma.sample_coefficients(model, 40, seed)
        assert ma.validate_sandwich(c)
        for q in (1, 3, 10):
            head = list(c[:q]) + [ma.tail_sum(model, c, q)]
            assert ma.validate_sandwich(head)


# --- tail sums -------------------------------------------------------------


def test_tail_sum_examples():
    geo = ma.GeometricRandom(0.5, ma.WeightLaw.constant(1.0))
    c = ma.sample_coefficients(geo, 60, 0)
    assert ma.tail_sum(geo, c, 2) == pytest.approx(0.5, rel=1e-14)
    assert ma.tail_sum(geo, c[:3], 2) == pytest.approx(0.5, rel=1e-14)
    det = ma.Deterministic((1.0, 2.0, 3.0))
    assert ma.tail_sum(det, [1, 2, 3], 1) == 5.0
    assert ma.tail_sum(det, [1, 2, 3], 7) == 0.0
    with pytest.raises(ValueError):
        ma.tail_sum(det, [1, 2, 3], -1)


@given(st.lists(st.floats(0, 10), min_size=1, max_size=20))
def test_tail_sum_telescopes(c):
    det = ma.Deterministic(tuple(c) if sum(c) > 0 else (0.0,))
    c = list(det.coefficients)
    assert ma.tail_sum(det, c, 0) - (ma.tail_sum(det, c, 1) + c[0]) == pytest.approx(0.0, abs=1e-12 * (1 + sum(c)))


# --- filters ---------------------------------------------------------------


def test_finite_ma_examples():
    w = random_window(8, 2, 1)
    np.testing.assert_array_equal(ma.build_finite_ma([1.0], w), w.observed)
    np.testing.assert_array_equal(ma.build_finite_ma([0.0, 1.0], w), w.z(np.arange(0, 8)))
    ones = window_of(np.ones(9), 8, 1)
    np.testing.assert_array_equal(ma.build_finite_ma([1.0, 1.0], ones), np.full(8, 2.0))
    with pytest.raises(ValueError, match="prehistory"):
        ma.build_finite_ma([1.0, 1.0, 1.0, 1.0], w)


def test_finite_ma_matches_definition():
    c = np.array([0.3, 1.0, 0.2, 0.7])
    w = random_window(30, 5, 2)
    X = ma.build_finite_ma(c, w)
    direct = [sum(c[i] * w.z(t - i) for i in range(4)) for t in range(1, 31)]
    np.testing.assert_allclose(X, direct, rtol=1e-13)


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.lists(st.floats(-5, 5), min_size=3, max_size=3),
       st.floats(-3, 3), st.floats(-3, 3))
def test_filter_linearity(c1, c2, a, b):
    w = random_window(20, 2, 3)
    lhs = ma.build_finite_ma(a * np.array(c1) + b * np.array(c2), w)
    rhs = a * ma.build_finite_ma(c1, w) + b * ma.build_finite_ma(c2, w)
    scale = 1 + np.abs(w.values).max() * 30 * (abs(a) + abs(b)) * 5
    np.testing.assert_allclose(lhs, rhs, atol=1e-13 * scale)


def test_truncated_ma_examples():
    geo = ma.GeometricRandom(0.5, ma.WeightLaw.constant(1.0))
    c = ma.sample_coefficients(geo, 60, 0)
    w = random_window(40, 60, 4)
    X1 = ma.build_truncated_ma(geo, c, 1, w)
    np.testing.assert_allclose(X1, w.observed + w.z(np.arange(0, 40)), rtol=1e-12)
    zero = ma.Deterministic((0.0, 0.0, 0.0))
    assert np.all(ma.build_truncated_ma(zero, [0.0, 0.0, 0.0], 2, w) == 0.0)
    with pytest.raises(ValueError):
        ma.build_truncated_ma(geo, c, 0, w)
    with pytest.raises(ValueError, match="prehistory"):
        ma.build_truncated_ma(geo, c, 61, w)


def test_truncated_ma_converges_to_long_filter():
    geo = ma.GeometricRandom(0.5, ma.WeightLaw.uniform(0.0, 1.0))
    L = 60
    c = ma.sample_coefficients(geo, L + 1, 5)
    w = random_window(100, L, 6)
    X = ma.build_finite_ma(c, w)
    for q in (10, 20, 40):
        Xq = ma.build_truncated_ma(geo, c, q, w)
        bound = ma.tail_sum(geo, c, q) * np.abs(w.values).max() * 2
        assert np.max(np.abs(Xq - X)) <= bound + 1e-12


# --- partial sums ----------------------------------------------------------


def test_partial_sum_examples():
    p = ma.partial_sum_path(np.zeros(5), 2.0, 5)
    assert p(np.linspace(0, 1, 11)).tolist() == [0.0] * 11
    n, a = 10, 3.0
    X = np.zeros(n)
    X[0] = a
    p = ma.partial_sum_path(X, a, n)
    assert p(0.0) == 0.0 and p(0.1) == 1.0 and p.left_limit(0.1) == 0.0
    p = ma.partial_sum_path(np.ones(4), 2.0, 4)
    np.testing.assert_array_equal(p(np.array([0.25, 0.5, 0.75, 1.0])), [0.5, 1.0, 1.5, 2.0])
    with pytest.raises(ValueError):
        ma.partial_sum_path(np.ones(4), 0.0, 4)
    with pytest.raises(ValueError):
        ma.partial_sum_path(np.ones(3), 1.0, 4)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50), st.floats(0.1, 100))
def test_partial_sum_at_one(X, a):
    p = ma.partial_sum_path(X, a, len(X))
    assert p(1.0) == np.cumsum(np.asarray(X, dtype=float))[-1] / a


# --- block identity --------------------------------------------------------


def test_block_identity_case_ii_example():
    c = np.array([0.8, 0.3])
    w = random_window(20, 1, 7)
    a_n = 20.0
    k = 5
    d = ma.lemma_decomposition(c, w, 20, k, a_n, "ii")
    assert d.H == pytest.approx(c[1] * w.z(k) / a_n, rel=1e-14)
    assert d.G == pytest.approx(c[1] * w.z(0) / a_n, rel=1e-14)
    assert abs(d.lhs - (d.H - d.G)) <= 1e-12


def test_block_identity_zero_coefficients():
    w = random_window(20, 3, 8)
    for case, k in (("i", 2), ("ii", 5), ("iii", 5)):
        d = ma.lemma_decomposition(np.zeros(4), w, 20, k, 3.0, case)
        assert d.lhs == d.H == d.G == d.T == 0.0


def _lhs_by_definition(c, w, n, k, a_n, upto):
    q = len(c) - 1
    X = [sum(c[i] * w.z(t - i) for i in range(q + 1)) for t in range(1, upto + 1)]
    return (sum(c) * sum(w.z(i) for i in range(1, k + 1)) - sum(X)) / a_n


def _case_i_by_definition(c, w, k, a_n):
    # three sums written out term by term from the index ranges
    q = len(c) - 1
    H = sum(w.z(k - u) * sum(c[s] for s in range(u + 1, q + 1)) for u in range(0, k))
    G = sum(w.z(-u) * sum(c[s] for s in range(u + 1, q + 1)) for u in range(q - k, q))
    T = sum(w.z(-u) * sum(c[s] for s in range(u + 1, u + k + 1)) for u in range(0, q - k))
    return H / a_n, G / a_n, T / a_n


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 10), st.integers(0, 10**6), st.data())
def test_block_identity_case_i_against_definitions(q, seed, data):
    k = data.draw(st.integers(1, q - 1))
    n = data.draw(st.integers(max(k, 1), 40))
    rng = np.random.default_rng(seed)
    c = rng.random(q + 1)
    w = random_window(n, q, seed, TailParams(0.8, 0.7))
    d = ma.lemma_decomposition(c, w, n, k, 7.0, "i")
    H, G, T = _case_i_by_definition(c, w, k, 7.0)
    assert d.lhs == pytest.approx(_lhs_by_definition(c, w, n, k, 7.0, k), rel=1e-10, abs=1e-12)
    assert (d.H, d.G, d.T) == pytest.approx((H, G, T), rel=1e-10, abs=1e-12)
    assert d.relative_error <= 1e-9


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10), st.integers(0, 10**6), st.data())
def test_block_identity_cases_ii_iii(q, seed, data):
    n = data.draw(st.integers(max(2 * q, 1), 60))
    rng = np.random.default_rng(seed)
    c = rng.random(q + 1)
    w = random_window(n, q, seed, TailParams(1.5, 0.4))
    k2 = data.draw(st.integers(max(q, 1), n))
    d2 = ma.lemma_decomposition(c, w, n, k2, 5.0, "ii")
    assert d2.lhs == pytest.approx(_lhs_by_definition(c, w, n, k2, 5.0, k2), rel=1e-10, abs=1e-12)
    assert d2.relative_error <= 1e-9
    k3 = data.draw(st.integers(max(q, 1), n - q))
    d3 = ma.lemma_decomposition(c, w, n, k3, 5.0, "iii")
    assert d3.lhs == pytest.approx(_lhs_by_definition(c, w, n, k3, 5.0, k3 + q), rel=1e-10, abs=1e-12)
    assert d3.relative_error <= 1e-9


def test_block_identity_errors_name_the_case():
    w = random_window(10, 3, 9)
    c = np.ones(4)
    with pytest.raises(ValueError, match=r"case \(i\)"):
        ma.lemma_decomposition(c, w, 10, 5, 1.0, "i")
    with pytest.raises(ValueError, match=r"case \(ii\)"):
        ma.lemma_decomposition(c, w, 10, 2, 1.0, "ii")
    with pytest.raises(ValueError, match=r"case \(iii\)"):
        ma.lemma_decomposition(c, w, 10, 8, 1.0, "iii")
    with pytest.raises(ValueError, match="k must"):
        ma.lemma_decomposition(c, w, 10, 0, 1.0)
    with pytest.raises(ValueError, match="prehistory"):
        ma.lemma_decomposition(np.ones(5), w, 10, 5, 1.0)


def test_block_identity_default_case():
    w = random_window(30, 4, 10)
    assert ma.lemma_decomposition(np.ones(5), w, 30, 2, 1.0).case == "i"
    assert ma.lemma_decomposition(np.ones(5), w, 30, 6, 1.0).case == "ii"

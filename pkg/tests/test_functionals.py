import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gradflow.functionals import (INF, AbsNorm, CallableFunctional, FunctionalSum, HarmonicPotential, NegSqrt,
                                  Quadratic, QuantileEntropy, QuantilePotential, duality_slope_check,
                                  fokker_planck_energy, global_slope, mccann_check, metric_slope,
                                  moreau_yosida_value)
from gradflow.geometry import lambda_convexity_check
from gradflow.spaces import EuclideanSpace, QuantileSpace, gaussian_quantile

E1 = EuclideanSpace(1)
E2 = EuclideanSpace(2)


def test_values_and_domain():
    assert Quadratic(1.0).value([2.0]) == 2.0
    assert NegSqrt().value([-1.0]) == INF
    assert NegSqrt().value([0.25]) == -0.5
    assert AbsNorm(2.0).value([-1.5, 0.5]) == 4.0


def test_quadratic_rejects_nonsymmetric_or_indefinite():
    with pytest.raises(ValueError):
        Quadratic([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        Quadratic([[1.0, 0.0], [0.0, -1.0]])


def test_entropy_gaussian(frozen):
    M = 256
    val = QuantileEntropy().value(gaussian_quantile(0, 1, M))
    assert val == pytest.approx(frozen["entropy_gaussian_M256"], abs=1e-10)
    # the forward-increment discretization drops the tail cells: the
    # M = 256 value sits about 0.023 above the continuum entropy
    assert abs(val - frozen["entropy_gaussian_continuum"]) <= 0.025


def test_entropy_converges_with_grid(frozen):
    errs = [abs(QuantileEntropy().value(gaussian_quantile(0, 1, M)) - frozen["entropy_gaussian_continuum"])
            for M in (256, 512, 1024, 2048)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 5e-3
    val = QuantileEntropy().value(gaussian_quantile(0, 1, 2048))
    assert val == pytest.approx(frozen["entropy_gaussian_M2048"], abs=1e-10)


def test_entropy_infinite_off_strict_monotone():
    assert QuantileEntropy().value(np.array([0.0, 1.0, 1.0, 2.0])) == INF


def test_moreau_yosida_closed_forms(frozen):
    assert moreau_yosida_value(Quadratic(1.0), E1, 1.0, [1.0]) == pytest.approx(
        frozen["moreau_yosida_quadratic_tau1_x1"], abs=1e-14)
    assert moreau_yosida_value(AbsNorm(1.0), E1, 0.5, [1.0]) == pytest.approx(
        frozen["moreau_yosida_abs_tau0.5_x1"], abs=1e-14)


@pytest.mark.parametrize("tau", [0.1, 0.5, 1.0, 2.0])
def test_moreau_yosida_quadratic_formula(tau):
    assert moreau_yosida_value(Quadratic(1.0), E1, tau, [1.0]) == pytest.approx(0.5 / (1 + tau), rel=1e-13)


@pytest.mark.parametrize("f, x, expected", [
    (Quadratic(1.0), [2.0], 2.0),
    (AbsNorm(1.0), [0.0], 0.0),
    (NegSqrt(), [0.25], 1.0),
    (NegSqrt(), [0.0], INF),
])
def test_metric_slope_closed_forms(f, x, expected):
    assert metric_slope(f, E1, x) == pytest.approx(expected)


@pytest.mark.parametrize("f, x", [(Quadratic(1.0), [2.0]), (AbsNorm(1.0), [0.7]), (NegSqrt(), [0.25])])
def test_metric_slope_difference_quotients_agree_with_formula(f, x):
    numeric = metric_slope(f, E1, x, use_analytic=False)
    assert numeric == pytest.approx(metric_slope(f, E1, x), rel=2e-2)
    assert numeric <= metric_slope(f, E1, x) + 1e-12


def test_global_slope_examples():
    grid = np.linspace(-10, 10, 4001)
    assert global_slope(Quadratic(1.0), E1, 1.0, [2.0], grid) == pytest.approx(2.0, abs=1e-3)
    assert global_slope(AbsNorm(1.0), E1, 0.0, [1.0], grid) == pytest.approx(1.0, abs=1e-3)
    assert global_slope(NegSqrt(), E1, 0.0, [-1.0], grid) == INF


def test_mccann_examples():
    s = np.linspace(-3, 3, 121)
    assert mccann_check(lambda r: r * math.log(r), s)
    assert mccann_check(lambda r: r * r, s)
    assert not mccann_check(lambda r: -r * r, s)


@pytest.mark.parametrize("x", [1.0, -0.5, 3.0])
def test_duality_quadratic_equality(x):
    taus = [1e-3, 1e-2, 0.1, 0.5, 1.0, 4.0]
    f = Quadratic(1.0)
    for tau in taus:
        lhs = (1 + tau) * (f.value([x]) - moreau_yosida_value(f, E1, tau, [x])) / tau
        assert lhs == pytest.approx(0.5 * x * x, rel=1e-12)
    assert duality_slope_check(f, E1, [x], taus, lam=1.0, tol=1e-10).passed


def test_duality_abs_limit():
    f = AbsNorm(1.0)
    for tau in (0.5, 0.1, 1e-3):
        assert (1.0 - moreau_yosida_value(f, E1, tau, [1.0])) / tau == pytest.approx(0.5, rel=1e-12)
    assert duality_slope_check(f, E1, [1.0], [1e-3, 0.1, 0.5], lam=0.0).passed


def test_function_sum_requires_matching_layout():
    with pytest.raises(ValueError):
        FunctionalSum(Quadratic(1.0), QuantileEntropy())


def test_fokker_planck_convexity_modulus():
    assert fokker_planck_energy(2.0).lambda_hint == 2.0
    assert HarmonicPotential(2.0).convexity == 2.0


def test_callable_functional_defaults():
    f = CallableFunctional(lambda x: float(np.sum(x ** 4)))
    assert f.value(np.array([2.0])) == 16.0
    assert not f.convex


# coordinates are either zero or away from the kinks of the l1 norm
points = arrays(float, 2, elements=st.floats(-5, 5)).map(lambda x: np.where(np.abs(x) < 1e-3, 0.0, x))
CATALOG = [(Quadratic([[2.0, 0.5], [0.5, 1.0]], [1.0, -1.0]), E2), (AbsNorm(1.5), E2)]


@given(points, st.sampled_from(range(len(CATALOG))), st.integers(0, 2 ** 31))
def test_probe_global_slope_never_exceeds_metric_slope(x, k, seed):
    # for lambda at most the convexity modulus both slopes coincide, so a
    # probed global slope is a certified lower bound of the metric slope
    f, space = CATALOG[k]
    probes = x + np.random.default_rng(seed).standard_normal((64, 2)) * np.array([[0.1], [1.0], [10.0], [1e-3]]
                                                                                  ).repeat(16, axis=0)
    assert global_slope(f, space, f.lambda_hint, x, probes) <= metric_slope(f, space, x) + 1e-9


@given(points, st.sampled_from(range(len(CATALOG))))
def test_metric_slope_below_global_slope_on_descent_probes(x, k):
    f, space = CATALOG[k]
    s = metric_slope(f, space, x)
    g = f.partial(x)
    if np.linalg.norm(g) == 0:
        return
    r = 1e-7
    probe = x - r * g / np.linalg.norm(g)
    lam = f.lambda_hint
    assert s <= global_slope(f, space, lam, x, probe[None, :]) + 1e-5 * (1 + s)


@given(points, st.lists(st.floats(1e-3, 5.0), min_size=2, max_size=6, unique=True))
def test_moreau_yosida_nonincreasing_in_tau(x, taus):
    f = Quadratic([[2.0, 0.5], [0.5, 1.0]], [1.0, -1.0])
    vals = [moreau_yosida_value(f, E2, t, x) for t in sorted(taus)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[0] <= f.value(x) + 1e-12


@given(points)
def test_quadratic_slope_is_gradient_norm(x):
    A = np.array([[2.0, 0.5], [0.5, 1.0]])
    b = np.array([1.0, -1.0])
    assert metric_slope(Quadratic(A, b), E2, x) == pytest.approx(np.linalg.norm(A @ x - b), rel=1e-14, abs=1e-14)


@given(st.floats(-2, 2), st.floats(0.2, 3.0), st.floats(-2, 2), st.floats(0.2, 3.0))
def test_entropy_convex_along_quantile_geodesics(m0, v0, m1, v1):
    Q = QuantileSpace(64)
    q0, q1 = gaussian_quantile(m0, v0, 64), gaussian_quantile(m1, v1, 64)
    rep = lambda_convexity_check(QuantileEntropy(), Q, q0, q1, np.linspace(0.05, 0.95, 19), 0.0)
    assert rep.max_residual >= -math.inf and np.all(rep.residuals <= 1e-10)


@given(st.integers(0, 2 ** 31))
def test_entropy_convex_between_random_monotone_vectors(seed):
    rng = np.random.default_rng(seed)
    Q = QuantileSpace(32)
    q0 = np.cumsum(rng.uniform(0.01, 1.0, 32))
    q1 = np.cumsum(rng.uniform(0.01, 1.0, 32))
    assert lambda_convexity_check(QuantileEntropy(), Q, q0, q1, np.linspace(0.1, 0.9, 9), 0.0).passed


@given(st.integers(0, 2 ** 31))
def test_potential_partial_matches_finite_difference(seed):
    rng = np.random.default_rng(seed)
    q = np.sort(rng.standard_normal(16))
    f = QuantilePotential(HarmonicPotential(1.5, 0.3))
    g = f.partial(q)
    h = 1e-6
    for j in (0, 7, 15):
        e = np.zeros(16)
        e[j] = h
        assert g[j] == pytest.approx((f.value(q + e) - f.value(q - e)) / (2 * h), rel=1e-5, abs=1e-9)


@given(st.integers(0, 2 ** 31))
def test_entropy_partial_matches_finite_difference(seed):
    rng = np.random.default_rng(seed)
    q = np.cumsum(rng.uniform(0.1, 1.0, 16))
    f = QuantileEntropy()
    g = f.partial(q)
    h = 1e-7
    for j in (0, 5, 15):
        e = np.zeros(16)
        e[j] = h
        assert g[j] == pytest.approx((f.value(q + e) - f.value(q - e)) / (2 * h), rel=1e-4, abs=1e-8)

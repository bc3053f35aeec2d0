import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gradflow.core import (PIECEWISE_CONSTANT, AuditReport, AuditSuite, Trajectory, ceil_index, curve_length,
                           exp_primitive, gauss_legendre, metric_derivative, pairs)
from gradflow.spaces import EuclideanSpace

E1 = EuclideanSpace(1)
E2 = EuclideanSpace(2)


@pytest.mark.parametrize("lam, t, key", [(1.0, 1.0, "exp_primitive_1_1"), (-2.0, 1.0, "exp_primitive_-2_1")])
def test_exp_primitive_closed_forms(lam, t, key, frozen):
    assert exp_primitive(lam, t) == pytest.approx(frozen[key], rel=1e-14)


def test_exp_primitive_zero_rate_is_identity():
    assert exp_primitive(0.0, 2.0) == 2.0


@pytest.mark.parametrize("lam", [1e-12, -1e-12, 1e-9])
def test_exp_primitive_series_branch_continuous(lam):
    assert exp_primitive(lam, 1.0) == pytest.approx(1.0 + lam / 2, rel=1e-15)


@given(st.floats(-5, 5), st.floats(0, 3), st.floats(1e-3, 1))
def test_exp_primitive_increasing_and_ordered(lam, t, h):
    assert exp_primitive(lam, t + h) > exp_primitive(lam, t)
    e = exp_primitive(lam, t)
    if lam > 0:
        assert e >= t
    elif lam < 0:
        assert e <= t


def test_metric_derivative_constant_is_zero():
    tr = Trajectory(np.linspace(0, 1, 5), np.ones((5, 1)), E1)
    assert metric_derivative(tr, 2) == 0.0


def test_metric_derivative_straight_line():
    t = np.linspace(0, 1, 11)
    tr = Trajectory(t, np.stack([2 * t, 0 * t], axis=1), E2)
    assert metric_derivative(tr, 5) == pytest.approx(2.0, rel=1e-12)


def test_metric_derivative_exponential(frozen):
    h = 1e-3
    t = np.arange(0, 1002) * h
    tr = Trajectory(t, np.exp(-t)[:, None], E1)
    val = metric_derivative(tr, 1000)
    assert val == pytest.approx(frozen["metric_derivative_exp_t1_h1e-3"], abs=1e-12)
    assert abs(val - 0.367879) <= 1e-6


def test_metric_derivative_rejects_scheme_output():
    tr = Trajectory([0, 1], [[0.0], [1.0]], E1, PIECEWISE_CONSTANT)
    with pytest.raises(ValueError):
        metric_derivative(tr, 0)


def test_curve_length_segment_and_constant():
    s = np.linspace(0, 1, 11)
    tr = Trajectory(s, np.stack([3 * s, 4 * s], axis=1), E2)
    assert curve_length(tr) == pytest.approx(5.0, rel=1e-14)
    assert curve_length(Trajectory(s, np.zeros((11, 2)), E2)) == 0.0


def test_curve_length_semicircle(frozen):
    a = np.linspace(0, math.pi, 1001)
    tr = Trajectory(a, np.stack([np.cos(a), np.sin(a)], axis=1), E2)
    L = curve_length(tr)
    assert L == pytest.approx(frozen["semicircle_length_1001"], rel=1e-12)
    assert abs(L - math.pi) <= 1e-4


@given(st.integers(2, 40))
def test_curve_length_never_decreases_under_refinement(n):
    def sample(k):
        a = np.linspace(0, 2.0, k)
        return Trajectory(a, np.stack([np.cos(a), np.sin(3 * a)], axis=1), E2)

    coarse, fine = curve_length(sample(n)), curve_length(sample(2 * n - 1))
    assert fine >= coarse - 1e-12


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=2), st.lists(st.floats(-10, 10), min_size=2, max_size=2),
       st.integers(3, 30))
def test_metric_derivative_constant_speed_geodesic(x0, x1, n):
    x0, x1 = np.array(x0), np.array(x1)
    t = np.linspace(0, 1, n)
    tr = Trajectory(t, x0 + t[:, None] * (x1 - x0), E2)
    d = E2.dist(x0, x1)
    for i in range(1, n - 1):
        assert metric_derivative(tr, i) == pytest.approx(d, rel=1e-9, abs=1e-9)


def test_trajectory_validates_times():
    with pytest.raises(ValueError):
        Trajectory([0, 1, 1], np.zeros((3, 1)), E1)


def test_reversed_time_reverses_points():
    tr = Trajectory([0, 0.5, 1], [[0.0], [1.0], [3.0]], E1)
    rv = tr.reversed_time()
    assert np.array_equal(rv.points[:, 0], [3.0, 1.0, 0.0])
    assert np.array_equal(rv.times, tr.times)


def test_audit_report_pass_fail_and_text():
    rep = AuditReport("demo", 1e-9)
    rep.add(1.0, 2.0, k=0)
    assert rep.passed and rep.max_residual == -1.0
    rep.add(3.0, 2.0, k=1)
    assert not rep.passed
    text = rep.to_text()
    for key in ("tag: demo", "pass: FAIL", "max_residual: 1.000000e+00", "tolerance:", "samples: 2"):
        assert key in text


def test_audit_report_not_applicable_passes():
    rep = AuditReport("demo", 0.0, applicable=False)
    rep.add(1.0, 0.0)
    assert rep.passed and "N/A" in rep.to_text()


def test_audit_suite_combines():
    a, b = AuditReport("a", 0.0), AuditReport("b", 0.0)
    a.add(0, 1)
    b.add(2, 1)
    suite = AuditSuite([a, b])
    assert not suite.passed and suite.by_tag("a") is a


@pytest.mark.parametrize("t, tau, n", [(0.5, 0.2, 3), (0.6, 0.2, 3), (0.0, 0.1, 0), (1.0, 0.1, 10)])
def test_ceil_index(t, tau, n):
    assert ceil_index(t, tau) == n


def test_pairs_thinning():
    assert pairs(4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert len(pairs(200, 50)) <= 60


def test_gauss_legendre_polynomial_exact():
    assert gauss_legendre(lambda s: s ** 5 - s, 0.0, 2.0) == pytest.approx(64 / 6 - 2, rel=1e-13)

import math

import numpy as np
import pytest

from flamefront.front_solver import trajectory_for
from flamefront.phase_portrait import (PolarTrace, angle_monotonicity_report, cross_increments,
                                       to_polar)
from flamefront.profile_ode import ModelParams, WTrajectory


@pytest.fixture(scope="module")
def trace():
    return to_polar(trajectory_for(ModelParams(1.0, 0.5)).extend(-400.0))


def test_rows_ordered_toward_origin(trace):
    assert np.all(np.diff(trace.t) > 0)
    assert trace.t[-1] == 0.0
    assert len(trace.rows) == len(trace)


def test_quadrant_and_polar_identity(trace):
    assert np.all(trace.q >= 0) and np.all(trace.p <= 0)
    assert np.all((trace.theta_angle >= -math.pi / 2) & (trace.theta_angle <= 0))
    # absolute in units of r: near -pi/2 cos is ill-conditioned relative to itself
    assert np.all(np.abs(trace.q - trace.r * np.cos(trace.theta_angle)) <= 1e-14 * trace.r)
    assert np.all(np.abs(trace.p - trace.r * np.sin(trace.theta_angle)) <= 1e-14 * trace.r)
    residual = trace.q * np.sin(trace.theta_angle) - trace.p * np.cos(trace.theta_angle)
    assert np.all(np.abs(residual) <= 1e-12 * np.maximum(trace.r, 1e-300))


def test_angle_matches_atan2_where_representable(trace):
    ok = trace.r > 1e-250
    np.testing.assert_allclose(trace.theta_angle[ok], np.arctan2(trace.p[ok], trace.q[ok]),
                               rtol=1e-13, atol=1e-15)


def test_endpoint_limits(trace):
    assert trace.theta_angle[-1] == -math.pi / 2
    assert trace.theta_angle[-2] == pytest.approx(-math.pi / 2, abs=0.05)
    assert trace.theta_angle[0] == pytest.approx(0.0, abs=0.05)


def test_q_decreases_toward_origin(trace):
    assert np.all(np.diff(trace.q) < 0)


def test_angle_monotone(trace):
    report = angle_monotonicity_report(trace)
    assert report.ok
    assert report.max_increment < 1e-8


def test_cross_increment_sign_matches_angle_step():
    t = trajectory_for(ModelParams(1.0, 0.5)).extend(-50.0)
    tr = to_polar(t)
    keep = slice(None, -1)  # drop the rest point at the origin
    sub = PolarTrace(*(a[keep] for a in (tr.t, tr.q, tr.p, tr.r, tr.theta_angle)))
    cross = cross_increments(sub)
    d = np.diff(sub.theta_angle)
    big = np.abs(d) > 1e-13
    assert np.array_equal(np.sign(cross[big]), np.sign(d[big]))


def test_report_flags_injected_bump(trace):
    angle = trace.theta_angle.copy()
    k = len(angle) // 3
    angle[k] += 1e-3
    bumped = PolarTrace(trace.t, trace.q, trace.p, trace.r, angle)
    report = angle_monotonicity_report(bumped)
    assert not report.ok
    assert report.index == k
    assert report.t_location == trace.t[k]
    natural = trace.theta_angle[k] - trace.theta_angle[k - 1]
    assert report.max_increment == pytest.approx(1e-3 + natural, rel=1e-9)
    assert trace.t[k] in report.violations


def test_report_on_trivial_traces():
    one = PolarTrace(np.zeros(1), np.zeros(1), np.zeros(1), np.zeros(1), np.array([-1.0]))
    assert angle_monotonicity_report(one).ok
    with pytest.raises(ValueError):
        PolarTrace(np.zeros(0), np.zeros(0), np.zeros(0), np.zeros(0), np.zeros(0))
    with pytest.raises(ValueError):
        PolarTrace(np.zeros(2), np.zeros(1), np.zeros(2), np.zeros(2), np.zeros(2))


def test_needs_two_nodes():
    class Stub:
        def __len__(self):
            return 1
    with pytest.raises(ValueError):
        to_polar(Stub())


def test_extreme_order_angle_survives_underflow():
    t = WTrajectory(ModelParams(1.0, 0.99), 1e-4).extend(-5.0)
    tr = to_polar(t)
    assert np.any(tr.q[1:] == 0.0)  # w underflows near the origin
    assert np.all(np.isfinite(tr.theta_angle))
    assert angle_monotonicity_report(tr).ok

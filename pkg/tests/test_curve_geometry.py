import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shellspec.curve_geometry import (Grading, bi_lipschitz_estimate, build_curve, curve_from_dict,
                                      perturbed_line, sample_curve, smooth_step, smoothed_corner,
                                      straight_line)


def test_smooth_step_limits_and_monotone():
    x = np.linspace(-2, 2, 401)
    y = smooth_step(x)
    assert y[0] == 0 and y[-1] == 1
    assert np.all(np.diff(y) >= 0)
    assert np.isclose(smooth_step(0.0), 0.5)


@pytest.mark.parametrize("spec", [straight_line(1.0), smoothed_corner(math.pi / 6), perturbed_line(0.4)])
def test_sampled_curve_basics(spec):
    cv = sample_curve(build_curve(spec), 6, 10)
    assert cv.n % 2 == 1
    assert np.isclose(cv.s[cv.n // 2], 0.0)
    assert np.allclose(np.linalg.norm(cv.tangents, axis=1), 1, atol=1e-12)
    # normal = (t2, -t1)
    assert np.allclose(cv.normals, np.stack([cv.tangents[:, 1], -cv.tangents[:, 0]], 1))
    assert np.all(cv.weights > 0)
    # trapezoid without end halving: 2L plus one cell
    assert abs(cv.weights.sum() - 2 * cv.truncation_halflength) <= 1.01 * cv.weights.max()


def test_arc_length_parametrisation():
    cv = sample_curve(build_curve(smoothed_corner(0.4)), 20, 4, refine=False)
    steps = np.linalg.norm(np.diff(cv.points, axis=0), axis=1)
    assert np.allclose(steps, np.diff(cv.s), rtol=2e-3)


def test_corner_arms_are_straight_outside_support():
    spec = build_curve(smoothed_corner(0.3, 1.0))
    s = np.array([2.0, 5.0, 9.0])
    g = spec.gamma(s)
    d = np.diff(g, axis=0)
    ang = np.arctan2(d[:, 1], d[:, 0])
    assert np.allclose(ang, 0.3, atol=1e-12)


def test_bad_inputs():
    with pytest.raises(ValueError):
        smoothed_corner(0.0)
    with pytest.raises(ValueError):
        smoothed_corner(2.0)
    with pytest.raises(ValueError):
        perturbed_line(0.2, width=-1)
    with pytest.raises(ValueError):
        curve_from_dict({"family": "spiral"})


def test_bi_lipschitz_corner_about_sin_omega():
    spec = build_curve(smoothed_corner(0.3))
    b = bi_lipschitz_estimate(spec, 20)
    assert 0 < b <= math.sin(0.3) + 1e-12
    assert b > 0.2


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.5, 5.0))
def test_grading_inverse(a, beta):
    g = Grading(a, beta)
    u = np.linspace(-10, 10, 51)
    assert np.allclose(g.inverse(g.phi(u)), u, atol=1e-9)
    assert np.all(g.dphi(u) > 0)


def test_curve_from_dict_roundtrip():
    spec = curve_from_dict({"family": "smoothed_corner", "omega": 0.5, "width": 2.0})
    assert spec.family == "smoothed_corner" and spec.M == 2.0

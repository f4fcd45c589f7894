import json
import math

import numpy as np
import pytest

from shellspec.curve_geometry import build_curve, sample_curve, smoothed_corner, straight_line
from shellspec.schrodinger_reference import (PROJECTIONS, EigenvalueNotFound, assemble_single_layer,
                                             kernel_limit_deviation, nonrel_limit_experiment,
                                             schrodinger_eigenvalues, _ete_block,
                                             _single_layer_nodal)
from shellspec.dirac_core import InteractionParams
from shellspec.special_functions import bessel_k

CORNER = build_curve(smoothed_corner(math.pi / 6, 1.0))
LINE = build_curve(straight_line(1.0))


@pytest.fixture(scope="module")
def corner():
    return sample_curve(CORNER, 6, 25)


def test_projection_pair():
    assert np.array_equal(PROJECTIONS.P_plus, np.outer(PROJECTIONS.e, PROJECTIONS.e))
    assert np.array_equal(PROJECTIONS.P_plus, [[1, 0], [0, 0]])


def test_preconditions(corner):
    with pytest.raises(ValueError):
        assemble_single_layer(corner, 1.0, 0.0)
    with pytest.raises(ValueError):
        assemble_single_layer(corner, 0.0, -1.0)
    with pytest.raises(ValueError):
        assemble_single_layer(sample_curve(CORNER, 4, 5), 1.0, -0.5)     # under-truncated
    with pytest.raises(ValueError):
        schrodinger_eigenvalues(corner, 1.0, -1.0, (-1.0, -1.0))
    with pytest.raises(ValueError):
        schrodinger_eigenvalues(corner, 1.0, -1.0, (-1.0, 0.1))


def test_kernel_real_positive_symmetric(corner):
    a = assemble_single_layer(corner, 1.0, -1.0)
    S = a.s_matrix
    assert np.isrealobj(S)
    assert np.abs(S - S.T).max() <= 1e-8 * np.abs(S).max()
    ev = a.eigenvalues()
    assert ev.min() > 0


def test_far_entries_are_kernel(corner):
    m, z = 1.0, -0.7
    kappa = math.sqrt(2 * m * abs(z))
    S = _single_layer_nodal(corner, m, kappa)
    i, j = 5, corner.n - 7
    r = np.linalg.norm(corner.points[i] - corner.points[j])
    assert S[i, j] == pytest.approx(m / np.pi * bessel_k(0, kappa * r) * corner.weights[j], rel=1e-12)


def test_entries_decay():
    cv = sample_curve(LINE, 4, 25)
    a = assemble_single_layer(cv, 1.0, -1.0)
    ds = np.abs(cv.s[:, None] - cv.s[None, :])
    S = np.abs(a.nodal)
    kappa = a.kappa
    far = ds > 5
    env = np.exp(-kappa * ds[far]) * S.max()
    assert np.all(S[far] <= env)


def test_top_eigenvalue_decreasing_in_abs_z(corner):
    tops = [assemble_single_layer(corner, 1.0, z).eigenvalues()[-1] for z in (-0.4, -0.6, -0.9, -1.5)]
    assert np.all(np.diff(tops) < 0)


def test_repulsive_has_no_roots(corner):
    assert schrodinger_eigenvalues(corner, 1.0, 1.0, (-2.0, -0.1)) == []


def test_line_has_no_root_below_threshold():
    cv = sample_curve(LINE, 4, 30)
    assert schrodinger_eigenvalues(cv, 1.0, -1.0, (-1.5, -0.5), steps=12) == []


def test_mesh_doubling(corner):
    z1 = schrodinger_eigenvalues(corner, 1.0, -1.0, (-0.8, -0.505), steps=8)
    z2 = schrodinger_eigenvalues(sample_curve(CORNER, 12, 25), 1.0, -1.0, (-0.8, -0.505), steps=8)
    assert len(z1) == len(z2) == 1
    assert abs(z1[0] - z2[0]) <= 1e-4


def test_large_c_limit_of_ete_block(corner):
    # e^T C_{z + mc^2} e -> S(z) entrywise as c grows
    m, z = 1.0, -1.0
    S = _single_layer_nodal(corner, m, math.sqrt(2 * m))
    errs = [np.abs(_ete_block(corner, InteractionParams(0, 0, 0, m, c), z) - S).max() for c in (10, 100, 1000)]
    assert errs[-1] < 1e-6 * np.abs(S).max()
    assert errs[0] > errs[1] > errs[2]


def test_kernel_deviation_rejects_small_c(corner):
    with pytest.raises(ValueError):
        kernel_limit_deviation(corner, 1.0, -4.0, 1.5)
    with pytest.raises(ValueError):
        kernel_limit_deviation(corner, -1.0, -1.0, 8)


def test_phi_deviation_halves(corner):
    d = [kernel_limit_deviation(corner, 1.0, -1.0, c)["Phi"] for c in (8, 16, 32)]
    r = [d[1] / d[0], d[2] / d[1]]
    assert all(0.4 <= x <= 0.6 for x in r)


def test_ete_deviation_quarters(corner):
    # the measured rate of the C deviation is 1/c^2 (see the notes)
    d = [kernel_limit_deviation(corner, 1.0, -1.0, c)["C"] for c in (8, 16, 32)]
    r = [d[1] / d[0], d[2] / d[1]]
    assert all(0.2 <= x <= 0.3 for x in r)


def test_nonrel_rejects_line_and_bad_grid(corner):
    cv = sample_curve(LINE, 4, 25)
    with pytest.raises(ValueError):
        nonrel_limit_experiment(cv, 1.0, -1.0, [4, 8])
    with pytest.raises(ValueError):
        nonrel_limit_experiment(corner, 1.0, -1.0, [8, 4])
    with pytest.raises(ValueError):
        nonrel_limit_experiment(corner, 1.0, 1.0, [4, 8])


def test_nonrel_no_root_in_bracket(corner):
    with pytest.raises(EigenvalueNotFound):
        nonrel_limit_experiment(corner, 1.0, -1.0, [4, 8], bracket=(-0.52, -0.505))


def test_nonrel_observed_rate_and_json(corner):
    fit = nonrel_limit_experiment(corner, 1.0, -1.0, [4, 8, 16, 32], bracket=(-0.8, -0.50001))
    assert -2.2 <= fit.slope <= -1.8
    assert all(a > b for a, b in zip(fit.err, fit.err[1:]))
    d = json.loads(fit.to_json())
    assert set(d) >= {"c", "err", "slope"}

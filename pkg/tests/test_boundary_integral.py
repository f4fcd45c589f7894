import json
import math
import warnings

import numpy as np
import pytest
from scipy.special import dawsn

from shellspec.boundary_integral import (assemble_cz, bs_eigenvalue_scan, bs_mu, default_curve_for,
                                         field_csv, hilbert_weights, identity_defect,
                                         line_reference_deviation, pv_correction,
                                         reconstruct_eigenfunction, required_truncation, to_rotated,
                                         from_rotated, apply_phi)
from shellspec.curve_geometry import build_curve, sample_curve, smoothed_corner, straight_line
from shellspec.dirac_core import InteractionParams, green_kernel

CORNER = build_curve(smoothed_corner(math.pi / 6, 1.0))
LINE = build_curve(straight_line(1.0))


@pytest.fixture(scope="module")
def corner_asm():
    p = InteractionParams(0.5, -1.0, 0.3)
    cv = sample_curve(CORNER, 6, 20)
    return assemble_cz(cv, p, 0.2)


def test_hilbert_weights_exact_on_gaussian():
    # PV int exp(-t^2)/(s - t) dt = 2 sqrt(pi) dawsn(s)
    n, h = 401, 0.1
    t = (np.arange(n) - n // 2) * h
    f = np.exp(-t ** 2)
    d = t[:, None] - t[None, :]
    np.fill_diagonal(d, np.inf)
    approx = (h / d) @ f + hilbert_weights(n) @ f
    assert np.abs(approx - 2 * np.sqrt(np.pi) * dawsn(t))[150:250].max() < 1e-12


def test_rotation_roundtrip(corner_asm):
    A = corner_asm.cz_matrix
    assert np.allclose(to_rotated(corner_asm.curve, A), corner_asm.rotated, atol=1e-14)
    assert np.allclose(from_rotated(corner_asm.curve, corner_asm.rotated), A, atol=1e-14)


def test_far_entries_are_kernel_plus_pv_correction(corner_asm):
    a = corner_asm
    cv, n = a.curve, a.n
    K = green_kernel(a.spectral_point, cv.points[:, None] - cv.points[None, :] + np.eye(n)[..., None],
                     a.params) * cv.weights[None, :, None, None]
    K = np.transpose(K, (0, 2, 1, 3)).reshape(2 * n, 2 * n)
    R = a.rotated.reshape(n, 2, n, 2).copy()
    corr = pv_correction(cv, a.params.c)
    R[:, 0, :, 1] -= corr
    R[:, 1, :, 0] -= corr
    phys = from_rotated(cv, R.reshape(2 * n, 2 * n)).reshape(n, 2, n, 2)
    K = K.reshape(n, 2, n, 2)
    i = np.arange(n)
    far = np.abs(i[:, None] - i[None, :]) > 80      # outside the log-correction window
    err = np.abs(phys - K).max(axis=(1, 3))[far].max()
    assert err < 1e-12


def _kernel_part_blocks(a):
    n = a.n
    R = a.rotated.reshape(n, 2, n, 2).copy()
    corr = pv_correction(a.curve, a.params.c)
    R[:, 0, :, 1] -= corr
    R[:, 1, :, 0] -= corr
    blk = np.abs(R).max(axis=(1, 3))
    scale = np.abs(a.rotated.reshape(n, 2, n, 2)[np.arange(n), :, np.arange(n), :]).max()
    return blk, scale


def test_kernel_part_decays_in_arc_length_on_line():
    cv = sample_curve(LINE, 6, 20)
    a = assemble_cz(cv, InteractionParams(0.5, -1.0, 0.3), 0.2)
    blk, scale = _kernel_part_blocks(a)
    ds = np.abs(cv.s[:, None] - cv.s[None, :])
    assert blk[ds >= 10 / a.zeta].max() < 1e-4 * scale


def test_kernel_part_decays_in_distance_on_corner(corner_asm):
    # on a corner two far-apart arc-length points can be close in the plane
    a = corner_asm
    blk, scale = _kernel_part_blocks(a)
    p = a.curve.points
    dx = np.hypot(p[:, None, 0] - p[None, :, 0], p[:, None, 1] - p[None, :, 1])
    assert blk[dx >= 10 / a.zeta].max() < 1e-4 * scale


def test_pv_correction_is_small_far_away(corner_asm):
    cv = corner_asm.curve
    corr = np.abs(pv_correction(cv, 1.0))
    n = cv.n
    d = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    dd = np.minimum(d, n - d)
    assert corr[dd >= 60].max() < 1.0 / (2 * np.pi * 60) * 1.1 * 2


def test_weighted_self_adjoint(corner_asm):
    W = np.repeat(corner_asm.curve.weights, 2)
    H = W[:, None] * corner_asm.cz_matrix
    assert np.abs(H - H.conj().T).max() <= 1e-12 * np.abs(H).max()


def test_scaling_relation():
    cv = sample_curve(CORNER, 6, 20)
    p = InteractionParams(0.5, -1, 0.3, 0.8, 2.0)
    q = InteractionParams(0.5, -1, 0.3, 1.6, 1.0)
    A = assemble_cz(cv, p, 0.9, check_truncation=False).cz_matrix
    B = assemble_cz(cv, q, 0.45, check_truncation=False).cz_matrix
    assert np.allclose(A, B / 2.0, atol=1e-14)


def test_preconditions():
    p = InteractionParams(0, -1, 0)
    cv = sample_curve(LINE, 4, 8)
    with pytest.raises(ValueError):
        assemble_cz(cv, p, 1.2)
    with pytest.raises(ValueError):
        assemble_cz(cv, p, 0.1 + 0.1j)
    with pytest.raises(ValueError):
        assemble_cz(cv, p, 0.0)                  # under-truncated
    assert required_truncation(1.0, 1.0, 1e-8) == pytest.approx(1 + math.log(1e8))


def test_identity_small_mesh():
    cv = sample_curve(LINE, 8, 20, refine=False)
    assert identity_defect(assemble_cz(cv, InteractionParams(0, 0, 0), 0.0)) < 5e-3


@pytest.mark.filterwarnings("ignore::UserWarning")
def test_scan_rejects_bad_windows():
    cv = sample_curve(LINE, 4, 20)
    p = InteractionParams(0, -1, 0)
    with pytest.raises(ValueError):
        bs_eigenvalue_scan(cv, p, (0.3, 0.3))
    with pytest.raises(ValueError):
        bs_eigenvalue_scan(cv, p, (0.3, 0.7), check_truncation=False)
    q = InteractionParams(2.0, 0, 0)
    with pytest.raises(ValueError):
        bs_eigenvalue_scan(cv, q, (-0.5, 0.5), check_truncation=False)   # isolated point 0


def test_scan_warns_when_critical():
    cv = sample_curve(LINE, 3, 30)
    p = InteractionParams(2.0, 0, 0)
    with pytest.warns(UserWarning):
        res = bs_eigenvalue_scan(cv, p, (0.2, 0.5), steps=3, check_truncation=False)
    assert res.warnings


def test_scan_serialisation():
    cv = sample_curve(LINE, 3, 30)
    res = bs_eigenvalue_scan(cv, InteractionParams(0, -1, 0), (-0.3, 0.3), steps=5)
    d = json.loads(res.to_json())
    assert d["eigenvalues"] == [] and len(d["scan"]) == 5
    csv = res.to_csv()
    assert csv.startswith("z,min_abs_mu_plus_1,converged\n") and "\r" not in csv
    assert len(csv.strip().split("\n")) == 6


def test_line_reference_deviation():
    p = InteractionParams(0, -1, 0)
    cv = sample_curve(LINE, 6, 20)
    far, ratio, sv = line_reference_deviation(cv, p, 0.0)
    assert far <= 1e-12 and sv.max() <= 1e-12
    cv = sample_curve(CORNER, 6, 20)
    far, ratio, sv = line_reference_deviation(cv, p, 0.0)
    assert far < 1e-10
    assert ratio <= 0.1


def test_field_zero_density_and_too_close():
    p = InteractionParams(0, -1, 0)
    cv = sample_curve(CORNER, 6, 20)
    asm = assemble_cz(cv, p, 0.0)
    grid = np.array([[0.0, 3.0], [4.0, -2.0]])
    assert np.all(reconstruct_eigenfunction(asm, np.zeros((cv.n, 2)), grid) == 0)
    with pytest.raises(ValueError):
        reconstruct_eigenfunction(asm, np.ones((cv.n, 2)), cv.points[cv.n // 2][None, :])
    out = field_csv(grid, np.ones((2, 2)))
    assert out.splitlines()[0] == "x,y,abs_u1_sq,abs_u2_sq"


def test_field_decay_envelope():
    p = InteractionParams(0, 0, 0)
    cv = sample_curve(LINE, 6, 20)
    g = np.exp(-cv.s ** 2)
    dens = np.stack([g, 0 * g], 1)
    z = 0.3
    zt = math.sqrt(1 - z * z)
    u = apply_phi(cv, z, p, dens, np.array([[0.0, 3.0], [0.0, 6.0]]))
    ratio = np.linalg.norm(u[1]) / np.linalg.norm(u[0])
    env = math.exp(-zt * 3.0)
    assert env / 3 <= ratio <= 3 * env


def test_bs_mu_real_on_corner():
    cv = sample_curve(build_curve(smoothed_corner(0.3)), 5, 25)
    mu, v, allw, asm = bs_mu(cv, InteractionParams(0, -1, 0), 0.5)
    assert abs(mu.imag) < 1e-10


ROOT_WINDOW = (0.555, 0.575)          # around the bound state of (0, -1, 0) on the 0.3 corner


def _corner_root(npu, L):
    cv = sample_curve(build_curve(smoothed_corner(0.3)), npu, L)
    roots = bs_eigenvalue_scan(cv, InteractionParams(0, -1, 0), ROOT_WINDOW, steps=5).roots()
    assert len(roots) == 1
    return roots[0], cv


def test_root_stable_under_small_mesh_change():
    z1, cv = _corner_root(6.0, 24.0)
    # node counts are odd, so the closest change to +37 nodes is +38
    U = cv.u[-1]
    npu2 = (cv.n + 38 - 1) / (2 * U)
    z2, cv2 = _corner_root(npu2, 24.0)
    assert cv2.n == cv.n + 38
    assert abs(z1 - z2) <= 1e-3


def test_truncation_convergence():
    L = 24.0
    z1, _ = _corner_root(6.0, L)
    z2, _ = _corner_root(6.0, 1.5 * L)
    zt = math.sqrt(1 - z1 ** 2)
    assert abs(z1 - z2) <= math.exp(-zt * (L - 1.0) / 2)

"""Nystrom discretization of C_z on a sampled curve, Birman-Schwinger scan,
potential operator Phi_z and the operator identity checks.

Everything is assembled in a rotated frame: at node i the 2-vector is
multiplied by U_i = V_i (sigma.nu_i) with V_i = diag(1, conj t_i). In that
frame sigma.t -> -sigma1 and sigma.nu -> -sigma2 at every node, so the
Cauchy part of the kernel has the constant coefficient E = -(i/2 pi c) sigma1
and the coupling eta s0 + tau s3 + i lam (s.nu) s3 becomes the constant matrix
eta s0 - tau s3 - lam s1.

Quadrature is the trapezoidal rule in the graded variable u (nodes u_i = i h,
weights h phi'(u_i)), with
  * a spectral principal-value correction for the Cauchy part
    (periodic discrete Hilbert weights, exact at the Nyquist frequency),
  * the log-kernel end correction h f_i log(h/2pi) on the diagonal, upgraded
    to band-limited accuracy by a short-range Ci(pi|d|) stencil,
  * the smooth finite part (curvature term) on the diagonal.
"""

import csv
import io
import json
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.optimize import minimize_scalar

from .band_structure import essential_spectrum
from .curve_geometry import SampledCurve, sample_curve, smooth_step
from .dirac_core import (SIGMA0, SIGMA1, SIGMA2, SIGMA3, InteractionParams,
                         green_kernel, interaction_matrix, is_critical, sigma_dot, zeta)
from .special_functions import EULER_GAMMA, LOG2, bessel_k

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8


# -- frame helpers ---------------------------------------------------------------

def _tc(curve):
    """tangents as unit complex numbers"""
    return curve.tangents[:, 0] + 1j * curve.tangents[:, 1]


def frame_matrices(curve):
    """U_i = V_i (sigma.nu_i) = [[0, i conj t], [-i, 0]], shape (n, 2, 2)."""
    t = _tc(curve)
    U = np.zeros((curve.n, 2, 2), dtype=complex)
    U[:, 0, 1] = 1j * np.conj(t)
    U[:, 1, 0] = -1j
    return U


def _blockdiag_apply(U, A, right=None):
    """U_i A_ij right_j for A stored as (n, 2, n, 2)."""
    out = np.einsum("iab,ibjc->iajc", U, A)
    if right is not None:
        out = np.einsum("iajb,jbc->iajc", out, right)
    return out


def to_rotated(curve, A):
    n = curve.n
    U = frame_matrices(curve)
    Uh = np.conj(np.transpose(U, (0, 2, 1)))
    return _blockdiag_apply(U, A.reshape(n, 2, n, 2), Uh).reshape(2 * n, 2 * n)


def from_rotated(curve, Ah):
    n = curve.n
    U = frame_matrices(curve)
    Uh = np.conj(np.transpose(U, (0, 2, 1)))
    return _blockdiag_apply(Uh, Ah.reshape(n, 2, n, 2), U).reshape(2 * n, 2 * n)


def hilbert_weights(n):
    """W_d - (pi/n) cot(pi d/n) for the odd-n periodic discrete Hilbert transform.

    W_d = (2 pi/n) sum_{k=1}^{(n-1)/2} sin(2 pi k d/n) is the exact PV quadrature
    for trigonometric polynomials; the cot part is what the plain punctured
    trapezoidal rule already contributes. The difference is
    -(pi/n)(-1)^d / sin(pi d/n). Returned as an (n, n) matrix in d = i - j.

    This is global on purpose: any local version gets the sign jump of the
    Hilbert symbol at the Nyquist frequency wrong, and then the discrete
    square of the Cauchy part is no longer -I on the highest modes.
    """
    if n % 2 == 0:
        raise ValueError("odd node count expected")
    i = np.arange(n)
    d = i[:, None] - i[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        w = -(np.pi / n) * np.where(d % 2 == 0, 1.0, -1.0) / np.sin(np.pi * d / n)
    np.fill_diagonal(w, 0.0)
    return w


def pv_correction(curve, c):
    """The (n, n) scalar factor of the PV correction on the off-diagonal slots."""
    beta = np.sqrt(curve.dphi[None, :] / curve.dphi[:, None])
    return (-1j / (2 * np.pi * c)) * beta * hilbert_weights(curve.n)


# -- assembly --------------------------------------------------------------------

def _assemble_rotated(curve, c, mass, zt, zplus, zminus):
    """C_z in the rotated frame, as a (2n, 2n) complex matrix.

    zt = zeta(z) > 0, zplus = z/c + mc, zminus = z/c - mc (passed separately so
    the caller can avoid cancellation when z is near mc^2).
    """
    n, h = curve.n, curve.h
    pts = curve.points
    t = _tc(curve)
    dphi = curve.dphi
    dx = pts[:, None, 0] - pts[None, :, 0]
    dy = pts[:, None, 1] - pts[None, :, 1]
    r = np.hypot(dx, dy)
    np.fill_diagonal(r, 1.0)
    k0 = bessel_k(0, zt * r)
    k1 = bessel_k(1, zt * r)
    a = 1j * zt * k1 / (2 * np.pi * c)
    b = k0 / (2 * np.pi * c)
    xh = (dx + 1j * dy) / r
    wj = (h * dphi)[None, :]
    A = np.zeros((n, 2, n, 2), dtype=complex)
    A[:, 0, :, 0] = np.conj(t)[:, None] * t[None, :] * b * zminus * wj
    A[:, 0, :, 1] = -a * np.conj(t)[:, None] * xh * wj
    A[:, 1, :, 0] = -a * t[None, :] * np.conj(xh) * wj
    A[:, 1, :, 1] = b * zplus * wj
    idx = np.arange(n)
    A[idx, :, idx, :] = 0.0

    # spectral PV correction for E/(s - t), E = -(i/2 pi c) sigma1
    corr = pv_correction(curve, c)
    A[:, 0, :, 1] += corr
    A[:, 1, :, 0] += corr

    # band-limited log correction: the punctured trapezoid rule plus the
    # h f_i log(h/2pi) end term gets the symbol of -log|x| wrong by O(h)
    # near the Nyquist frequency; the difference to the exact band-limited
    # weights is h*Ci(pi|d|) (d != 0), h*(gamma - log 2) (d = 0). It is
    # applied to the log coefficient of the kernel, localized by a smooth
    # window so that the growing I0/I1 factors never enter.
    D = min((n - 1) // 2, max(16, int(round(4.0 / (zt * h)))))
    i = np.arange(n)
    dd = np.abs(i[:, None] - i[None, :])
    near = dd <= D
    win = np.where(near, smooth_step(3.0 - 4.0 * dd / max(D, 1)), 0.0)
    with np.errstate(invalid="ignore"):
        delta = np.where(dd == 0, EULER_GAMMA - LOG2, special.sici(np.pi * dd)[1])
    cw = delta * win * wj
    zr = zt * np.where(near, r, 0.0)
    i0 = special.i0(zr) / (2 * np.pi * c)
    i1 = 1j * zt * special.i1(zr) / (2 * np.pi * c)
    A[:, 0, :, 0] += cw * i0 * zminus * np.conj(t)[:, None] * t[None, :]
    A[:, 1, :, 1] += cw * i0 * zplus
    A[:, 0, :, 1] += cw * i1 * np.conj(t)[:, None] * xh
    A[:, 1, :, 0] += cw * i1 * t[None, :] * np.conj(xh)
    dcorr = h * dphi * (EULER_GAMMA - LOG2) / (2 * np.pi * c)

    # diagonal: finite part of the Cauchy term and the log-corrected K0 term
    logpart = (-np.log(zt * dphi) + LOG2 - EULER_GAMMA - np.log(h / (2 * np.pi)))
    diag_b = h * dphi * logpart / (2 * np.pi * c)
    fin = -h * curve.curvature * dphi / (4 * np.pi * c)
    A[idx, 0, idx, 0] = (diag_b + dcorr) * zminus
    A[idx, 1, idx, 1] = (diag_b + dcorr) * zplus
    A[idx, 0, idx, 1] = fin
    A[idx, 1, idx, 0] = fin
    return A.reshape(2 * n, 2 * n)


def _check_gap(z, params):
    if np.iscomplexobj(z) and np.imag(z) != 0:
        raise ValueError("assemble_cz expects a real spectral point")
    z = float(np.real(z))
    if not abs(z) < params.gap_edge:
        raise ValueError(f"z={z} is outside the free gap (-{params.gap_edge}, {params.gap_edge})")
    return z


def required_truncation(spec_M, zt, tol=DEFAULT_TOL):
    return spec_M + math.log(1.0 / tol) / zt


@dataclass
class BSAssembly:
    curve: SampledCurve
    params: InteractionParams
    spectral_point: float
    rotated: np.ndarray          # C_z in the rotated frame
    zeta: float
    _cz: np.ndarray = None

    @property
    def n(self):
        return self.curve.n

    @property
    def cz_matrix(self):
        """C_z in the original frame, acting on nodal values (weights included)."""
        if self._cz is None:
            self._cz = from_rotated(self.curve, self.rotated)
        return self._cz

    def coupling_rotated(self):
        p = self.params
        return p.eta * SIGMA0 - p.tau * SIGMA3 - p.lam * SIGMA1

    @property
    def bs_matrix(self):
        """(eta s0 + tau s3 + i lam (s.nu) s3) C_z in the original frame."""
        theta = interaction_matrix(self.params, self.curve.normals)
        n = self.n
        B = np.einsum("iab,ibjc->iajc", theta, self.cz_matrix.reshape(n, 2, n, 2))
        return B.reshape(2 * n, 2 * n)

    def bs_rotated(self):
        n = self.n
        th = self.coupling_rotated()
        return np.einsum("ab,ibjc->iajc", th, self.rotated.reshape(n, 2, n, 2)).reshape(2 * n, 2 * n)

    def weights2(self):
        return np.repeat(self.curve.weights, 2)


def assemble_cz(curve, params, z, tol=DEFAULT_TOL, check_truncation=True):
    z = _check_gap(z, params)
    zt = float(np.real(zeta(z, params)))
    if check_truncation:
        need = required_truncation(curve.spec.M, zt, tol)
        if curve.truncation_halflength < need * (1 - 1e-9):
            raise ValueError(f"curve truncated at {curve.truncation_halflength:.3g}, "
                             f"need >= {need:.3g} for tol={tol:g}")
    c, m = params.c, params.mass
    R = _assemble_rotated(curve, c, m, zt, z / c + m * c, z / c - m * c)
    return BSAssembly(curve, params, z, R, zt)


def assemble_shifted(curve, params, E):
    """C_{E + mc^2} in the rotated frame, cancellation-free for large c.

    zeta^2 = -2mE - E^2/c^2 and the Z entries are (2mc + E/c, E/c).
    """
    c, m = params.c, params.mass
    z2 = -2 * m * E - E ** 2 / c ** 2
    if z2 <= 0:
        raise ValueError("shifted point not below the gap edge")
    zt = math.sqrt(z2)
    return _assemble_rotated(curve, c, m, zt, 2 * m * c + E / c, E / c)


# -- operator identity -------------------------------------------------------------

def interior_mask(curve, margin):
    return np.abs(curve.s) <= curve.truncation_halflength - margin


def weighted_norm(curve, M, mask=None):
    """2-norm of M in L^2(weights), optionally restricted to masked nodes."""
    w = np.sqrt(np.repeat(curve.weights, 2))
    Mw = w[:, None] * M / w[None, :]
    if mask is not None:
        m2 = np.repeat(mask, 2)
        Mw = Mw[np.ix_(m2, m2)]
    return float(np.linalg.norm(Mw, 2))


def identity_defect(assembly, margin=None):
    """|| 4c^2 ((sigma.nu) C_z)^2 + I || on nodes at distance >= margin from the ends.

    The product is taken over the whole truncated curve; near the ends the
    missing part of the curve spoils the identity, so rows/cols there are
    dropped (default margin 8/zeta).
    """
    c = assembly.params.c
    n = assembly.n
    if margin is None:
        margin = 8.0 / assembly.zeta
    # sigma.nu -> -sigma2 in the rotated frame
    S = np.kron(np.eye(n), -SIGMA2)
    SC = S @ assembly.rotated
    M = 4 * c ** 2 * (SC @ SC) + np.eye(2 * n)
    mask = interior_mask(assembly.curve, margin)
    if not mask.any():
        raise ValueError("no nodes left after removing the end margins")
    return weighted_norm(assembly.curve, M, mask)


# -- Birman-Schwinger scan ------------------------------------------------------------

def _nearest_eig(B, target=-1.0, k=4):
    """eigenvalue of B nearest to target plus its right eigenvector"""
    nn = B.shape[0]
    if nn <= 64:
        w, v = np.linalg.eig(B)
        i = int(np.argmin(np.abs(w - target)))
        return w[i], v[:, i], w
    from scipy.sparse.linalg import eigs
    try:
        w, v = eigs(B, k=min(k, nn - 2), sigma=target, which="LM")
    except Exception:                                   # pragma: no cover
        w, v = np.linalg.eig(B)
    i = int(np.argmin(np.abs(w - target)))
    return w[i], v[:, i], w


@dataclass
class ScanPoint:
    z: float
    mu: complex
    residual: float


@dataclass
class GapEigenvalue:
    z: float
    residual: float
    multiplicity: int
    mu: complex
    converged: bool


@dataclass
class EigenScanResult:
    params: InteractionParams
    window: tuple
    samples: list
    eigenvalues: list
    densities: list = field(default_factory=list)
    field_samples: object = None
    tol: float = DEFAULT_TOL
    warnings: list = field(default_factory=list)

    @property
    def min_residual(self):
        return min(p.residual for p in self.samples)

    def roots(self):
        return [e.z for e in self.eigenvalues]

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "window": list(self.window),
            "eigenvalues": [{"z": e.z, "residual": e.residual,
                             "multiplicity": e.multiplicity, "converged": e.converged}
                            for e in self.eigenvalues],
            "min_residual": self.min_residual,
            "scan": [{"z": p.z, "residual": p.residual} for p in self.samples],
            "warnings": list(self.warnings),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["z", "min_abs_mu_plus_1", "converged"])
        roots = {e.z: e for e in self.eigenvalues}
        rows = [(p.z, p.residual, False) for p in self.samples]
        rows += [(e.z, e.residual, e.converged) for e in roots.values()]
        for z, res, conv in sorted(rows):
            wr.writerow([repr(float(z)), repr(float(res)), "true" if conv else "false"])
        return buf.getvalue()


def bs_mu(curve, params, z, tol=DEFAULT_TOL, check_truncation=True):
    """(mu nearest -1, eigenvector in the original frame, all computed mus)."""
    asm = assemble_cz(curve, params, z, tol=tol, check_truncation=check_truncation)
    mu, v, allw = _nearest_eig(asm.bs_rotated())
    return mu, v, allw, asm


def default_curve_for(spec, params, window, nodes_per_unit=8.0, tol=DEFAULT_TOL, L=None):
    zmax = max(abs(window[0]), abs(window[1]))
    zt = float(np.real(zeta(zmax, params)))
    if L is None:
        L = required_truncation(spec.M, zt, tol)
    return sample_curve(spec, nodes_per_unit, L)


def bs_eigenvalue_scan(curve, params, z_window, steps=80, tol=DEFAULT_TOL,
                       threshold=0.2, check_truncation=True, workers=1):
    """Scan |mu(z) + 1| over z_window and refine the local minima.

    mu(z) is the eigenvalue of the BS matrix nearest -1. Minima below
    `threshold` are refined by golden section and a secant polish on
    Re mu + 1; a root is reported when |mu + 1| <= tol.
    """
    lo, hi = float(z_window[0]), float(z_window[1])
    if not lo < hi:
        raise ValueError("empty z window")
    warn = []
    if is_critical(params):
        msg = "critical coupling: BS discretization is ill-conditioned"
        warnings.warn(msg)
        warn.append(msg)
    rep = essential_spectrum(params)
    for a, b in rep.gap_bands():
        if not (hi <= a or lo >= b):
            raise ValueError(f"window ({lo}, {hi}) meets essential spectrum [{a}, {b}]")
    for q in rep.isolated_points:
        if lo <= q <= hi:
            raise ValueError(f"window contains the essential-spectrum point {q}")

    def resid(z):
        mu, v, allw, asm = bs_mu(curve, params, z, tol, check_truncation)
        return abs(mu + 1), mu, v, allw

    zs = np.linspace(lo, hi, steps)
    samples = []
    for z in _pmap(lambda z: (z,) + resid(z)[:2], zs, workers):
        samples.append(ScanPoint(float(z[0]), complex(z[2]), float(z[1])))
    res = np.array([p.residual for p in samples])

    cands = []
    for i in range(len(zs)):
        left = res[i - 1] if i > 0 else np.inf
        right = res[i + 1] if i < len(zs) - 1 else np.inf
        if res[i] <= left and res[i] <= right and res[i] < threshold:
            a = zs[max(i - 1, 0)]
            b = zs[min(i + 1, len(zs) - 1)]
            cands.append((a, b, zs[i]))

    eigs_out, dens = [], []
    for a, b, z0 in cands:
        root = _refine_root(resid, a, b, z0, tol)
        if root is None:
            continue
        z, r, mu, v, allw = root
        if not lo <= z <= hi:                 # the secant polish may leave the window
            continue
        if any(abs(z - e.z) < 1e-9 * max(1.0, params.gap_edge) for e in eigs_out):
            continue
        mult = int(np.sum(np.abs(allw + 1) <= max(10 * r, 1e-12)))
        ok = r <= tol
        eigs_out.append(GapEigenvalue(float(z), float(r), max(mult, 1), complex(mu), ok))
        dens.append(_density_original_frame(curve, v))
        samples.append(ScanPoint(float(z), complex(mu), float(r)))
    keep = [i for i in np.argsort([e.z for e in eigs_out]) if eigs_out[i].converged]
    dens = [dens[i] for i in keep]
    eigs_out = [eigs_out[i] for i in keep]
    samples.sort(key=lambda p: p.z)
    return EigenScanResult(params, (lo, hi), samples, eigs_out, dens, None, tol, warn)


def _density_original_frame(curve, v):
    n = curve.n
    U = frame_matrices(curve)
    Uh = np.conj(np.transpose(U, (0, 2, 1)))
    phi = np.einsum("iab,ib->ia", Uh, v.reshape(n, 2))
    return phi


def _refine_root(resid, a, b, z0, tol):
    """golden section on |mu+1| in [a, b], then secant on Re(mu)+1"""
    if a == b:
        return None
    opt = minimize_scalar(lambda z: resid(z)[0], bracket=None, bounds=(a, b),
                          method="bounded", options={"xatol": 1e-10 * max(1, abs(b - a))})
    z = float(opt.x)
    r, mu, v, allw = resid(z)
    if r > 0.05:
        return None
    # secant polish, mu is real near an isolated root
    z1 = z + 1e-6 * (b - a) if z + 1e-6 * (b - a) <= b else z - 1e-6 * (b - a)
    f0 = mu.real + 1
    r1, mu1, v1, allw1 = resid(z1)
    f1 = mu1.real + 1
    best = (r, z, mu, v, allw)
    if r1 < best[0]:
        best = (r1, z1, mu1, v1, allw1)
    zl, fl, zr, fr = z, f0, z1, f1
    for _ in range(30):
        if best[0] <= tol * 1e-3 or fr == fl:
            break
        zn = zr - fr * (zr - zl) / (fr - fl)
        if not a <= zn <= b:                  # stay inside the scanned bracket
            break
        rn, mun, vn, alln = resid(zn)
        if rn < best[0]:
            best = (rn, zn, mun, vn, alln)
        zl, fl, zr, fr = zr, fr, zn, mun.real + 1
        if abs(zr - zl) < 1e-15 * max(1.0, abs(zr)):
            break
    r, z, mu, v, allw = best
    return z, r, mu, v, allw


def _pmap(fn, items, workers):
    items = list(items)
    if workers is None or workers <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# -- potential operator Phi_z ---------------------------------------------------------------

def _fft_upsample(values, factor):
    """Trigonometric interpolation of nodal values (n odd) to factor*n points."""
    n = values.shape[0]
    F = np.fft.fft(values, axis=0)
    N = n * factor
    G = np.zeros((N,) + values.shape[1:], dtype=complex)
    half = (n - 1) // 2
    G[:half + 1] = F[:half + 1]
    G[N - half:] = F[n - half:]
    return np.fft.ifft(G, axis=0) * factor


def fine_quadrature(curve, factor=16):
    """Uniform-in-u fine grid over the same truncated range (periodic shift)."""
    n = curve.n
    u0 = curve.u[0]
    hf = curve.h / factor
    uf = u0 + hf * np.arange(n * factor)
    s = curve.grading.phi(uf)
    pts = curve.spec.gamma(s)
    w = hf * curve.grading.dphi(uf)
    return uf, s, pts, w


def apply_phi(curve, z, params, density, targets, factor=16, min_dist=None):
    """u(x) = int_Gamma G_z(x - y) density(y) dsigma(y) at planar targets.

    density: (n, 2) nodal values. The density is trigonometrically
    interpolated to a finer grid so that targets close to the curve are
    still resolved.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    density = np.asarray(density, dtype=complex).reshape(curve.n, 2)
    if min_dist is None:
        min_dist = np.min(curve.local_mesh_width())
    dist = distance_to_curve(curve, targets)
    if np.any(dist < min_dist * (1 - 1e-9)):
        raise ValueError("target point too close to the curve")
    if np.allclose(density, 0):
        return np.zeros((len(targets), 2), dtype=complex)
    if factor > 1:
        _, _, ypts, w = fine_quadrature(curve, factor)
        dens = _fft_upsample(density, factor)
    else:
        ypts, w, dens = curve.points, curve.weights, density
    out = np.zeros((len(targets), 2), dtype=complex)
    chunk = max(1, 2_000_000 // max(len(ypts), 1))
    for k in range(0, len(targets), chunk):
        X = targets[k:k + chunk]
        G = green_kernel(z, X[:, None, :] - ypts[None, :, :], params)
        out[k:k + chunk] = np.einsum("tjab,jb,j->ta", G, dens, w)
    return out


def distance_to_curve(curve, targets, factor=8):
    _, _, ypts, _ = fine_quadrature(curve, factor)
    targets = np.atleast_2d(targets)
    d = np.empty(len(targets))
    for k in range(len(targets)):
        d[k] = np.min(np.hypot(*(ypts - targets[k]).T))
    return d


def reconstruct_eigenfunction(assembly, density, grid, factor=16):
    """Field samples u = Phi_z density on planar points away from the curve."""
    return apply_phi(assembly.curve, assembly.spectral_point, assembly.params,
                     density, grid, factor)


def field_csv(points, values):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["x", "y", "abs_u1_sq", "abs_u2_sq"])
    for (x, y), (u1, u2) in zip(points, values):
        wr.writerow([repr(float(x)), repr(float(y)), repr(float(abs(u1) ** 2)),
                     repr(float(abs(u2) ** 2))])
    return buf.getvalue()


def one_sided_traces(assembly, density, nodes, factor=16, ladder=(4, 2, 1)):
    """Quadratic extrapolation in eps of Phi at gamma -+ eps nu.

    Returns (T_plus, T_minus) at the given node indices. T_plus is the
    trace from Omega_+, the side that nu points away from.
    """
    curve = assembly.curve
    hloc = curve.local_mesh_width()[nodes]
    out = []
    for side in (-1.0, 1.0):
        vals = []
        for k in ladder:
            eps = k * hloc
            X = curve.points[nodes] + side * eps[:, None] * curve.normals[nodes]
            vals.append(apply_phi(curve, assembly.spectral_point, assembly.params, density,
                                  X, factor, min_dist=0.5 * np.min(hloc)))
        # values at eps = 4h, 2h, h -> quadratic through them evaluated at 0
        f4, f2, f1 = vals
        out.append((8 * f1 - 6 * f2 + f4) / 3)
    return out[0], out[1]


def plemelj_defect(assembly, density, nodes, factor=16):
    """max relative deviation of T_pm Phi phi from -+(i/2c)(s.nu)phi + C_z phi"""
    c = assembly.params.c
    n = assembly.n
    Cphi = (assembly.cz_matrix @ density.reshape(-1)).reshape(n, 2)[nodes]
    snu = sigma_dot(assembly.curve.normals[nodes])
    jump = np.einsum("iab,ib->ia", snu, density[nodes]) * (1j / (2 * c))
    Tp, Tm = one_sided_traces(assembly, density, nodes, factor)
    ref_p = -jump + Cphi
    ref_m = jump + Cphi
    scale = max(np.max(np.abs(ref_p)), np.max(np.abs(ref_m)))
    return float(max(np.max(np.abs(Tp - ref_p)), np.max(np.abs(Tm - ref_m))) / scale)


# -- comparison with the straight line ---------------------------------------------------------

def line_reference_deviation(curve, params, z, line_curve=None):
    """Conjugated difference between C_z on the curve and on the straight line.

    In the rotated frame the straight-line operator is the same matrix
    kernel with x = (s - t) t, so the difference D = Chat_Gamma - Chat_line on
    a matched arc-length grid is exactly the conjugated difference
    kernel. Returns (max entry norm on the blocks with s, t both > M or
    both < -M, ratio of the 20th to the 1st singular value, singular values).
    """
    from .curve_geometry import straight_line
    z = _check_gap(z, params)
    zt = float(np.real(zeta(z, params)))
    c, m = params.c, params.mass
    A = _assemble_rotated(curve, c, m, zt, z / c + m * c, z / c - m * c)
    line = _matched_line(curve)
    B = _assemble_rotated(line, c, m, zt, z / c + m * c, z / c - m * c)
    D = A - B
    n = curve.n
    M = curve.spec.M
    s = curve.s
    both = ((s[:, None] > M) & (s[None, :] > M)) | ((s[:, None] < -M) & (s[None, :] < -M))
    Db = np.abs(D.reshape(n, 2, n, 2)).max(axis=(1, 3))
    far = float(Db[both].max()) if both.any() else 0.0
    w = np.sqrt(np.repeat(curve.weights, 2))
    sv = np.linalg.svd(w[:, None] * D / w[None, :], compute_uv=False)
    ratio = float(sv[min(19, len(sv) - 1)] / sv[0]) if sv[0] > 0 else 0.0
    return far, ratio, sv


def _matched_line(curve):
    """straight line sampled at the same arc-length nodes (same grading)"""
    from .curve_geometry import straight_line, build_curve
    spec = build_curve(straight_line(curve.spec.M))
    pts = np.stack([curve.s, np.zeros_like(curve.s)], axis=-1)
    tan = np.tile([1.0, 0.0], (curve.n, 1))
    nrm = np.tile([0.0, -1.0], (curve.n, 1))
    return SampledCurve(spec, curve.u, curve.h, curve.s, pts, tan, nrm,
                        np.zeros(curve.n), curve.dphi, curve.ddphi, curve.weights,
                        curve.truncation_halflength, 1.0, curve.grading)

"""Unit-speed curves with straight ends, described by a tangent angle psi(s).

gamma(s) = base + int_0^s (cos psi, sin psi) du,  normal nu = (t2, -t1).

Families
--------
straight_line      psi = 0
smoothed_corner    psi runs from pi - omega to omega, so the ends lie on the
                   rays r(cos w, -sin w) and r(cos w, sin w); the apex of the
                   asymptotes sits at the origin
perturbed_line     psi = amp * odd bump, a compact deformation of the x-axis

Sampling is uniform in an auxiliary variable u with s = phi(u).  phi' drops
smoothly to 1/4 around the bent part, which is the 4x refinement.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

FAMILIES = ("straight_line", "smoothed_corner", "perturbed_line")
MIN_C1 = 1e-6
REFINE = 4.0


# -- smooth step on [-1, 1] ----------------------------------------------

def _bump_exp(x):
    out = np.zeros_like(x, dtype=float)
    m = x > 0
    out[m] = np.exp(-1.0 / x[m])
    return out


def smooth_step(x):
    """C-infinity step: 0 for x <= -1, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    y = (x + 1.0) / 2.0
    a = _bump_exp(y)
    b = _bump_exp(1.0 - y)
    return a / (a + b)


def smooth_step_deriv(x):
    x = np.asarray(x, dtype=float)
    y = (x + 1.0) / 2.0
    out = np.zeros_like(y)
    m = (y > 0) & (y < 1)
    ym = y[m]
    a = np.exp(-1.0 / ym)
    b = np.exp(-1.0 / (1.0 - ym))
    da = a / ym ** 2
    db = -b / (1.0 - ym) ** 2
    out[m] = (da * b - a * db) / (a + b) ** 2 / 2.0
    return out


def _bump(x):
    """Compact bump exp(1 - 1/(1-x^2)) on (-1, 1), value 1 at 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = np.abs(x) < 1
    out[m] = np.exp(1.0 - 1.0 / (1.0 - x[m] ** 2))
    return out


def _bump_deriv(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = np.abs(x) < 1
    xm = x[m]
    out[m] = np.exp(1.0 - 1.0 / (1.0 - xm ** 2)) * (-2.0 * xm / (1.0 - xm ** 2) ** 2)
    return out


@dataclass(frozen=True)
class CurveSpec:
    family: str
    tangent_angle: Callable
    tangent_angle_deriv: Callable
    compact_support_bound: float
    base_point: tuple = (0.0, 0.0)
    omega: float = None
    width: float = None
    amplitude: float = None
    _table: dict = field(default=None, compare=False, repr=False)

    @property
    def M(self):
        return self.compact_support_bound

    def end_tangents(self):
        M = self.M
        a = float(self.tangent_angle(np.array([-2 * M - 1.0]))[0])
        b = float(self.tangent_angle(np.array([2 * M + 1.0]))[0])
        return np.array([np.cos(a), np.sin(a)]), np.array([np.cos(b), np.sin(b)])

    def asymptote_angle(self):
        """Angle between the two asymptotic rays (pi for a line)."""
        tm, tp = self.end_tangents()
        # the ray at -inf points along -tm
        return float(np.arccos(np.clip(np.dot(-tm, tp), -1.0, 1.0)))

    def gamma(self, s):
        return _gamma_eval(self, np.asarray(s, dtype=float))

    def tangent(self, s):
        p = self.tangent_angle(np.asarray(s, dtype=float))
        return np.stack([np.cos(p), np.sin(p)], axis=-1)

    def curvature(self, s):
        return self.tangent_angle_deriv(np.asarray(s, dtype=float))

    def to_dict(self):
        d = {"family": self.family}
        if self.family == "smoothed_corner":
            d.update(omega=self.omega, width=self.width)
        elif self.family == "perturbed_line":
            d.update(amplitude=self.amplitude, width=self.width)
        else:
            d.update(width=self.M)
        return d


# -- integration of the tangent on [-M, M] ----------------------------------

_GL_X, _GL_W = leggauss(24)
_NPANEL = 64


def _build_table(spec):
    M = spec.M
    edges = np.linspace(-M, M, _NPANEL + 1)
    # integral from 0 to each panel edge, via panel sums
    mids = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = mids[:, None] + half[:, None] * _GL_X[None, :]
    psi = spec.tangent_angle(nodes.ravel()).reshape(nodes.shape)
    pan = np.stack([(np.cos(psi) * _GL_W).sum(1) * half,
                    (np.sin(psi) * _GL_W).sum(1) * half], axis=-1)
    cum = np.vstack([np.zeros(2), np.cumsum(pan, axis=0)])
    # shift so that value at s = 0 vanishes
    i0 = _NPANEL // 2
    cum = cum - cum[i0]
    return edges, cum


def _segment_integral(spec, a, b):
    """int_a^b (cos psi, sin psi) du for arrays a, b (short intervals)."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    psi = spec.tangent_angle(nodes.ravel()).reshape(nodes.shape)
    return np.stack([(np.cos(psi) * _GL_W).sum(1) * half,
                     (np.sin(psi) * _GL_W).sum(1) * half], axis=-1)


def _gamma_raw(spec, s):
    """gamma without base point; exact straight continuation outside [-M, M]."""
    edges, cum = spec._table
    M = spec.M
    s = np.atleast_1d(s)
    out = np.empty(s.shape + (2,))
    sc = np.clip(s, -M, M)
    k = np.clip(np.searchsorted(edges, sc, side="right") - 1, 0, _NPANEL - 1)
    out[:] = cum[k] + _segment_integral(spec, edges[k], sc)
    tm, tp = spec.end_tangents()
    hi = s > M
    lo = s < -M
    out[hi] += (s[hi] - M)[:, None] * tp[None, :]
    out[lo] += (s[lo] + M)[:, None] * tm[None, :]
    return out


def _gamma_eval(spec, s):
    scalar = np.ndim(s) == 0
    out = _gamma_raw(spec, np.atleast_1d(s)) + np.asarray(spec.base_point)[None, :]
    return out[0] if scalar else out


# -- families ---------------------------------------------------------------

def straight_line(M=1.0):
    return CurveSpec("straight_line",
                     lambda s: np.zeros_like(np.asarray(s, dtype=float)),
                     lambda s: np.zeros_like(np.asarray(s, dtype=float)),
                     float(M))


def smoothed_corner(omega, width=1.0):
    if not (0.0 < omega < np.pi / 2):
        raise ValueError("half-angle omega must lie in (0, pi/2)")
    if width <= 0:
        raise ValueError("transition width must be positive")
    a, b = np.pi - omega, omega
    M = float(width)
    psi = lambda s: a + (b - a) * smooth_step(np.asarray(s, dtype=float) / M)
    dpsi = lambda s: (b - a) * smooth_step_deriv(np.asarray(s, dtype=float) / M) / M
    return CurveSpec("smoothed_corner", psi, dpsi, M, omega=float(omega),
                     width=float(width))


def perturbed_line(amplitude, width=1.0):
    if width <= 0:
        raise ValueError("bump width must be positive")
    M = float(width)
    # odd profile: both ends on one horizontal line, shifted to y = 0 later
    psi = lambda s: amplitude * (np.asarray(s) / M) * _bump(np.asarray(s, dtype=float) / M)
    def dpsi(s):
        x = np.asarray(s, dtype=float) / M
        return amplitude * (_bump(x) + x * _bump_deriv(x)) / M
    return CurveSpec("perturbed_line", psi, dpsi, M, amplitude=float(amplitude),
                     width=float(width))


def build_curve(spec):
    """Validate a CurveSpec and fix its base point; returns a new spec."""
    if spec.family not in FAMILIES:
        raise ValueError(f"unknown curve family {spec.family!r}")
    if spec.M <= 0:
        raise ValueError("compact support bound M must be positive")
    if spec.family == "smoothed_corner" and not (0.0 < spec.omega < np.pi / 2):
        raise ValueError("half-angle omega must lie in (0, pi/2)")
    tm, tp = spec.end_tangents()
    if np.linalg.norm(tm + tp) < 1e-12:
        raise ValueError("antiparallel ends")
    work = CurveSpec(spec.family, spec.tangent_angle, spec.tangent_angle_deriv,
                     spec.M, (0.0, 0.0), spec.omega, spec.width, spec.amplitude,
                     _build_table(spec))
    base = (0.0, 0.0)
    if spec.family == "smoothed_corner":
        # move the apex of the asymptote lines to the origin
        gM = _gamma_raw(work, np.array([spec.M]))[0]
        om = spec.omega
        x0 = gM[0] - gM[1] * np.cos(om) / np.sin(om)
        base = (-float(x0), 0.0)
    elif spec.family == "perturbed_line":
        gM = _gamma_raw(work, np.array([spec.M]))[0]
        base = (0.0, -float(gM[1]))
    out = CurveSpec(spec.family, spec.tangent_angle, spec.tangent_angle_deriv,
                    spec.M, base, spec.omega, spec.width, spec.amplitude,
                    work._table)
    c1 = bi_lipschitz_estimate(out, 4.0 * spec.M + 10.0)
    if c1 < MIN_C1:
        raise ValueError(f"injectivity check failed (C1 ~ {c1:.3g})")
    return out


def curve_from_dict(d):
    fam = d.get("family")
    if fam == "straight_line":
        spec = straight_line(d.get("width", 1.0))
    elif fam == "smoothed_corner":
        spec = smoothed_corner(float(d["omega"]), float(d.get("width", 1.0)))
    elif fam == "perturbed_line":
        spec = perturbed_line(float(d["amplitude"]), float(d.get("width", 1.0)))
    else:
        raise ValueError(f"unknown curve family {fam!r}")
    return build_curve(spec)


def bi_lipschitz_estimate(spec, half_length, npts=1500):
    """min |gamma(s)-gamma(t)|/|s-t| on a grid, capped by the asymptotic value."""
    s = np.linspace(-half_length, half_length, npts)
    g = spec.gamma(s)
    d = np.linalg.norm(g[:, None, :] - g[None, :, :], axis=-1)
    ds = np.abs(s[:, None] - s[None, :])
    np.fill_diagonal(ds, 1.0)
    np.fill_diagonal(d, 1.0)
    sampled = float(np.min(d / ds))
    asym = float(np.sin(spec.asymptote_angle() / 2))
    return min(sampled, asym)


# -- grading map u -> s --------------------------------------------------------

@dataclass(frozen=True)
class Grading:
    """s = phi(u) with phi' = 1 - (1-1/REFINE)*plateau(u)."""

    a: float
    beta: float

    def _lc(self, x):
        return np.logaddexp(x, -x) - np.log(2.0)

    def phi(self, u):
        u = np.asarray(u, dtype=float)
        k = (1.0 - 1.0 / REFINE) / 2.0
        return u - k * self.beta * (self._lc((u + self.a) / self.beta)
                                    - self._lc((u - self.a) / self.beta))

    def dphi(self, u):
        u = np.asarray(u, dtype=float)
        k = (1.0 - 1.0 / REFINE) / 2.0
        return 1.0 - k * (np.tanh((u + self.a) / self.beta)
                          - np.tanh((u - self.a) / self.beta))

    def ddphi(self, u):
        u = np.asarray(u, dtype=float)
        k = (1.0 - 1.0 / REFINE) / 2.0
        sp = 1.0 / np.cosh((u + self.a) / self.beta) ** 2
        sm = 1.0 / np.cosh((u - self.a) / self.beta) ** 2
        return -k * (sp - sm) / self.beta

    def inverse(self, s):
        from scipy.optimize import brentq

        def one(x):
            lim = 10 * abs(x) + 10 * self.a + 10
            return brentq(lambda u: float(self.phi(u)) - x, -lim, lim, xtol=1e-14)

        s = np.asarray(s, dtype=float)
        out = np.array([one(float(x)) for x in s.ravel()]).reshape(s.shape)
        return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class SampledCurve:
    spec: CurveSpec
    u: np.ndarray
    h: float
    s: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray
    curvature: np.ndarray
    dphi: np.ndarray
    ddphi: np.ndarray
    weights: np.ndarray
    truncation_halflength: float
    bi_lipschitz_estimate: float
    grading: Grading

    @property
    def n(self):
        return len(self.s)

    def local_mesh_width(self):
        return self.h * self.dphi


def sample_curve(spec, nodes_per_unit, truncation_halflength, refine=True):
    """Nodes uniform in u (step 1/nodes_per_unit), odd count, centred at s = 0."""
    L = float(truncation_halflength)
    if nodes_per_unit <= 0:
        raise ValueError("nodes_per_unit must be positive")
    if L <= spec.M:
        raise ValueError("truncation half-length must exceed M")
    if spec._table is None:
        spec = build_curve(spec)
    if refine:
        grading = Grading(a=REFINE * spec.M, beta=max(spec.M, 0.5))
    else:
        grading = Grading(a=0.0, beta=1.0)
    U = grading.inverse(L)
    h0 = 1.0 / nodes_per_unit
    N = int(np.ceil(U / h0))
    h = U / N
    u = h * np.arange(-N, N + 1)
    s = grading.phi(u)
    pts = spec.gamma(s)
    tan = spec.tangent(s)
    nrm = np.stack([tan[:, 1], -tan[:, 0]], axis=-1)
    dphi = grading.dphi(u)
    c1 = bi_lipschitz_estimate(spec, min(L, 4 * spec.M + 10.0))
    return SampledCurve(spec, u, h, s, pts, tan, nrm, spec.curvature(s), dphi,
                        grading.ddphi(u), h * dphi, L, c1, grading)

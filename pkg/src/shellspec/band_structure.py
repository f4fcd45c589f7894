"""Essential spectrum in closed form and the straight-line Fourier symbols.

The gap part of the spectrum in the generic regime is the closure of
{z_+-(k) : (d - 4c^2)((eta/c^2) z_+-(k) + lam k + tau m) > 0} inside the
free gap. Both z_+- and the admissibility function are algebraic in k, so
all breakpoints (critical points of z_+-, sign changes of the admissibility
function) are roots of quadratics. Between breakpoints z_+- is monotone and
the admissible image is the open interval between the endpoint values.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dirac_core import InteractionParams, REL_TOL, is_critical

INF = math.inf

REGIME_LINE = "d_eq_4c2_lambda_nonzero"
REGIME_POINT = "d_eq_4c2_lambda_zero"
REGIME_GENERIC = "generic"


@dataclass
class SpectrumReport:
    bands: list
    isolated_points: list
    regime: str
    critical: bool
    gap_edge: float
    gap_complement: list = field(default_factory=list)

    def contains(self, z, tol=0.0):
        for a, b in self.bands:
            if a - tol <= z <= b + tol:
                return True
        return any(abs(z - p) <= tol for p in self.isolated_points)

    def gap_bands(self):
        """Bands intersected with the open free gap."""
        e = self.gap_edge
        out = []
        for a, b in self.bands:
            lo, hi = max(a, -e), min(b, e)
            if lo < hi or (lo == hi and -e < lo < e):
                out.append((lo, hi))
        return out

    def endpoints(self):
        """Finite band endpoints, sorted."""
        return sorted({x for b in self.bands for x in b if math.isfinite(x)})

    def to_dict(self):
        return {"bands": [[a, b] for a, b in self.bands],
                "points": list(self.isolated_points),
                "regime": self.regime, "critical": self.critical,
                "gap_complement": [[a, b] for a, b in self.gap_complement]}

    def to_json(self, **kw):
        # inf is written as Infinity (python json), which json.loads reads back
        return json.dumps(self.to_dict(), **kw)


def _rel_eq(a, b, scale):
    return abs(a - b) <= REL_TOL * max(abs(scale), 1e-300)


def _d_is_4c2(p):
    return _rel_eq(p.d, 4 * p.c ** 2, max(4 * p.c ** 2, p.eta ** 2 + p.tau ** 2 + p.lam ** 2))


# -- z_pm ---------------------------------------------------------------------------

def _zpm_coeffs(p):
    c, m, d = p.c, p.mass, p.d
    A = abs(d / (4 * c ** 2) - 1)
    D = p.eta ** 2 / c ** 2 + (d / (4 * c ** 2) - 1) ** 2
    w = d / 4 + c ** 2
    alpha = p.tau ** 2 * c ** 2 + w ** 2
    beta = p.lam * p.tau * m * c ** 2
    gamma = (p.lam ** 2 * c ** 2 + w ** 2) * m ** 2
    return A, D, alpha, beta, gamma


def z_pm(k, sign, params):
    """The two branches z_+(k), z_-(k); sign is +1 or -1."""
    p = params
    if _d_is_4c2(p):
        raise ValueError("z_pm needs d != 4c^2")
    A, D, alpha, beta, gamma = _zpm_coeffs(p)
    k = np.asarray(k, dtype=float)
    Q = np.maximum(alpha * k ** 2 - 2 * beta * k + gamma, 0.0)
    out = (-p.eta * (p.lam * k + p.tau * p.mass) + np.sign(sign) * A * np.sqrt(Q)) / D
    return out[()] if out.ndim == 0 else out


def _admissible(k, sign, p):
    z = z_pm(k, sign, p)
    return (p.d - 4 * p.c ** 2) * (p.eta / p.c ** 2 * z + p.lam * k + p.tau * p.mass)


def _quad_roots(a, b, c):
    """Real roots of a k^2 + b k + c (degenerate cases included)."""
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0:
        return []
    a, b, c = a / scale, b / scale, c / scale
    if abs(a) < 1e-14:
        return [] if abs(b) < 1e-14 else [-c / b]
    disc = b * b - 4 * a * c
    if disc < 0:
        if disc > -1e-12:
            return [-b / (2 * a)]
        return []
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    roots = [q / a]
    if q != 0:
        roots.append(c / q)
    return roots


def _breakpoints(p):
    A, D, alpha, beta, gamma = _zpm_coeffs(p)
    eta, lam, tau, m, c = p.eta, p.lam, p.tau, p.mass, p.c
    ks = []
    # z' = 0  <=>  A (alpha k - beta) = +-eta lam sqrt(Q); square it
    ks += _quad_roots(A * A * alpha * alpha - (eta * lam) ** 2 * alpha,
                      -2 * A * A * alpha * beta + 2 * (eta * lam) ** 2 * beta,
                      A * A * beta * beta - (eta * lam) ** 2 * gamma)
    # admissibility = 0  <=>  (eta/c^2) A sqrt(Q)/D = -+(lam k + tau m)(1 - eta^2/(c^2 D))
    r = 1 - eta ** 2 / (c ** 2 * D)
    s2 = (eta * A / (c ** 2 * D)) ** 2
    ks += _quad_roots(s2 * alpha - (lam * r) ** 2,
                      -2 * s2 * beta - 2 * lam * tau * m * r * r,
                      s2 * gamma - (tau * m * r) ** 2)
    # Q = 0 (sqrt kink) for completeness
    ks += _quad_roots(alpha, -2 * beta, gamma)
    return ks


def _limit(sign, p, direction):
    """lim z_pm(k) as k -> direction*inf (may be +-inf)."""
    A, D, alpha, beta, gamma = _zpm_coeffs(p)
    s = np.sign(sign) * A
    # z ~ |k| (-eta lam direction + s sqrt(alpha)) / D
    slope = -p.eta * p.lam * direction + s * math.sqrt(alpha)
    lin_scale = abs(p.eta * p.lam) + abs(s) * math.sqrt(alpha) + 1e-300
    if abs(slope) > 1e-12 * lin_scale:
        return math.copysign(INF, slope / D)
    # the k terms cancel; sqrt(Q) ~ sqrt(alpha)|k| - direction*beta/sqrt(alpha)
    if alpha == 0:
        return (-p.eta * p.tau * p.mass + s * math.sqrt(gamma)) / D
    return (-p.eta * p.tau * p.mass - s * direction * beta / math.sqrt(alpha)) / D


def _gap_images(p, extra_grid=64):
    """Open intervals (lo, hi) whose union is the admissible image of z_pm."""
    scale = max(1.0, abs(p.mass) * p.c)
    bps = [k for k in _breakpoints(p) if math.isfinite(k)]
    grid = list(scale * np.sinh(np.linspace(-6, 6, extra_grid)))
    ks = np.unique(np.array(bps + grid, dtype=float))
    pieces = []
    for sign in (1, -1):
        # finite pieces
        for a, b in zip(ks[:-1], ks[1:]):
            if b - a <= 0:
                continue
            mid = 0.5 * (a + b)
            if _admissible(mid, sign, p) > 0:
                za, zb = z_pm(a, sign, p), z_pm(b, sign, p)
                pieces.append((min(za, zb), max(za, zb)))
        # the two tails
        for direction, k0 in ((-1, ks[0]), (1, ks[-1])):
            probe = k0 + direction * max(1.0, abs(k0))
            if _admissible(probe, sign, p) > 0:
                z0 = z_pm(k0, sign, p)
                zl = _limit(sign, p, direction)
                pieces.append((min(z0, zl), max(z0, zl)))
    return pieces


def _merge(intervals):
    """Union of closed intervals, sorted and merged."""
    iv = sorted((float(a), float(b)) for a, b in intervals if a <= b)
    out = []
    for a, b in iv:
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def _complement_in_gap(bands, points, e):
    gaps = []
    lo = -e
    for a, b in bands:
        if b <= -e or a >= e:
            continue
        if a > lo:
            gaps.append((lo, a))
        lo = max(lo, b)
    if lo < e:
        gaps.append((lo, e))
    # isolated points split the open gaps
    out = []
    for a, b in gaps:
        cuts = sorted(q for q in points if a < q < b)
        edges = [a] + cuts + [b]
        out += [(x, y) for x, y in zip(edges[:-1], edges[1:])]
    return out


def essential_spectrum(params):
    p = params
    e = p.gap_edge
    crit = is_critical(p)
    free = [(-INF, -e), (e, INF)]
    if _d_is_4c2(p):
        if p.lam != 0 and not _rel_eq(p.lam, 0.0, p.c):
            return SpectrumReport([(-INF, INF)], [], REGIME_LINE, crit, e, [])
        assert p.eta != 0
        z0 = -p.tau / p.eta * p.mass * p.c ** 2 + 0.0     # no -0.0 in the output
        bands = _merge(free)
        pts = [z0] if -e < z0 < e else []
        return SpectrumReport(bands, pts, REGIME_POINT, crit, e,
                              _complement_in_gap(bands, pts, e))
    pieces = []
    for lo, hi in _gap_images(p):
        lo, hi = max(lo, -e), min(hi, e)
        if lo < hi:
            pieces.append((lo, hi))
    bands = _merge(free + pieces)
    return SpectrumReport(bands, [], REGIME_GENERIC, crit, e,
                          _complement_in_gap(bands, [], e))


# -- straight-line symbols ------------------------------------------------------------

def line_symbol(p_, z, params):
    """c_z(p), the Fourier symbol of C_z on the straight line."""
    c, m = params.c, params.mass
    rad = complex(p_ ** 2 * c ** 2 + (m * c ** 2) ** 2 - z ** 2)
    if rad.imag == 0 and rad.real <= 0:
        raise ValueError("radicand on the branch cut")
    pref = 1.0 / (2 * np.sqrt(rad))
    return pref * np.array([[z / c + m * c, p_], [p_, z / c - m * c]], dtype=complex)


def mu_pm(p_, sign, params):
    """Eigenvalues of theta_1(p); complex when the radicand is negative."""
    q = params
    c, m = q.c, q.mass
    w = np.sqrt(p_ ** 2 + (m * c) ** 2)
    rad = q.eta ** 2 - q.d + 4 * p_ ** 2 * c ** 2 / w ** 2 + 4 * p_ * c * q.lam / w
    root = np.sqrt(complex(rad))
    return np.sqrt(p_ ** 2 + 1) * (q.eta + np.sign(sign) * root)


def mu_boundedness(params):
    """(bounded_on_R+, bounded_on_R-): is one of mu_pm bounded at p -> +inf / -inf.

    mu_- (eta >= 0) or mu_+ (eta <= 0) stays bounded at p -> +-inf exactly
    when eta^2 = eta^2 - d + 4c^2 +- 4 lam c.
    """
    q = params
    c = q.c
    scale = max(q.eta ** 2 + q.tau ** 2 + q.lam ** 2, c ** 2)
    plus = _rel_eq(q.eta ** 2, q.tau ** 2 + (q.lam + 2 * c) ** 2, scale)
    minus = _rel_eq(q.eta ** 2, q.tau ** 2 + (q.lam - 2 * c) ** 2, scale)
    return plus, minus


def line_bs_distance(z, params, p_max=None, samples=4001):
    """min over p of |mu + 1|, mu an eigenvalue of theta c_z(p) on the straight line.

    The line's BS operator is a Fourier multiplier, so this is the exact
    distance from -1 to its spectrum (up to the p sampling, refined locally).
    Normal nu = (0, -1) for the tangent (1, 0).
    """
    from scipy.optimize import minimize_scalar
    from .dirac_core import interaction_matrix
    th = interaction_matrix(params, np.array([0.0, -1.0]))
    scale = abs(params.mass) * params.c + abs(z) / params.c + 1.0
    if p_max is None:
        p_max = 200.0 * scale
    # sinh grid: dense near 0, reaches p_max
    t = np.linspace(-1.0, 1.0, samples)
    ps = np.sinh(t * np.arcsinh(p_max / scale)) * scale

    def f(p_):
        return float(np.min(np.abs(np.linalg.eigvals(th @ line_symbol(p_, z, params)) + 1)))

    vals = np.array([f(x) for x in ps])
    i = int(np.argmin(vals))
    a, b = ps[max(i - 1, 0)], ps[min(i + 1, len(ps) - 1)]
    if a < b:
        opt = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": 1e-12 * scale})
        return min(vals[i], float(opt.fun))
    return float(vals[i])

"""Variational certificate for bound states of the Lorentz-scalar shell (0, tau, 0)
on a corner with half-angle omega, plus a numerical cross-check.

The certificate is a closed-form bracket: a trial subspace of N functions
supported in [L, 2L] x R has Rayleigh quotients below the essential gap edge
whenever bracket < 0.
"""

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .curve_geometry import build_curve, sample_curve, smoothed_corner


def gap_edge(tau, m, c):
    """Edge of the essential spectrum for (0, tau, 0): |m| c^2 |4c^2 - tau^2| / (4c^2 + tau^2)."""
    return abs(m) * c ** 2 * abs(4 * c ** 2 - tau ** 2) / (4 * c ** 2 + tau ** 2)


def _check(tau, m, c, N):
    if not tau < 0:
        raise ValueError("tau must be negative")
    if not (m > 0 and c > 0):
        raise ValueError("m and c must be positive")
    if abs(4 * c ** 2 - tau ** 2) <= 1e-12 * 4 * c ** 2:
        raise ValueError("tau = -2c makes the bracket singular")
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")


@dataclass(frozen=True)
class CertificateInput:
    tau: float
    m: float = 1.0
    c: float = 1.0
    N: int = 1
    L: float = 20.0
    omega: float = 0.001
    L0: float = 2.0

    def __post_init__(self):
        _check(self.tau, self.m, self.c, self.N)
        if not 0 < self.omega < math.pi / 2:
            raise ValueError("omega must lie in (0, pi/2)")
        if not self.L > self.L0:
            raise ValueError("L must exceed L0")

    @property
    def r(self):
        return self.L * math.tan(self.omega)

    @property
    def gamma(self):
        return -4 * self.m * self.c ** 2 * self.tau / (4 * self.c ** 2 + self.tau ** 2)


@dataclass
class CertificateResult:
    bracket_value: float
    certified: bool
    essential_gap_edge: float
    suggested_omega_star: object = None
    L: float = None

    def to_dict(self):
        return {"L": self.L, "omega_star": self.suggested_omega_star,
                "bracket": self.bracket_value, "certified": self.certified,
                "gap_edge": self.essential_gap_edge}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def bracket_terms(tau, m, c, N, L, omega):
    """(tan-term, linear term, 1/L term); the bracket is their sum."""
    p, q = 4 * c ** 2 + tau ** 2, 4 * c ** 2 - tau ** 2
    big = p ** 2 + 16 * c ** 2 * tau ** 2
    first = math.tan(omega) * (3 + big / q ** 2) * (2 * N ** 2 * math.pi ** 2 + m ** 2 * c ** 2 * L ** 2)
    second = 4 * m * c ** 2 * L * tau / p
    third = -N ** 2 * math.pi ** 2 * big * p / (2 * m * c ** 2 * L * tau * q ** 2)
    return first, second, third


def bracket(inp):
    return float(sum(bracket_terms(inp.tau, inp.m, inp.c, inp.N, inp.L, inp.omega)))


def certify(inp):
    b = bracket(inp)
    return CertificateResult(b, b < 0, gap_edge(inp.tau, inp.m, inp.c), None, inp.L)


def omega_star_at(tau, m, c, N, L, tol=1e-6):
    """Largest omega (to tol) with bracket < 0 at this L, or None."""
    _, s2, s3 = bracket_terms(tau, m, c, N, L, 0.0)
    if s2 + s3 >= 0:
        return None
    lo, hi = 0.0, math.pi / 2 - 1e-12
    f = lambda w: sum(bracket_terms(tau, m, c, N, L, w))
    if f(hi) < 0:                           # cannot happen, tan blows up
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return lo if lo > 0 else None


def find_omega_star(tau, m=1.0, c=1.0, N=1, L0=2.0, L_max=1e4, n_grid=40, tol=1e-6):
    """(L, omega_star) maximising the certifiable angle over a log grid in L."""
    _check(tau, m, c, N)
    Ls = np.logspace(math.log10(L0 + 1), math.log10(L_max), n_grid)
    best = (None, None)
    any_neg = False
    for L in Ls:
        _, s2, s3 = bracket_terms(tau, m, c, N, L, 0.0)
        any_neg |= s2 + s3 < 0
        w = omega_star_at(tau, m, c, N, float(L), tol)
        if w is not None and (best[1] is None or w > best[1]):
            best = (float(L), w)
    # for tau < 0 the linear term wins at large L
    assert any_neg, "no L on the grid makes the omega-free part negative"
    return best


# -- numerical cross-check ---------------------------------------------------------

@dataclass
class CrossValidation:
    status: str             # "confirmed", "not_found" or "unresolved"
    roots: list
    window: tuple
    resolution_ratio: float
    note: str = ""

    def to_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def resolution_ratio(curve):
    """max mesh width over the smallest arm separation near the corner (~ 2 M sin omega)."""
    sep = 2 * curve.spec.M * curve.bi_lipschitz_estimate
    return float(np.max(curve.local_mesh_width()) / sep)


def cross_validate(inp, curve=None, nodes_per_unit=6.0, L=None, steps=60, margin=1e-3,
                   tol=1e-8, workers=1, force=False):
    """BS scan for (0, tau, 0) on the smoothed corner with the input's omega."""
    from .boundary_integral import bs_eigenvalue_scan, default_curve_for
    from .dirac_core import InteractionParams

    params = InteractionParams(0.0, inp.tau, 0.0, inp.m, inp.c)
    edge = gap_edge(inp.tau, inp.m, inp.c)
    window = (-edge * (1 - margin), edge * (1 - margin))
    if curve is None:
        spec = build_curve(smoothed_corner(inp.omega, 1.0))
        curve = default_curve_for(spec, params, window, nodes_per_unit, tol, L)
    ratio = resolution_ratio(curve)
    if ratio > 1 and not force:
        return CrossValidation("unresolved", [], window, ratio,
                               "arms closer than one mesh width; refine the mesh or pass force=True")
    res = bs_eigenvalue_scan(curve, params, window, steps=steps, tol=tol, workers=workers)
    roots = res.roots()
    status = "confirmed" if len(roots) >= inp.N else "not_found"
    note = "" if status == "confirmed" else f"found {len(roots)} < N = {inp.N}"
    return CrossValidation(status, roots, window, ratio, note)

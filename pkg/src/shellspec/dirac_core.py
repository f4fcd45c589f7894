"""Couplings, Pauli matrices and the free Dirac Green function in 2D."""

from dataclasses import dataclass, replace

import numpy as np

from .special_functions import bessel_k, sqrt_branch

REL_TOL = 1e-12

SIGMA0 = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA0, SIGMA1, SIGMA2, SIGMA3)

for _m in PAULI:
    _m.setflags(write=False)


def sigma_dot(x):
    """sigma.x for a single vector (shape (2,)) or a stack (shape (..., 2))."""
    x = np.asarray(x)
    return x[..., 0, None, None] * SIGMA1 + x[..., 1, None, None] * SIGMA2


@dataclass(frozen=True)
class InteractionParams:
    eta: float
    tau: float
    lam: float
    mass: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for name in ("eta", "tau", "lam", "mass", "c"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite")
        if self.c <= 0:
            raise ValueError("light speed c must be positive")

    @property
    def d(self):
        return self.eta ** 2 - self.tau ** 2 - self.lam ** 2

    @property
    def gap_edge(self):
        """|m| c^2, the edge of the free gap."""
        return abs(self.mass) * self.c ** 2

    def with_(self, **kw):
        return replace(self, **kw)

    def to_dict(self):
        return {"eta": self.eta, "tau": self.tau, "lambda": self.lam,
                "mass": self.mass, "c": self.c}

    @classmethod
    def from_dict(cls, d):
        lam = d.get("lambda", d.get("lam", 0.0))
        return cls(float(d.get("eta", 0.0)), float(d.get("tau", 0.0)), float(lam),
                   float(d.get("mass", d.get("m", 1.0))), float(d.get("c", 1.0)))


# -- coupling matrices -----------------------------------------------------------

def coupling_F(params):
    p = params
    return np.array([[p.eta + p.tau, p.lam], [p.lam, p.eta - p.tau]], dtype=complex)


def coupling_V(tangent):
    """diag(1, conj t) with t = t1 + i t2; tangent may be a stack."""
    t = np.asarray(tangent, dtype=float)
    tc = t[..., 0] - 1j * t[..., 1]
    V = np.zeros(t.shape[:-1] + (2, 2), dtype=complex)
    V[..., 0, 0] = 1.0
    V[..., 1, 1] = tc
    return V


def interaction_matrix(params, normal):
    """eta s0 + tau s3 + i lam (s.nu) s3 at one node or a stack of normals."""
    p = params
    sn = sigma_dot(normal)
    return p.eta * SIGMA0 + p.tau * SIGMA3 + 1j * p.lam * (sn @ SIGMA3)


# -- resolvent kernel --------------------------------------------------------------

def _in_free_spectrum(z, params):
    z = np.asarray(z, dtype=complex)
    e = params.gap_edge
    return (z.imag == 0) & (np.abs(z.real) >= e)


def zeta(z, params):
    """zeta(z) = -i sqrt(z^2/c^2 - (mc)^2); Re zeta > 0 off the free spectrum."""
    if np.any(_in_free_spectrum(z, params)):
        raise ValueError(f"z={z} lies in the free essential spectrum")
    c, m = params.c, params.mass
    z = np.asarray(z, dtype=complex)
    out = -1j * sqrt_branch(z ** 2 / c ** 2 - (m * c) ** 2)
    return out[()] if np.ndim(out) == 0 else out


def green_kernel(z, x, params):
    """G_z(x) for x != 0. x can be (2,) or (..., 2); returns (..., 2, 2)."""
    x = np.asarray(x, dtype=float)
    r = np.hypot(x[..., 0], x[..., 1])
    if np.any(r == 0):
        raise ValueError("green kernel is singular at x = 0")
    c, m = params.c, params.mass
    zt = complex(zeta(z, params))
    root = 1j * zt              # = sqrt_branch(z^2/c^2 - (mc)^2)
    k0 = np.asarray(bessel_k(0, zt * r))
    k1 = np.asarray(bessel_k(1, zt * r))
    xh = x / r[..., None]
    G = np.asarray(root * k1 / (2 * np.pi * c))[..., None, None] * sigma_dot(xh)
    G = G + (k0 / (2 * np.pi * c))[..., None, None] * ((z / c) * SIGMA0 + m * c * SIGMA3)
    return G


# -- predicates --------------------------------------------------------------------

def _close(a, b, scale):
    return abs(a - b) <= REL_TOL * max(scale, 1e-300)


def is_confined(params):
    p = params
    target = -4 * p.c ** 2
    scale = max(abs(target), p.eta ** 2 + p.tau ** 2 + p.lam ** 2)
    return _close(p.d, target, scale)


def is_critical(params):
    p = params
    lhs = (p.d / 4 - p.c ** 2) ** 2
    rhs = p.lam ** 2 * p.c ** 2
    scale = max(lhs, rhs, ((p.eta ** 2 + p.tau ** 2 + p.lam ** 2) / 4 + p.c ** 2) ** 2)
    return _close(lhs, rhs, scale)


def isospectral_partners(params):
    """Return (partner_i, partner_ii, flips_sign).

    partner_i = -4c^2 (eta, tau, lam)/d has the same spectrum (the factor c^2
    is what keeps the bands invariant for c != 1); partner_ii =
    (-eta, tau, -lam) has the negated spectrum. partner_i is None for d = 0.
    """
    p = params
    d = p.d
    scale = p.eta ** 2 + p.tau ** 2 + p.lam ** 2
    if abs(d) <= REL_TOL * scale or d == 0:
        first = None
    else:
        f = -4 * p.c ** 2 / d
        first = p.with_(eta=f * p.eta, tau=f * p.tau, lam=f * p.lam)
    second = p.with_(eta=-p.eta, lam=-p.lam)
    return first, second, True

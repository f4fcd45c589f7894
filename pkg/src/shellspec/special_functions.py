"""Complex square root branch and modified Bessel functions K0, K1.

Values of K0/K1 come from scipy (AMOS).  The explicit power series is only
used to expose the singular/smooth split that the quadrature relies on:

    K0(xi) = -log(xi) + g3(xi)
    K1(xi) = 1/xi + xi*g4(xi^2)*log(xi) + xi*g5(xi^2)
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

EULER_GAMMA = float(np.euler_gamma)
LOG2 = float(np.log(2.0))

_NTERMS = 60


def sqrt_branch(w):
    """Square root with Im(r) > 0 off [0, inf) and r >= 0 on [0, inf)."""
    w = np.asarray(w, dtype=complex)
    r = np.sqrt(w)
    # numpy's principal root has Re >= 0; rotate so that Im >= 0 instead
    flip = (r.imag < 0) | ((r.imag == 0) & (r.real < 0))
    r = np.where(flip, -r, r)
    # on the positive real axis keep the nonnegative root
    pos = (w.imag == 0) & (w.real >= 0)
    r = np.where(pos, np.sqrt(np.abs(w.real)) + 0j, r)
    return r[()] if r.ndim == 0 else r


def _check_nonzero(xi):
    if np.any(np.asarray(xi) == 0):
        raise ValueError("Bessel K is singular at xi = 0")


def bessel_k(order, xi):
    """K_order(xi) for order 0 or 1, principal branch (|arg xi| < pi)."""
    if order not in (0, 1):
        raise ValueError("only orders 0 and 1 are supported")
    xi = np.asarray(xi)
    _check_nonzero(xi)
    if np.isrealobj(xi) or np.all(np.imag(xi) == 0):
        x = np.real(xi).astype(float)
        if np.all(x > 0):
            out = special.k0(x) if order == 0 else special.k1(x)
            return out[()] if out.ndim == 0 else out
    out = special.kv(order, xi.astype(complex))
    return out[()] if np.ndim(out) == 0 else out


# -- power series pieces ---------------------------------------------------

def _harmonic(n):
    h = np.zeros(n)
    h[1:] = np.cumsum(1.0 / np.arange(1, n))
    return h


_H = _harmonic(_NTERMS + 2)
_K = np.arange(_NTERMS)
_FACT2 = np.exp(-2.0 * special.gammaln(_K + 1.0))            # 1/(k!)^2
_FACT11 = np.exp(-special.gammaln(_K + 1.0) - special.gammaln(_K + 2.0))


def _series(coeffs, q):
    q = np.asarray(q, dtype=complex)
    out = np.zeros_like(q)
    for c in coeffs[::-1]:
        out = out * q + c
    return out


def i0_series(xi):
    q = np.asarray(xi, dtype=complex) ** 2 / 4
    return _series(_FACT2, q)


def i1_series(xi):
    xi = np.asarray(xi, dtype=complex)
    return xi / 2 * _series(_FACT11, xi ** 2 / 4)


def g3(xi):
    """Smooth part of K0: K0 = -log xi + g3."""
    xi = np.asarray(xi, dtype=complex)
    q = xi ** 2 / 4
    i0 = _series(_FACT2, q)
    tail = _series(_H[:_NTERMS] * _FACT2, q)   # sum H_k q^k/(k!)^2, H_0 = 0
    return (LOG2 - EULER_GAMMA) * i0 + tail - np.log(xi) * (i0 - 1)


def xi_g4(xi):
    """xi*g4(xi^2), the coefficient of log xi in K1 (equals I1)."""
    return i1_series(xi)


def xi_g5(xi):
    """xi*g5(xi^2), the analytic remainder of K1."""
    xi = np.asarray(xi, dtype=complex)
    q = xi ** 2 / 4
    psi_sum = (_H[:_NTERMS] - EULER_GAMMA) + (_H[1:_NTERMS + 1] - EULER_GAMMA)
    return -LOG2 * i1_series(xi) - xi / 4 * _series(psi_sum * _FACT11, q)


def _k1_remainder(xi):
    xi = np.asarray(xi, dtype=complex)
    return xi_g4(xi) * np.log(xi) + xi_g5(xi)


@dataclass(frozen=True)
class BesselSplit:
    """K_order(xi) = pole/xi - log_coefficient*log(xi) + smooth_remainder(xi)."""

    order: int
    log_coefficient: complex
    pole_coefficient: complex
    smooth_remainder: Callable

    def singular(self, xi):
        xi = np.asarray(xi, dtype=complex)
        return self.pole_coefficient / xi - self.log_coefficient * np.log(xi)

    def __call__(self, xi):
        return self.singular(xi) + self.smooth_remainder(xi)


def bessel_split(order):
    if order == 0:
        return BesselSplit(0, 1.0 + 0j, 0j, g3)
    if order == 1:
        return BesselSplit(1, 0j, 1.0 + 0j, _k1_remainder)
    raise ValueError("only orders 0 and 1 are supported")


def bessel_k_integral(order, xi, tmax=None, dps=30, pieces=32):
    """Reference value from K_j(xi) = int_0^inf exp(-xi cosh t) cosh(j t) dt.

    Slow (mpmath); meant for checking, Re(xi) > 0 required.
    """
    import mpmath as mp
    xi_c = complex(xi)
    if xi_c.real <= 0:
        raise ValueError("integral representation needs Re(xi) > 0")
    with mp.workdps(dps):
        z = mp.mpc(xi_c.real, xi_c.imag)
        if tmax is None:
            # exp(-Re(xi) cosh t) below 1e-40 beyond this point
            tmax = float(mp.acosh(max(2.0, 95.0 / xi_c.real)))
        f = lambda t: mp.exp(-z * mp.cosh(t)) * mp.cosh(order * t)
        pts = np.linspace(0.0, tmax, pieces + 1)
        val = mp.quad(f, list(pts))
    return complex(val)

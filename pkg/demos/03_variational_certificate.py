"""Closed-form certificate for bound states of the Lorentz scalar shell.

Evaluates the bracket term by term, finds the widest certifiable angle,
and shows how it shrinks when more eigenvalues are asked for.
"""

from shellspec.bound_state_certifier import (CertificateInput, bracket_terms, certify,
                                             find_omega_star)

for w in (0.001, 0.01):
    f, s, t = bracket_terms(-1.0, 1.0, 1.0, 1, 20.0, w)
    r = certify(CertificateInput(-1.0, 1.0, 1.0, 1, 20.0, w))
    print(f"omega = {w}: terms {f:.3f} {s:.3f} {t:.3f} -> {r.bracket_value:.3f}, certified {r.certified}")

for N in (1, 2, 3):
    L, w = find_omega_star(-1.0, 1.0, 1.0, N)
    print(f"N = {N}: omega_star = {w:.2e} at L = {L:.1f}")

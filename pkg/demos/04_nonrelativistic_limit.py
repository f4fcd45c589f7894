"""Dirac eigenvalues approach the Schrodinger ones as c grows.

For coupling (eta/2, eta/2, 0) the shifted Dirac eigenvalue E_D(c) - mc^2
is compared with the Schrodinger eigenvalue of -Delta/2m + eta delta on a
corner; the error falls off like 1/c^2 here.
"""

import math

from shellspec import build_curve, sample_curve, smoothed_corner
from shellspec.schrodinger_reference import kernel_limit_deviation, nonrel_limit_experiment

cv = sample_curve(build_curve(smoothed_corner(math.pi / 6)), 6, 25)
fit = nonrel_limit_experiment(cv, 1.0, -1.0, [4, 8, 16, 32], bracket=(-0.8, -0.50001))
print(f"Schrodinger eigenvalue {fit.E_S:.8f}")
for c, e, err in zip(fit.c, fit.E_D, fit.err):
    print(f"  c = {c:>2}: E_D - mc^2 = {e:.8f}   error {err:.2e}")
print(f"log-log slope {fit.slope:.3f}")

print("\nkernel deviations at z = -1:")
for c in (8, 16, 32):
    d = kernel_limit_deviation(cv, 1.0, -1.0, c)
    print(f"  c = {c:>2}: C {d['C']:.3e}   Phi {d['Phi']:.3e}")

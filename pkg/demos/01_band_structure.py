"""Essential spectrum of the delta-shell Dirac operator, closed form.

Walks through the electrostatic family eta*delta: as eta crosses 2c a band
inside the gap shrinks to the single point 0 and reopens on the other side.
"""

from shellspec import InteractionParams, essential_spectrum

print("electrostatic coupling (eta, 0, 0), m = c = 1")
for eta in (0.5, 1.0, 1.9, 1.999, 2.0, 2.001, 3.0):
    rep = essential_spectrum(InteractionParams(eta, 0, 0))
    print(f"  eta = {eta:<6} gap bands {rep.gap_bands()}  points {rep.isolated_points}")

print("\nLorentz scalar (0, tau, 0): free for tau > 0, gap edge |4 - tau^2|/(4 + tau^2) for tau < 0")
for tau in (1.0, -0.5, -1.0, -3.0):
    rep = essential_spectrum(InteractionParams(0, tau, 0))
    print(f"  tau = {tau:<5} spectrum {rep.bands}")

print("\nthe same report as JSON:")
print(essential_spectrum(InteractionParams(2.0, 0, 0)).to_json())

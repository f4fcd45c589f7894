"""A straight shell has no bound states; bending it creates one.

Scans the Birman-Schwinger condition -1 in sigma(theta C_z) over the gap,
first on a straight line, then on a smoothed corner, and writes the
eigenfunction |u|^2 on a small planar grid to corner_field.csv.
Takes a minute or two.
"""

import numpy as np

from shellspec import InteractionParams, build_curve, smoothed_corner, straight_line
from shellspec.boundary_integral import (assemble_cz, bs_eigenvalue_scan, default_curve_for,
                                         field_csv, reconstruct_eigenfunction)

p = InteractionParams(0.0, -1.0, 0.0)            # gap is (-3/5, 3/5)
window = (-0.59, 0.59)

line = default_curve_for(build_curve(straight_line()), p, window, nodes_per_unit=4)
res = bs_eigenvalue_scan(line, p, window, steps=30)
print(f"straight line: roots {res.roots()}, min |mu+1| = {res.min_residual:.3f}")

corner = default_curve_for(build_curve(smoothed_corner(0.3)), p, window, nodes_per_unit=6)
res = bs_eigenvalue_scan(corner, p, window, steps=30)
for e in res.eigenvalues:
    print(f"corner: z* = {e.z:.6f}  residual {e.residual:.1e}")

z = res.eigenvalues[-1].z
asm = assemble_cz(corner, p, z)
xs, ys = np.meshgrid(np.linspace(-4, 12, 33), np.linspace(-6, 6, 25))
grid = np.stack([xs.ravel(), ys.ravel()], 1)
from shellspec.boundary_integral import distance_to_curve
grid = grid[distance_to_curve(corner, grid) > 0.3]
u = reconstruct_eigenfunction(asm, res.densities[-1], grid)
with open("corner_field.csv", "w", newline="") as fh:
    fh.write(field_csv(grid, u))
print(f"wrote {len(grid)} field samples to corner_field.csv")

"""Transition cost of a unit jump.

For a homogeneous surface coefficient the normalised minimum of the
penalised surface cell problem approaches c_p = 2 (p-1)^((1-p)/p) as the
transition length shrinks relative to the cell (c_2 = 2).  This script runs
the penalty ladder at a moderate eps/rho ratio and compares the top rung and
its Richardson extrapolation against c_p and against twice the 1D optimal
profile value (the jump cuts the cell once, and each half line contributes
one profile).
"""

import numpy as np

from pfhom import (
    Homogeneous,
    PsiFunction,
    SurfaceIntegrand,
    profile_1d_value,
    surface_cell_value,
)

rho = 1.0
eps = 2.0**-5
g = SurfaceIntegrand(Homogeneous(1.0))
psi = PsiFunction(q=2.0)

result = surface_cell_value(g, None, psi, (0, 1), (0, 0), rho, eps, eps / 4.0)

print(f"penalty ladder at rho = {rho:g}, eps = {eps:g}, h = eps/4")
print(f"{'lambda':>8} {'surface':>10} {'residual':>10} {'iters':>6}")
for rung in result.ladder:
    print(f"{rung.lam:8.0f} {rung.value:10.5f} {rung.residual:10.2e} "
          f"{rung.iterations:6d}")

oracle = 2.0 * profile_1d_value(2.0, rho / (2.0 * eps), 2000)
print()
print(f"top rung (normalised)      {result.normalised:.5f}")
print(f"ladder extrapolation       {result.extrapolated:.5f}")
print(f"1D profile oracle          {oracle:.5f}")
print(f"continuum constant c_2     2.00000")

# the same constant for p = 3
c3 = 2.0 * 2.0 ** (-2.0 / 3.0)
print(f"\np = 3: c_3 = {c3:.5f} "
      f"(profile oracle {2 * profile_1d_value(3.0, 16.0, 2000):.5f})")

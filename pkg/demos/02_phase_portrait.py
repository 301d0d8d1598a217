"""Follow the quantum phase across the turning point and into the tail.

At an eigenvalue the phase sigma(x) runs from (n+1) pi/2 at the origin to
(n+1) pi at infinity.  The primitive semiclassical phase S(x) + pi/4 can
only accumulate inside the classically allowed region; it saturates at
the turning point t2.  The quantum phase keeps growing well past t2: for
the quartic ground state almost a quarter of the total phase arrives in
the classically forbidden region.  The uniform Airy-carrier phase has no
turning-point pathology and tracks the quantum curve everywhere, at the
price of a small global offset (the same offset that misplaces the
first-order eigenvalue).
"""

import math

import numpy as np

from oscphase import (
    SymmetricPotential,
    airy_uniform_phase,
    bc_series,
    eigenvalue,
    qlm_solve,
    solution_grid,
    total_phase,
    trial_airy,
    turning_point,
)
from oscphase.model import action_to_turning, total_action

quartic = SymmetricPotential({4: 0.5})
E = eigenvalue(quartic, 0)
t2 = turning_point(quartic, E).t2

grid = solution_grid(quartic, E)
sol = qlm_solve(quartic, E, trial_airy(quartic, E, grid), bc_series(quartic, E, 6))
uniform = airy_uniform_phase(quartic, E, grid)

S_total = total_action(quartic, E)
print(f"quartic ground state: E = {E:.10f}, turning point t2 = {t2:.4f}")
print(f"converged in {sol.iterations} linear sweeps\n")

print("      x/t2    sigma      uniform    S + pi/4")
for frac in (0.0, 0.5, 1.0, 1.5, 2.0):
    x = frac * t2
    i = int(np.searchsorted(grid, x))
    primitive = (S_total - action_to_turning(quartic, E, x) + math.pi / 4
                 if x <= t2 else math.nan)
    print(f"  {frac:8.1f} {sol.sigma[i]:10.4f} {uniform.sigma_sc[i]:10.4f}"
          f" {primitive:10.4f}")

sigma_inf = total_phase(sol)
at_t2 = sol.sigma[int(np.searchsorted(grid, t2))]
print(f"\nsigma(inf) = {sigma_inf:.6f} = {sigma_inf / math.pi:.6f} pi")
print(f"accumulated beyond the turning point: {sigma_inf - at_t2:.4f} "
      f"({100 * (sigma_inf - at_t2) / sigma_inf:.0f} % of the total)")
print(f"ceiling of the primitive phase: {S_total + math.pi / 4:.4f}")

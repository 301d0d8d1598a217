"""The oscillation number N(E): quantization as curve crossing.

Sweeping the total phase sigma(inf, E) / pi over an energy grid gives a
smooth, strictly increasing curve.  Each time it crosses an integer n + 1
the energy is an eigenvalue: no matching, no determinant, just a root
find on a monotone interpolant.  For the harmonic well the curve is the
straight line E + 1/2 and the crossings land on the exact ladder; for
anharmonic wells the curve bends but the crossings remain exact.
"""

import numpy as np

from oscphase import BoundaryMethod, SymmetricPotential, oscillation_number_sweep

harmonic = SymmetricPotential({2: 0.5})
sextic = SymmetricPotential({6: 0.5})

h_table = oscillation_number_sweep(
    harmonic, 0.2, 4.8, 10, bc_method=BoundaryMethod.HARMONIC_EXACT
)
s_table = oscillation_number_sweep(sextic, 0.4, 12.0, 12)

print("harmonic, exact boundary value: N(E) - (E + 1/2) on the grid")
dev = h_table.ntilde - (h_table.energies + 0.5)
print(f"  max deviation = {np.max(np.abs(dev)):.2e}  (straight line)\n")

print("sextic: the curve bends, the crossings quantize")
print("      E       N(E)")
for E, n in zip(s_table.energies[:6], s_table.ntilde[:6]):
    print(f"  {E:7.3f} {n:9.4f}")
print("  ...")
print("\nrefined integer crossings (n, E_n):")
for n, E in s_table.eigenvalues:
    print(f"  N = {n + 1}:  E_{n} = {E:.10f}")

interp = s_table.interpolant()
mid = 0.5 * (s_table.eigenvalues[0][1] + s_table.eigenvalues[1][1])
print(f"\nbetween the first two levels, N({mid:.3f}) = {float(interp(mid)):.4f}"
      " (not an integer: not an eigenvalue)")

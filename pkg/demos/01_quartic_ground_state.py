"""Quantize the pure quartic well five ways and compare the answers.

The quartic oscillator V(x) = x**4 / 2 is the simplest well with no
closed-form spectrum, which makes it the standard benchmark: every
quantization scheme disagrees with every other in the low levels, and the
disagreement *is* the result.  The exact quantum phase method (qlm) and
the shooting oracle agree to ten digits; the semiclassical ladder
brackets them from below, tightening as corrections are added.
"""

from oscphase import (
    SymmetricPotential,
    Terminant,
    airy_quantize,
    dunham_quantize,
    eigenvalue,
    oracle,
    wkb_quantize,
)

quartic = SymmetricPotential({4: 0.5})

print("Ground state of V(x) = x^4/2")
print("-" * 46)
rows = [
    ("quantum phase (qlm)", eigenvalue(quartic, 0)),
    ("shooting oracle", oracle.numerov_eigenvalue(quartic, 0)),
    ("first-order", wkb_quantize(quartic, 0)),
    ("uniform Airy carrier", airy_quantize(quartic, 0)),
    ("corrections, two terms", dunham_quantize(quartic, 0, 1)),
    ("corrections, halved last", dunham_quantize(quartic, 0, 3,
                                                 Terminant.STIELTJES_HALF)),
]
exact = rows[0][1]
for name, E in rows:
    print(f"{name:26s} {E:.12f}   ({100 * (E - exact) / exact:+6.2f} %)")

print()
print("First four levels, quantum phase vs oracle:")
for n in range(4):
    E = eigenvalue(quartic, n)
    ref = oracle.numerov_eigenvalue(quartic, n)
    print(f"  n = {n}:  E = {E:.12f}   |E - oracle| = {abs(E - ref):.2e}")

"""Higher-order quantization corrections, generated exactly.

The correction hierarchy under the quantization integral is built as
differential polynomials with rational coefficients: order k is derived
from the orders below it by an exact recurrence, so every term can be
back-substituted and verified to cancel identically.  Evaluated on a
complex contour around the turning points, the orders give a divergent
but resummable series; truncating it well (and halving the last term)
turns the 18-percent first-order error on the quartic ground state into
under 9 percent with three correction orders.
"""

from oscphase import SymmetricPotential, Terminant, dunham_integral, dunham_quantize
from oscphase.diffalg import jet_derivative, riccati_term

print("first correction terms of the hierarchy (P = radical, Qn = nth jet):")
for k in range(3):
    print(f"  order {k}: {riccati_term(k)}")

print("\nback-substitution of the defining recurrence (must vanish exactly):")
for k in range(1, 5):
    residual = jet_derivative(riccati_term(k - 1))
    for j in range(0, k + 1):
        residual = residual + riccati_term(k - j) * riccati_term(j)
    print(f"  order {k}: identically zero = {residual.is_zero}")

quartic = SymmetricPotential({4: 0.5})
print("\ncontour integrals at E = 0.53 (imaginary parts are pure roundoff):")
for k in range(4):
    val = dunham_integral(quartic, 0.53, k)
    print(f"  k = {k}:  {val.real:+.12e}  (|imag| = {abs(val.imag):.1e})")

print("\nquartic ground state by truncation depth:")
exact = 0.5301810452420914
for label, E in (
    ("first order only", dunham_quantize(quartic, 0, 0)),
    ("two terms", dunham_quantize(quartic, 0, 1)),
    ("three terms, halved last", dunham_quantize(quartic, 0, 2,
                                                 Terminant.STIELTJES_HALF)),
    ("four terms, halved last", dunham_quantize(quartic, 0, 3,
                                                Terminant.STIELTJES_HALF)),
):
    print(f"  {label:26s} {E:.6f}  ({100 * (E - exact) / exact:+5.1f} %)")

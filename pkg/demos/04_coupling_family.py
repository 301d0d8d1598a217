"""Strong coupling: where first-order semiclassics falls apart.

The family V(x) = x**2/2 + lambda x**10/2 interpolates between a harmonic
well and a hard decadic wall.  At lambda = 1000 the first-order
semiclassical ground state misses by 40 percent; amusingly, the value it
produces is close to the *exact* ground state of the lambda = 50 member,
so a first-order fit to data would misidentify the potential itself.
The quantum phase treats every coupling identically.
"""

from oscphase import decadic_potential, eigenvalue, nsc, wkb_quantize

print("ground states of V = x^2/2 + lambda x^10/2")
print("  lambda     exact        first-order   error")
for lam in (0.001, 0.1, 1.0, 5.0, 50.0, 1000.0):
    V = decadic_potential(lam)
    exact = eigenvalue(V, 0)
    approx = wkb_quantize(V, 0)
    print(f"  {lam:8g} {exact:12.6f} {approx:12.6f}  "
          f"{100 * (approx - exact) / exact:+6.1f} %")

V1000 = decadic_potential(1000.0)
V50 = decadic_potential(50.0)
print(f"\nfirst-order at lambda = 1000 : {wkb_quantize(V1000, 0):.4f}")
print(f"exact at lambda = 50         : {eigenvalue(V50, 0):.4f}")

E = 2.0
print(f"\noscillation numbers at E = {E}: the semiclassical count drifts")
for lam in (1.0, 50.0, 1000.0):
    V = decadic_potential(lam)
    print(f"  lambda = {lam:6g}:  N_sc(E) = {nsc(V, E):.4f}")

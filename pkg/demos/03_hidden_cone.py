"""A positive system in disguise.

Conjugating a positive system by a random change of basis destroys entrywise
positivity but not the pressure. The validator finds an invariant cone,
conjugates back to a positive basis, and the numbers agree.
"""
import numpy as np

from affdim import (IfsSystem, Mat2, check_omega, conjugate_system, find_invariant_cone,
                    spectral_pressure)

base = IfsSystem((Mat2(0.3, 0.1, 0.1, 0.2), Mat2(0.2, 0.05, 0.15, 0.25)))
B = Mat2(1.0, -0.7, 0.4, 0.9)
disguised = conjugate_system(base, B)

for A in disguised.maps:
    print(np.round(A.array, 4))
print("disc conditions failing:", check_omega(disguised).failing())

cone = find_invariant_cone(disguised)
print("\ncone search:", cone.status, "-", cone.detail)
back = conjugate_system(disguised, cone.basis)
print("all entries positive after conjugating back:",
      all(m.is_positive() for m in back.maps))

print("\n  s    original           disguised")
for s in (0.3, 0.9, 1.5):
    print(f"{s:4.1f}   {spectral_pressure(base, s).value:.15f}"
          f"  {spectral_pressure(disguised, s).value:.15f}")

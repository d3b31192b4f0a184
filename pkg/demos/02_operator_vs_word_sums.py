"""The operator eigenvalue against the defining limit over words.

Brute force sums phi^s over all 2^n words and takes the n-th root. It
converges slowly (roughly like 1/n); the truncated operator is exact to
round-off already at a few dozen coefficients.
"""
import numpy as np

from affdim import IfsSystem, Mat2, brute_force_pressure, spectral_pressure
from affdim.pressure import prepare, pressure_at_order

system = IfsSystem((Mat2(0.3, 0.1, 0.1, 0.2), Mat2(0.2, 0.05, 0.15, 0.25)))
s = 0.7
exact = spectral_pressure(system, s).value
print(f"operator value at s = {s}: {exact:.15f}\n")

print(" n   word sum           error")
for n in (2, 4, 6, 8, 10, 12, 14, 16):
    b = brute_force_pressure(system, s, n).value
    print(f"{n:2d}   {b:.12f}   {b - exact:+.2e}")

print("\n N   eigenvalue at fixed truncation   change from N/2")
prep = prepare(system)
prev = None
for N in (4, 8, 16, 32, 64):
    lam = float(np.real(pressure_at_order(prep, s, N)))
    delta = "" if prev is None else f"{abs(lam - prev):.1e}"
    print(f"{N:2d}   {lam:.15f}          {delta}")
    prev = lam

"""How the affinity dimension moves with one matrix entry.

The dimension depends analytically on the entries, so the swept curve is
smooth; its slope from the sweep matches the implicit-function derivative
-(dP/dt)/(dP/ds) computed at a single point.
"""
import numpy as np

from affdim import IfsSystem, Mat2, affinity_dimension, derivative, sweep

system = IfsSystem((Mat2(0.3, 0.1, 0.1, 0.2), Mat2(0.2, 0.05, 0.15, 0.25)))

rows = sweep(system, entry_index=0, lo=0.2, hi=0.4, steps=9)
print(" a (map 0)   s0")
for r in rows:
    print(f"  {r.param_value:.3f}     {r.s0:.12f}")

# slope at a = 0.3 two ways
a = np.array([r.param_value for r in rows])
s0 = np.array([r.s0 for r in rows])
fd_slope = np.gradient(s0, a)[4]

root = affinity_dimension(system).s0
dP_dt = derivative(system, root, wrt="t:0", method="complex-step")
dP_ds = derivative(system, root, wrt="s", method="perturbation")
print(f"\nslope from sweep (finite differences): {fd_slope:.6f}")
print(f"slope from -(dP/dt)/(dP/ds):           {-dP_dt / dP_ds:.6f}")

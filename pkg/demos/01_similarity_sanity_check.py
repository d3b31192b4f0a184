"""Two copies of x -> x/3: the answer is known in closed form, log 2 / log 3."""
import math
import warnings

from affdim import IfsSystem, Mat2, affinity_dimension, spectral_pressure

third = Mat2.diag(1 / 3, 1 / 3)
cantor = IfsSystem((third, third), label="two thirds")

# P(s) = 2 * 3^-s here, so the operator should reproduce it exactly
for s in (0.25, 0.5, 1.0, 1.5):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = spectral_pressure(cantor, s).value
    print(f"s = {s:4.2f}   P(s) = {p:.15f}   2*3^-s = {2 * 3 ** -s:.15f}")

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    res = affinity_dimension(cantor)
print()
print("s0          =", res.s0)
print("log2/log3   =", math.log(2) / math.log(3))
# the two maps are projectively identical, so the run carries a degeneracy note
print("warnings    :", "; ".join(res.warnings))

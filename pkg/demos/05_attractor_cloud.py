"""Sample the attractor itself and write it to CSV for plotting elsewhere."""
import sys

import numpy as np

from affdim import IfsSystem, Mat2, affinity_dimension, emit_attractor
from affdim.attractor import invariant_radius

system = IfsSystem(
    (Mat2(0.45, 0.15, 0.1, 0.4), Mat2(0.4, 0.1, 0.2, 0.35), Mat2(0.35, 0.05, 0.05, 0.45)),
    translations=((0.0, 0.0), (0.55, 0.1), (0.2, 0.55)),
)

cloud = emit_attractor(system, 20000, seed=2)
print("affinity dimension:", affinity_dimension(system).s0)
print("bounding box      :", cloud.points.min(axis=0), cloud.points.max(axis=0))
print("invariant radius  :", invariant_radius(system))
print("max |x|           :", np.linalg.norm(cloud.points, axis=1).max())

if len(sys.argv) > 1:
    np.savetxt(sys.argv[1], cloud.points, delimiter=",", header="x,y", comments="")
    print("wrote", sys.argv[1])

"""Top eigenvalue of the 1/|x - y| potential operator on three domains.

Each domain gets a Nystrom estimate per mesh level, a Richardson
extrapolation and the two cheap bounds around it. Disks and annuli also get
the 1-D radial reduction as an independent route.
"""
import numpy as np

from cauchylab import DomainSpec
from cauchylab.potential import sharp_constant

np.set_printoptions(precision=8)

for spec in (DomainSpec.disk(), DomainSpec.square(), DomainSpec.annulus(0.5, 1.0)):
    rep = sharp_constant(spec)
    print(spec.kind)
    for level, nodes, lam, c in rep.per_level:
        print(f"  level {level}  {nodes:5d} nodes  c = {c:.9f}")
    order = "n/a" if rep.fitted_order is None else f"{rep.fitted_order:.2f}"
    print(f"  extrapolated {rep.extrapolated:.9f}  (fitted order {order}, used {rep.order_used:.2f})")
    print(f"  bounds       {rep.lower_bound:.6f} <= c <= {rep.schur_upper:.6f}")
    if rep.radial_value is not None:
        print(f"  radial route {rep.radial_value:.9f}")

# the 2-D rule with the simpler equal-area disk diagonal converges more slowly
cd = sharp_constant(DomainSpec.disk(), diagonal_rule="cell-disk")
print("disk, cell-disk diagonal:", cd.estimates, "->", f"{cd.extrapolated:.6f}")

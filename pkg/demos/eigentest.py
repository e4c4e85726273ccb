"""Norm of the Cauchy transform on the first Dirichlet eigenfunction.

On the disk C u equals v0 = -(4/lambda1) u_z and the ratio sits exactly on
2/sqrt(lambda1). Off the disk a holomorphic remainder h pushes it above.
"""
import math

from cauchylab import DomainSpec
from cauchylab.cauchy import cauchy_general, eigentest
from cauchylab.eigen import ground_state

for spec, level in ((DomainSpec.disk(), 4), (DomainSpec.square(), 3), (DomainSpec.annulus(0.5, 1.0), 3)):
    rep = eigentest(spec, level)
    print(f"{spec.kind:9s} level {level}: |Cu|/|u| = {rep.ratio:.9f}, threshold {rep.threshold:.9f}, margin {rep.margin:.2e}")
    print(f"{'':9s} |h|^2 = {rep.h_norm_sq:.3e}, Pythagoras residual {rep.pythagoras_residual:.1e}, passed {rep.passed}")

# at the corner of the square v0 vanishes, so (C u)(0) is the remainder itself
corner = complex(cauchy_general(DomainSpec.square(), ground_state(DomainSpec.square()).u, 0j))
print(f"square corner: (C u)(0) = {corner.real:.10f} {corner.imag:+.10f}i")
print(f"sqrt(2)/pi = {math.sqrt(2) / math.pi:.9f}")

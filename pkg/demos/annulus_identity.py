"""The annulus A(0.5, 1): C f = v0 + c/z with c = 2 r f'(r) / lambda1.

1/z is orthogonal to v0, so the squared ratio exceeds 4/lambda1 by exactly
|c|^2 ||1/z||^2 / ||f||^2.
"""
import math

import numpy as np

from cauchylab import DomainSpec
from cauchylab.cauchy import cauchy_radial, eigentest
from cauchylab.eigen import annulus_eigen_wavenumber, ground_state, v0_field

spec = DomainSpec.annulus(0.5, 1.0)
k = annulus_eigen_wavenumber(0.5, 1.0)
pair = ground_state(spec)
f, df = pair.radial_profile
c = 2 * 0.5 * df(0.5) / pair.lambda1
print(f"k = {k:.12f}, lambda1 = {pair.lambda1:.10f}, c = {c:.10f}")

z = np.array([0.6, 0.75j, -0.9 + 0.1j, 0.55 * np.exp(2j)])
gap = cauchy_radial(f, 0.5, z) - (v0_field(pair, z) + c / z)
print("pointwise identity residuals:", np.abs(gap))

rep = eigentest(spec, 3)
lhs = rep.ratio**2 - 4 / pair.lambda1
rhs = c * c * 2 * math.pi * math.log(2) / rep.u_norm_sq
print(f"ratio^2 - 4/lambda1 = {lhs:.12f}")
print(f"c^2 2pi log2 / |f|^2 = {rhs:.12f}")

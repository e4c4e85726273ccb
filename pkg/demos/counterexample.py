"""Endpoint Fourier inequality on the unit disk, tested with f = 1.

The weighted form int |f_hat|^2 / |xi| is compared with lambda1^{-1/2} ||f||^2.
"""
import math

from cauchylab.fourier import RadialProfile, counterexample, hankel_hat, j1_squared_integral

rep = counterexample()
print(f"j01                       = {rep.j01:.12f}")
print(f"left side  (weighted form) = {rep.lhs:.10f}   exact 8/3 = {8 / 3:.10f}")
print(f"right side (pi / j01)      = {rep.rhs:.10f}")
print(f"left > right: {rep.verdict}  (tail uncertainty {rep.lhs_error:.1e})")

# the transform of the indicator is J1(s)/s, so the form reduces to a 1-D integral
for s in (0.5, 3.0, 40.0):
    print(f"f_hat({s:5.1f}) = {hankel_hat(RadialProfile.indicator(), s): .12f}")
val = j1_squared_integral()
print(f"int_0^inf J1(r)^2 / r^2 dr = {val:.12f}, 4/(3 pi) = {4 / (3 * math.pi):.12f}")

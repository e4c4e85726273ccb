"""Outside the domain the Cauchy transform is holomorphic and decays like 1/z.

The multipole series about the centre matches it to round-off at |z| = 10.
When the first moments vanish the decay is faster.
"""
import math

import numpy as np

from cauchylab import DomainSpec
from cauchylab.cauchy import exterior_cauchy, multipole_moments
from cauchylab.eigen import ground_state

square = DomainSpec.square()
u = ground_state(square).u
mp = multipole_moments(square, u, 8)
print("moments about the centre:", np.round(mp.moments, 12))
z = square.center() + 10 * np.exp(1j * np.linspace(0, 2 * math.pi, 6, endpoint=False))
print("|exterior - series| at |z| = 10:", np.abs(exterior_cauchy(square, u, z) - mp.evaluate(z)).max())

disk = DomainSpec.disk()
ud = ground_state(disk).u
for m in range(3):
    g = lambda w, m=m: ud(w) * np.conj(w) ** m  # noqa: E731
    a, b = (abs(exterior_cauchy(disk, g, r * np.exp(0.7j))) for r in (10.0, 100.0))
    print(f"f = u * conj(z)^{m}: decay slope {math.log10(b / a):.3f}")

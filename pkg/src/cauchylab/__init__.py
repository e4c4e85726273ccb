"""Numerical checks for the planar Cauchy transform, the Dirichlet ground
state and the ``1/|x - y|`` potential operator on disks, annuli and
rectangles."""

__version__ = "0.1.0"

from .errors import ConvergenceError, NoSignChangeError
from .specfun import (
    RootBracket,
    bessel_j,
    bessel_j0_first_zero,
    bessel_y,
    bracketed_root,
    elliptic_k,
)
from .domains import (
    DomainSpec,
    QuadratureMesh,
    RadialGrid,
    build_mesh,
    build_radial_grid,
    inner_product,
    integrate,
    l2_norm,
)
from .eigen import EigenPair, annulus_eigen_wavenumber, ground_state, v0_field
from .cauchy import (
    EigentestReport,
    MultipoleExpansion,
    cauchy_general,
    cauchy_radial,
    eigentest,
    exterior_cauchy,
    holomorphic_remainder,
    multipole_moments,
)
from .potential import (
    SdMatrix,
    SharpConstantReport,
    assemble_sd,
    lambda_max,
    radial_sd_lambda_max,
    schur_bound,
    sharp_constant,
)
from .fourier import (
    CounterexampleReport,
    RadialProfile,
    counterexample,
    hankel_hat,
    weighted_form_radial,
)

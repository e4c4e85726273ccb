"""Interior and exterior Cauchy transforms.

The interior transform ``(1/pi) int_D f(w) / (z - w) dA(w)`` is evaluated in
polar coordinates centred at ``z``: the Jacobian cancels the ``1/|z - w|``
singularity and what remains is a smooth integral over ray directions of
chord integrals of ``f``. For radial data on disks and annuli the transform
reduces to a one-dimensional integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .domains import (
    DomainSpec,
    build_mesh,
    inner_product,
    l2_norm,
    polar_integral,
)
from .eigen import EigenPair, ground_state, v0_field
from .errors import ConvergenceError

__all__ = [
    "EigentestReport",
    "MultipoleExpansion",
    "cauchy_radial",
    "cauchy_general",
    "holomorphic_remainder",
    "eigentest",
    "multipole_moments",
    "exterior_cauchy",
]

RADIAL_NODES = 32
ORTHO_EPS = 1e-30
H_NOISE_FLOOR = 1e-20
MAX_MULTIPOLE_ORDER = 12

_T, _TW = np.polynomial.legendre.leggauss(RADIAL_NODES)
_T = 0.5 * (_T + 1.0)
_TW = 0.5 * _TW


def _cauchy_kernel(direction):
    # w - z = t e, so 1/(z - w) dA = -conj(e)/t * t dt dphi
    return -np.conj(direction) / math.pi


def cauchy_radial(profile: Callable, r_inner, z, r_outer=None):
    """Cauchy transform of the radial function ``f(|w|)`` on a disk or annulus.

    Returns ``(2 / z) * int_{r_inner}^{|z|} f(rho) rho d rho``. ``z`` may be an
    array; the integral uses a fixed Gauss-Legendre rule on each ``[r_inner, |z|]``.

    Raises
    ------
    ValueError
        If some ``|z| < r_inner`` (or ``> r_outer`` when given), or ``z == 0``
        on an annulus.
    """
    z = np.asarray(z, dtype=complex)
    rho = np.abs(z)
    a = float(r_inner)
    if a < 0:
        raise ValueError("r_inner must be non-negative")
    if np.any(rho < a * (1 - 1e-15)) or (r_outer is not None and np.any(rho > r_outer * (1 + 1e-15))):
        raise ValueError("z lies outside the radial support")
    if a > 0 and np.any(rho == 0):
        raise ValueError("z = 0 is outside an annulus")
    length = np.maximum(rho - a, 0.0)
    nodes = a + length[..., None] * _T
    integral = length * np.sum(profile(nodes) * nodes * _TW, axis=-1)
    safe = np.where(rho == 0, 1.0, z)
    return np.where(rho == 0, 0.0, 2.0 * integral / safe)[()]


def cauchy_general(
    spec: DomainSpec,
    f: Callable,
    z,
    tol=1e-10,
    start=(16, 16),
    max_angle=512,
):
    """Cauchy transform of ``f`` over ``spec`` at interior point(s) ``z``.

    The ray rule starts with ``start = (n_angle, n_t)`` nodes and doubles both
    until two successive results agree within ``tol`` at every point. Points on
    the boundary are accepted when ``f`` vanishes there (e.g. the corner of a
    square for the ground state).

    Raises
    ------
    ConvergenceError
        If ``n_angle`` would exceed ``max_angle`` before agreement.
    ValueError
        If a point lies outside the closed domain.
    """
    z = np.asarray(z, dtype=complex)
    if not np.all(spec.contains(z, closed=True)):
        raise ValueError("cauchy_general needs points in the closed domain")
    n_angle, n_t = start
    prev = polar_integral(spec, z, f, _cauchy_kernel, n_angle, n_t)
    while 2 * n_angle <= max_angle:
        n_angle, n_t = 2 * n_angle, 2 * n_t
        cur = polar_integral(spec, z, f, _cauchy_kernel, n_angle, n_t)
        if np.max(np.abs(cur - prev), initial=0.0) <= tol:
            return cur[()]
        prev = cur
    raise ConvergenceError(f"cauchy_general did not reach tol={tol} with n_angle={n_angle}")


def _transform_of_u(spec, pair, z, tol):
    if pair.radial_profile is not None:
        lo, hi = spec.radial_support
        return cauchy_radial(pair.radial_profile[0], lo, z, hi)
    return cauchy_general(spec, pair.u, z, tol)


def holomorphic_remainder(spec: DomainSpec, pair: Optional[EigenPair], z, tol=1e-10):
    """``h = C_D u - v0`` at ``z``; zero on disks, ``c / z`` on annuli."""
    if pair is None:
        pair = ground_state(spec)
    return _transform_of_u(spec, pair, z, tol) - v0_field(pair, z)


@dataclass(frozen=True)
class EigentestReport:
    """Norms of ``w = C_D u``, ``v0`` and ``h = w - v0`` on one mesh.

    ``margin`` is ``ratio - threshold``; ``tolerance`` is the bound the two
    residuals are held to at this level. When ``h`` is at round-off level
    (disks) its direction is noise, so the orthogonality residual is not
    checked.
    """

    domain: DomainSpec
    lambda1: float
    level: int
    node_count: int
    ratio: float
    threshold: float
    u_norm_sq: float
    v0_norm_sq: float
    h_norm_sq: float
    w_norm_sq: float
    orthogonality_residual: float
    pythagoras_residual: float
    margin: float
    tolerance: float

    @property
    def h_resolved(self):
        return self.h_norm_sq > H_NOISE_FLOOR * self.w_norm_sq

    @property
    def passed(self):
        ortho_ok = self.orthogonality_residual <= self.tolerance or not self.h_resolved
        return (
            self.ratio >= self.threshold - self.tolerance
            and ortho_ok
            and self.pythagoras_residual <= self.tolerance
        )


def _level_tolerance(level):
    return 1e-6 if level >= 3 else 1e-4


def eigentest(spec: DomainSpec, level=3, tol=1e-7) -> EigentestReport:
    """Compare ``||C_D u|| / ||u||`` with ``2 / sqrt(lambda1)`` on a level mesh.

    ``w`` is evaluated at every mesh node (radial formula on disks and annuli,
    ray quadrature on rectangles) and ``h = w - v0``.
    """
    pair = ground_state(spec)
    mesh = build_mesh(spec, level)
    nodes = mesh.nodes
    w = _transform_of_u(spec, pair, nodes, tol)
    v0 = v0_field(pair, nodes)
    h = w - v0
    u_sq = l2_norm(mesh, pair.u(nodes)) ** 2
    w_sq = l2_norm(mesh, w) ** 2
    v_sq = l2_norm(mesh, v0) ** 2
    h_sq = l2_norm(mesh, h) ** 2
    cross = abs(inner_product(mesh, v0, h))
    ratio = math.sqrt(w_sq / u_sq)
    threshold = 2.0 / math.sqrt(pair.lambda1)
    return EigentestReport(
        domain=spec,
        lambda1=pair.lambda1,
        level=level,
        node_count=len(mesh),
        ratio=ratio,
        threshold=threshold,
        u_norm_sq=u_sq,
        v0_norm_sq=v_sq,
        h_norm_sq=h_sq,
        w_norm_sq=w_sq,
        orthogonality_residual=cross / (math.sqrt(v_sq * h_sq) + ORTHO_EPS),
        pythagoras_residual=abs(w_sq - v_sq - h_sq) / w_sq,
        margin=ratio - threshold,
        tolerance=_level_tolerance(level),
    )


@dataclass(frozen=True)
class MultipoleExpansion:
    """Laurent coefficients of the exterior Cauchy transform about ``center``.

    ``moments[k] = int_D f(w) (w - center)**k dA(w)`` and the transform is
    ``pi_factor * sum_k moments[k] / (z - center)**(k + 1)`` outside the disk
    of radius ``radius`` about ``center`` that contains the domain.
    """

    moments: np.ndarray
    domain: DomainSpec
    center: complex
    radius: float
    abs_mass: float
    pi_factor: float = field(default=1.0 / math.pi)

    @property
    def order(self):
        return len(self.moments) - 1

    def evaluate(self, z):
        zeta = np.asarray(z, dtype=complex) - self.center
        total = np.zeros_like(zeta)
        # Horner in 1/zeta
        inv = 1.0 / zeta
        for m in self.moments[::-1]:
            total = (total + m) * inv
        return (self.pi_factor * total)[()]

    def tail_bound(self, z):
        """Bound on the truncation error from ``|f|`` mass and the enclosing radius."""
        d = np.abs(np.asarray(z, dtype=complex) - self.center)
        if np.any(d <= self.radius):
            raise ValueError("tail bound needs |z - center| > radius")
        q = self.radius / d
        return (self.pi_factor * self.abs_mass * q ** (self.order + 1) / (d - self.radius))[()]


def _enclosing_radius(spec, center):
    # farthest point of the closed domain from center
    if spec.kind == "rectangle":
        corners = np.array([0, spec.width, 1j * spec.height, spec.width + 1j * spec.height])
        return float(np.max(np.abs(corners - center)))
    return spec.radial_support[1] + abs(center)


def multipole_moments(spec: DomainSpec, f: Callable, K=8, level=2, center=None) -> MultipoleExpansion:
    """Moments ``M_0..M_K`` of ``f`` by mesh quadrature.

    The expansion centre defaults to the domain centre (the origin for disks
    and annuli), which keeps the enclosing radius as small as possible.
    """
    if not 0 <= K <= MAX_MULTIPOLE_ORDER:
        raise ValueError(f"K must lie in [0, {MAX_MULTIPOLE_ORDER}]")
    c = complex(spec.center() if center is None else center)
    mesh = build_mesh(spec, level)
    values = np.asarray(f(mesh.nodes), dtype=complex)
    if not np.all(np.isfinite(values)):
        raise ValueError("f is not finite at every mesh node")
    zeta = mesh.nodes - c
    powers = zeta[None, :] ** np.arange(K + 1)[:, None]
    moments = powers @ (mesh.weights * values)
    radius = _enclosing_radius(spec, c)
    abs_mass = float(np.sum(mesh.weights * np.abs(values)))
    return MultipoleExpansion(moments, spec, c, radius, abs_mass)


def exterior_cauchy(spec: DomainSpec, f: Callable, z, level=2):
    """``(1/pi) int_D f(w) / (z - w) dA`` for ``z`` outside the closed domain.

    The integrand is smooth there, so plain mesh quadrature is used.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(spec.contains(z, closed=True)):
        raise ValueError("exterior_cauchy needs points outside the closed domain")
    mesh = build_mesh(spec, level)
    values = np.asarray(f(mesh.nodes), dtype=complex)
    flat = z.ravel()
    out = np.array([np.sum(mesh.weights * values / (zz - mesh.nodes)) for zz in flat]) / math.pi
    return out.reshape(z.shape)[()]

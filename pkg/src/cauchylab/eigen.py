"""First Dirichlet eigenpairs of disks, annuli and rectangles.

Eigenfunctions carry unit-amplitude coefficients and are not L2-normalized;
every quantity built on them downstream is a ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .domains import DomainSpec
from .specfun import (
    RootBracket,
    bessel_j,
    bessel_j0_first_zero,
    bessel_y,
    bracketed_root,
)

__all__ = [
    "EigenPair",
    "annulus_cross_product",
    "annulus_eigen_wavenumber",
    "ground_state",
    "v0_field",
]

SCAN_STEP = 0.05
SCAN_MAX = 20.0


@dataclass(frozen=True)
class EigenPair:
    """First Dirichlet eigenvalue with evaluators for ``u`` and ``du/dz``.

    ``u`` and ``dz_u`` take complex points (any array shape). For disks and
    annuli ``radial_profile`` holds ``(f, df)``, callables of the radius with
    ``u(z) = f(|z|)``.
    """

    lambda1: float
    domain: DomainSpec
    u: Callable
    dz_u: Callable
    radial_profile: Optional[tuple] = None


def annulus_cross_product(k, r, big_r):
    """``J0(k r) Y0(k R) - J0(k R) Y0(k r)``; its zeros give annulus eigenvalues."""
    k = np.asarray(k, dtype=float)
    return bessel_j(0, k * r) * bessel_y(0, k * big_r) - bessel_j(0, k * big_r) * bessel_y(0, k * r)


def annulus_eigen_wavenumber(r, big_r):
    """Smallest ``k > 0`` with ``annulus_cross_product(k, r, R) == 0``.

    The cross product depends on ``k`` only through ``k R`` at fixed ``r/R``,
    so the scan runs over ``x = k R`` in steps of 0.05. The first root sits
    near ``pi / (1 - r/R)`` for thin annuli, so the scan ceiling is raised
    above 20 when needed.
    """
    r, big_r = float(r), float(big_r)
    if not 0 < r < big_r:
        raise ValueError("annulus needs 0 < r < R")
    q = r / big_r
    ceiling = max(SCAN_MAX, 2.0 * math.pi / (1.0 - q))

    def g(x):
        return float(annulus_cross_product(x, q, 1.0))

    xs = np.arange(1, int(ceiling / SCAN_STEP) + 1) * SCAN_STEP
    vals = annulus_cross_product(xs, q, 1.0)
    flips = np.nonzero(np.signbit(vals[1:]) != np.signbit(vals[:-1]))[0]
    if flips.size == 0:
        raise ValueError(f"no sign change of the cross product below kR = {ceiling}")
    i = flips[0]
    x1 = bracketed_root(g, RootBracket(xs[i], xs[i + 1], 1e-13))
    return x1 / big_r


def _j1_over_x(x):
    # J1(x)/x, finite at 0
    x = np.asarray(x, dtype=float)
    small = x < 1e-8
    safe = np.where(small, 1.0, x)
    return np.where(small, 0.5 - x * x / 16.0, bessel_j(1, safe) / safe)


def _disk_pair(spec):
    j01 = bessel_j0_first_zero()
    big_r = spec.radius
    k = j01 / big_r

    def f(rho):
        return bessel_j(0, k * np.asarray(rho, dtype=float))

    def df(rho):
        return -k * bessel_j(1, k * np.asarray(rho, dtype=float))

    def u(z):
        return f(np.abs(z))

    def dz_u(z):
        # (e^{-i theta}/2) f'(rho) = conj(z)/2 * f'(rho)/rho, smooth through 0
        z = np.asarray(z, dtype=complex)
        return -0.5 * k * k * np.conj(z) * _j1_over_x(k * np.abs(z))

    return EigenPair(k * k, spec, u, dz_u, (f, df))


def _annulus_pair(spec):
    r, big_r = spec.r_inner, spec.r_outer
    k = annulus_eigen_wavenumber(r, big_r)
    j_r, y_r = float(bessel_j(0, k * r)), float(bessel_y(0, k * r))

    # sign chosen so that f > 0 inside, f'(r) = 2 / (pi r) by the Wronskian
    def f(rho):
        x = k * np.asarray(rho, dtype=float)
        return bessel_y(0, x) * j_r - bessel_j(0, x) * y_r

    def df(rho):
        x = k * np.asarray(rho, dtype=float)
        return k * (bessel_j(1, x) * y_r - bessel_y(1, x) * j_r)

    def u(z):
        return f(np.abs(z))

    def dz_u(z):
        z = np.asarray(z, dtype=complex)
        rho = np.abs(z)
        return 0.5 * (np.conj(z) / rho) * df(rho)

    return EigenPair(k * k, spec, u, dz_u, (f, df))


def _rectangle_pair(spec):
    a, b = spec.width, spec.height
    kx, ky = math.pi / a, math.pi / b

    def u(z):
        z = np.asarray(z, dtype=complex)
        return np.sin(kx * z.real) * np.sin(ky * z.imag)

    def dz_u(z):
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        ux = kx * np.cos(kx * x) * np.sin(ky * y)
        uy = ky * np.sin(kx * x) * np.cos(ky * y)
        return 0.5 * (ux - 1j * uy)

    return EigenPair(kx * kx + ky * ky, spec, u, dz_u, None)


def ground_state(spec: DomainSpec) -> EigenPair:
    """First Dirichlet eigenpair of ``spec``.

    Disk of radius R: ``J0(j01 rho / R)``. Annulus ``r < rho < R``: the radial
    Bessel combination vanishing on both circles. Rectangle ``a x b``:
    ``sin(pi x / a) sin(pi y / b)``.
    """
    if spec.kind == "disk":
        return _disk_pair(spec)
    if spec.kind == "annulus":
        return _annulus_pair(spec)
    return _rectangle_pair(spec)


def v0_field(pair: EigenPair, z):
    """``-(4 / lambda1) du/dz``, the d-bar antiderivative of ``u`` built from ``u``."""
    return -(4.0 / pair.lambda1) * pair.dz_u(z)

"""Planar domains, tensor quadrature meshes and polar ray rules.

Points of the plane are complex numbers throughout. Three domain families
are supported: disks and annuli centred at the origin, and axis-aligned
rectangles with their lower-left corner at the origin.

Two kinds of quadrature live here:

* :func:`build_mesh` returns a product rule for ``dA`` over the whole
  domain (Gauss-Legendre radially or per axis, uniform trapezoid in angle).
* :func:`polar_rays` returns, for each target point ``z``, a family of rays
  leaving ``z`` together with the chords each ray cuts out of the domain.
  Integrals ``int_D g(w) k(w - z) dA(w)`` whose kernel behaves like ``1/|w - z|``
  become smooth in these coordinates because the polar Jacobian cancels the
  singularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "DomainSpec",
    "QuadratureMesh",
    "RadialGrid",
    "RayFamily",
    "build_mesh",
    "build_radial_grid",
    "integrate",
    "inner_product",
    "l2_norm",
    "polar_rays",
    "polar_integral",
]

KINDS = ("disk", "annulus", "rectangle")
MAX_LEVEL = 8
BASE_RESOLUTION = (16, 32)


@dataclass(frozen=True)
class DomainSpec:
    """Parametric description of a disk, annulus or rectangle.

    Use the constructors :meth:`disk`, :meth:`annulus`, :meth:`rectangle`
    and :meth:`square` rather than filling fields by hand.
    """

    kind: str
    radius: Optional[float] = None
    r_inner: Optional[float] = None
    r_outer: Optional[float] = None
    width: Optional[float] = None
    height: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "disk":
            if self.radius is None or not self.radius > 0:
                raise ValueError("disk radius must be positive")
        elif self.kind == "annulus":
            if self.r_inner is None or self.r_outer is None:
                raise ValueError("annulus needs r_inner and r_outer")
            if not 0 < self.r_inner < self.r_outer:
                raise ValueError("annulus needs 0 < r_inner < r_outer")
        else:
            if self.width is None or self.height is None:
                raise ValueError("rectangle needs width and height")
            if not (self.width > 0 and self.height > 0):
                raise ValueError("rectangle sides must be positive")

    @classmethod
    def disk(cls, radius=1.0):
        return cls("disk", radius=float(radius))

    @classmethod
    def annulus(cls, r_inner=0.5, r_outer=1.0):
        return cls("annulus", r_inner=float(r_inner), r_outer=float(r_outer))

    @classmethod
    def rectangle(cls, width=1.0, height=1.0):
        return cls("rectangle", width=float(width), height=float(height))

    @classmethod
    def square(cls, side=1.0):
        return cls.rectangle(side, side)

    @property
    def is_radial(self):
        return self.kind in ("disk", "annulus")

    @property
    def radial_support(self):
        """``(inner, outer)`` radii for disks and annuli."""
        if self.kind == "disk":
            return 0.0, self.radius
        if self.kind == "annulus":
            return self.r_inner, self.r_outer
        raise ValueError("rectangles have no radial support")

    def area(self):
        if self.kind == "disk":
            return math.pi * self.radius**2
        if self.kind == "annulus":
            return math.pi * (self.r_outer**2 - self.r_inner**2)
        return self.width * self.height

    def circumradius(self):
        """Radius of the smallest origin-centred disk containing the domain."""
        if self.kind == "disk":
            return self.radius
        if self.kind == "annulus":
            return self.r_outer
        return math.hypot(self.width, self.height)

    def diameter(self):
        if self.kind == "rectangle":
            return math.hypot(self.width, self.height)
        return 2.0 * self.circumradius()

    def center(self):
        if self.kind == "rectangle":
            return complex(0.5 * self.width, 0.5 * self.height)
        return 0j

    def contains(self, z, closed=False):
        """Boolean mask of points inside the domain (open set by default)."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "rectangle":
            x, y = z.real, z.imag
            if closed:
                return (x >= 0) & (x <= self.width) & (y >= 0) & (y <= self.height)
            return (x > 0) & (x < self.width) & (y > 0) & (y < self.height)
        rho = np.abs(z)
        lo, hi = self.radial_support
        if closed:
            return (rho >= lo) & (rho <= hi)
        inner_ok = rho > lo if self.kind == "annulus" else np.ones(rho.shape, bool)
        return inner_ok & (rho < hi)

    def distance_to_boundary(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "rectangle":
            x, y = z.real, z.imag
            return np.minimum.reduce([x, self.width - x, y, self.height - y])
        rho = np.abs(z)
        lo, hi = self.radial_support
        if self.kind == "disk":
            return hi - rho
        return np.minimum(rho - lo, hi - rho)

    def boundary_points(self, n):
        """``n`` points spread over the boundary (both circles for an annulus)."""
        if self.kind == "disk":
            t = 2 * np.pi * (np.arange(n) + 0.5) / n
            return self.radius * np.exp(1j * t)
        if self.kind == "annulus":
            n_in = n // 2
            t_in = 2 * np.pi * (np.arange(n_in) + 0.5) / n_in
            t_out = 2 * np.pi * (np.arange(n - n_in) + 0.5) / (n - n_in)
            return np.concatenate(
                [self.r_inner * np.exp(1j * t_in), self.r_outer * np.exp(1j * t_out)]
            )
        per = 2.0 * (self.width + self.height)
        s = per * (np.arange(n) + 0.5) / n
        w, h = self.width, self.height
        pts = np.empty(n, dtype=complex)
        for i, si in enumerate(s):
            if si < w:
                pts[i] = si
            elif si < w + h:
                pts[i] = w + 1j * (si - w)
            elif si < 2 * w + h:
                pts[i] = (2 * w + h - si) + 1j * h
            else:
                pts[i] = 1j * (per - si)
        return pts

    def sample_grid(self, n):
        """Interior points of an ``n x n`` lattice over the bounding box.

        The lattice is symmetric about the domain's centre and includes the
        centre itself whenever it lies in the domain.
        """
        n = int(n) | 1
        if self.kind == "rectangle":
            xs = np.linspace(0.0, self.width, n + 2)[1:-1]
            ys = np.linspace(0.0, self.height, n + 2)[1:-1]
        else:
            r = self.radial_support[1]
            xs = ys = np.linspace(-r, r, n + 2)[1:-1]
        grid = (xs[:, None] + 1j * ys[None, :]).ravel()
        return grid[self.contains(grid)]

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class RadialGrid:
    """Gauss-Legendre rule on ``(a, b)``."""

    nodes: np.ndarray
    weights: np.ndarray
    a: float
    b: float

    def integrate(self, values):
        return np.tensordot(np.asarray(values), self.weights, axes=([-1], [0]))


@dataclass(frozen=True)
class QuadratureMesh:
    """Product quadrature rule for ``dA`` over a domain.

    ``shape`` is the tensor shape ``(radial, angular)`` or ``(nx, ny)`` of
    the node array before flattening; ``spacing`` is the characteristic mesh
    width, which halves with each level.
    """

    nodes: np.ndarray
    weights: np.ndarray
    level: int
    domain: DomainSpec
    shape: tuple = field(default=(0, 0))
    spacing: float = 0.0

    def __len__(self):
        return self.nodes.size


def _gauss_legendre(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def build_radial_grid(a, b, n):
    """``n``-point Gauss-Legendre rule mapped to ``(a, b)``."""
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValueError(f"invalid interval ({a}, {b})")
    if n < 2:
        raise ValueError("radial grid needs at least two nodes")
    nodes, weights = _gauss_legendre(int(n), float(a), float(b))
    return RadialGrid(_readonly(nodes), _readonly(weights), float(a), float(b))


def build_mesh(spec: DomainSpec, level: int, base=BASE_RESOLUTION):
    """Tensor quadrature mesh at refinement ``level``.

    Disks and annuli get ``base[0] * 2**level`` Gauss-Legendre radii times
    ``base[1] * 2**level`` uniform angles; rectangles get ``base[0] * 2**level``
    Gauss-Legendre nodes per axis. The node count grows 4x per level.
    """
    level = int(level)
    if level < 0 or level > MAX_LEVEL:
        raise ValueError(f"mesh level must be in [0, {MAX_LEVEL}], got {level}")
    scale = 2**level
    if spec.kind == "rectangle":
        n = base[0] * scale
        x, wx = _gauss_legendre(n, 0.0, spec.width)
        y, wy = _gauss_legendre(n, 0.0, spec.height)
        nodes = (x[:, None] + 1j * y[None, :]).ravel()
        weights = np.outer(wx, wy).ravel()
        shape = (n, n)
        spacing = max(spec.width, spec.height) / n
    else:
        n_r, n_t = base[0] * scale, base[1] * scale
        lo, hi = spec.radial_support
        r, wr = _gauss_legendre(n_r, lo, hi)
        theta = 2 * np.pi * (np.arange(n_t) + 0.5) / n_t
        nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
        weights = np.repeat(wr * r * (2 * np.pi / n_t), n_t)
        shape = (n_r, n_t)
        spacing = (hi - lo) / n_r
    return QuadratureMesh(
        _readonly(nodes), _readonly(weights), level, spec, shape, spacing
    )


def _sample(mesh, f):
    vals = f(mesh.nodes) if callable(f) else np.asarray(f)
    vals = np.broadcast_to(vals, mesh.nodes.shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand is not finite at every mesh node")
    return vals


def integrate(mesh: QuadratureMesh, f):
    """``sum_i w_i f(x_i)``; ``f`` is a callable on complex points or node values."""
    return np.sum(mesh.weights * _sample(mesh, f))


def inner_product(mesh: QuadratureMesh, f, g):
    """Discrete ``<f, g> = sum_i w_i f(x_i) conj(g(x_i))``."""
    return np.sum(mesh.weights * _sample(mesh, f) * np.conj(_sample(mesh, g)))


def l2_norm(mesh: QuadratureMesh, f):
    return math.sqrt(max(inner_product(mesh, f, f).real, 0.0))


@dataclass
class RayFamily:
    """Rays leaving each origin point and the chords they cut from a domain.

    For origin ``p`` and ray ``q``, ``direction[p, q]`` is a unit complex
    number, ``weight[p, q]`` the angular quadrature weight (Jacobian
    included) and ``[t0[p, q, s], t1[p, q, s]]`` the ``s``-th chord along the
    ray, measured as distance from the origin.
    """

    origin: np.ndarray
    direction: np.ndarray
    weight: np.ndarray
    t0: np.ndarray
    t1: np.ndarray

    def chord_lengths(self):
        return (self.t1 - self.t0).sum(axis=-1)

    def chord_integrals(self, f, n_t):
        """``sum_s int_{t0}^{t1} f(origin + t direction) dt`` for every ray."""
        x, w = np.polynomial.legendre.leggauss(n_t)
        half = 0.5 * (self.t1 - self.t0)
        mid = 0.5 * (self.t1 + self.t0)
        t = mid[..., None] + half[..., None] * x
        pts = self.origin[:, None, None, None] + t * self.direction[:, :, None, None]
        vals = f(pts)
        return (vals @ w * half).sum(axis=-1)


def _graded(length, eps, n):
    """Offsets in ``(0, length)`` clustered near 0 on the scale ``eps``.

    Gauss-Legendre in ``v`` with offset ``eps * sinh(v)``; resolves integrands
    with a complex singularity at distance ``eps`` from the anchor. ``length``
    and ``eps`` are per-point arrays; returns arrays of shape ``(P, n)``.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    top = np.arcsinh(length / eps)[:, None]
    v = 0.5 * top * (x + 1.0)
    offset = eps[:, None] * np.sinh(v)
    weight = 0.5 * top * w * eps[:, None] * np.cosh(v)
    return offset, weight


def _outward(z):
    rho = np.abs(z)
    return np.where(rho > 0, z / np.where(rho > 0, rho, 1.0), 1.0), rho


def _circle_exit(rho, cos_a, radius):
    # distance from a point at radius rho to the circle along a ray at angle a
    # from the outward radial direction
    p = rho * cos_a
    return -p + np.sqrt(np.maximum(p * p + radius**2 - rho**2, 0.0))


def _disk_rays(z, radius, n):
    # Chord lengths are nearly singular at the two tangent directions
    # (angle +-pi/2 from outward), at imaginary distance about sqrt(R^2 - rho^2)/rho;
    # four pieces graded toward those directions.
    zhat, rho = _outward(z)
    eps = np.sqrt(np.maximum(radius**2 - rho**2, 0.0)) / np.maximum(rho, 1e-300)
    eps = np.clip(eps, 1e-300, 1e3)
    quarter = np.full(z.size, 0.5 * np.pi)
    off, w = _graded(quarter, eps, n)
    angles = np.concatenate(
        [0.5 * np.pi - off, 0.5 * np.pi + off, -0.5 * np.pi + off, -0.5 * np.pi - off],
        axis=1,
    )
    weight = np.concatenate([w, w, w, w], axis=1)
    e = zhat[:, None] * np.exp(1j * angles)
    length = _circle_exit(rho[:, None], np.cos(angles), radius)
    t1 = length[..., None]
    return RayFamily(z, e, weight, np.zeros_like(t1), t1)


def _rectangle_rays(z, width, height, n):
    # Each wall is parametrized by s = asinh(y/d): y the tangent coordinate of the
    # exit point from the foot of the perpendicular, d the distance to the wall.
    # Chord length d cosh(s) and angular measure ds/cosh(s) are then smooth in s,
    # even for origins very close to the wall.
    x, gw = np.polynomial.legendre.leggauss(n)
    corners = np.array([width, width + 1j * height, 1j * height, 0.0])
    normals = np.array([1.0, 1j, -1.0, -1j])
    dists = np.stack([width - z.real, height - z.imag, z.real, z.imag], axis=1)
    dirs, weights, lengths = [], [], []
    for k in range(4):
        nk = normals[k]
        tk = 1j * nk
        d = np.clip(dists[:, k], 0.0, None)
        foot = z + d * nk
        lo = (np.conj(tk) * (corners[k] - foot)).real
        hi = (np.conj(tk) * (corners[(k + 1) % 4] - foot)).real
        live = d > 0
        d_safe = np.where(live, d, 1.0)
        s_lo = np.arcsinh(lo / d_safe)
        s_hi = np.arcsinh(hi / d_safe)
        half = np.where(live, 0.5 * (s_hi - s_lo), 0.0)
        s = 0.5 * (s_hi + s_lo)[:, None] + half[:, None] * x
        cosh = np.cosh(s)
        dirs.append((nk + tk * np.sinh(s)) / cosh)
        weights.append(half[:, None] * gw / cosh)
        lengths.append(np.where(live[:, None], d_safe[:, None] * cosh, 0.0))
    e = np.concatenate(dirs, axis=1)
    weight = np.concatenate(weights, axis=1)
    t1 = np.concatenate(lengths, axis=1)[..., None]
    return RayFamily(z, e, weight, np.zeros_like(t1), t1)


def _annulus_rays(z, r, big_r, n):
    zhat, rho = _outward(z)
    if np.any(rho <= r) or np.any(rho >= big_r):
        raise ValueError("annulus ray origins must lie strictly inside the annulus")
    kappa = r / rho
    alpha0 = np.arcsin(kappa)

    # Rays missing the hole: angle a from outward in (-(pi - alpha0), pi - alpha0),
    # graded toward the outer-circle tangent directions a = +-pi/2.
    eps_out = np.maximum(np.sqrt(big_r**2 - rho**2) / rho, 1e-300)
    off_q, w_q = _graded(np.full(z.size, 0.5 * np.pi), eps_out, n)
    off_s, w_s = _graded(0.5 * np.pi - alpha0, eps_out, n)
    a_miss = np.concatenate(
        [0.5 * np.pi - off_q, 0.5 * np.pi + off_s, -0.5 * np.pi + off_q, -0.5 * np.pi - off_s],
        axis=1,
    )
    w_miss = np.concatenate([w_q, w_s, w_q, w_s], axis=1)
    s_miss = _circle_exit(rho[:, None], np.cos(a_miss), big_r)
    t0_miss = np.zeros(s_miss.shape + (2,))
    t1_miss = np.stack([s_miss, np.zeros_like(s_miss)], axis=-1)

    # Rays through the hole: angle b from the inward direction with
    # sin(b) = kappa sin(theta), theta in (-pi/2, pi/2); the chord through the
    # hole is then rho cos(b) -+ r cos(theta). Graded toward theta = +-pi/2,
    # where the Jacobian is nearly singular for origins close to the hole.
    eps_in = np.maximum(np.sqrt(1.0 - kappa**2), 1e-300)
    off_h, w_h = _graded(np.full(z.size, 0.5 * np.pi), eps_in, n)
    theta = np.concatenate([0.5 * np.pi - off_h, -0.5 * np.pi + off_h], axis=1)
    gw = np.concatenate([w_h, w_h], axis=1)
    sin_b = kappa[:, None] * np.sin(theta)
    cos_b = np.sqrt(1.0 - sin_b**2)
    b = np.arcsin(sin_b)
    cos_t = np.cos(theta)
    w_hit = gw * kappa[:, None] * cos_t / cos_b
    mid = rho[:, None] * cos_b
    half_chord = r * cos_t
    s_hit = _circle_exit(rho[:, None], -cos_b, big_r)
    t0_hit = np.stack([np.zeros_like(mid), mid + half_chord], axis=-1)
    t1_hit = np.stack([mid - half_chord, s_hit], axis=-1)

    angles = np.concatenate([a_miss, np.pi + b], axis=1)
    e = zhat[:, None] * np.exp(1j * angles)
    weight = np.concatenate([w_miss, w_hit], axis=1)
    t0 = np.concatenate([t0_miss, t0_hit], axis=1)
    t1 = np.concatenate([t1_miss, t1_hit], axis=1)
    return RayFamily(z, e, weight, t0, t1)


def polar_rays(spec: DomainSpec, z, n_angle):
    """Polar ray family centred at each point of ``z``.

    ``n_angle`` is the number of Gauss-Legendre nodes per smooth angular
    piece: four pieces for disks and rectangles, six for annuli. Points on the boundary of disks and rectangles are
    allowed; annulus origins must be interior.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if spec.kind == "disk":
        return _disk_rays(z, spec.radius, n_angle)
    if spec.kind == "annulus":
        return _annulus_rays(z, spec.r_inner, spec.r_outer, n_angle)
    return _rectangle_rays(z, spec.width, spec.height, n_angle)


def polar_integral(
    spec: DomainSpec,
    z,
    f: Optional[Callable],
    kernel: Optional[Callable] = None,
    n_angle=32,
    n_t=24,
    chunk_elems=2_000_000,
):
    """``sum over rays of weight * kernel(direction) * chord integral of f``.

    With ``f=None`` the chord integrals are chord lengths (``f == 1``). With
    ``kernel=None`` the kernel is 1, which gives ``int_D f(w)/|w - z| dA(w)``;
    ``kernel=lambda e: -np.conj(e) / np.pi`` gives the Cauchy transform.
    """
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    per_ray = 2 if spec.kind == "annulus" else 1
    n_rays = 6 * n_angle if spec.kind == "annulus" else 4 * n_angle
    step = max(1, chunk_elems // (n_rays * per_ray * (n_t if f is not None else 1)))
    out = np.empty(flat.size, dtype=complex)
    for i0 in range(0, flat.size, step):
        rays = polar_rays(spec, flat[i0 : i0 + step], n_angle)
        if f is None:
            chord = rays.chord_lengths()
        else:
            chord = rays.chord_integrals(f, n_t)
        factor = rays.weight if kernel is None else rays.weight * kernel(rays.direction)
        out[i0 : i0 + step] = np.sum(factor * chord, axis=1)
    return out.reshape(z.shape)[()]

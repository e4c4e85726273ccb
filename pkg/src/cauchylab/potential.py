"""The operator ``(S_D f)(x) = int_D f(y) / |x - y| dy`` and its top eigenvalue.

Two discretizations are provided:

* a 2-D Nystrom matrix on a quadrature mesh, symmetrized with ``sqrt(w)``;
* for disks and annuli, the 1-D radial operator obtained by integrating the
  kernel over the angle, which is exact for the (radial) top eigenfunction.

``C_sharp(D) = lambda_max(S_D) / (2 pi)`` is the sharp constant of the
``|xi|^{-1}`` Fourier-weighted inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .domains import DomainSpec, QuadratureMesh, build_mesh, polar_integral
from .errors import ConvergenceError
from .specfun import elliptic_k

__all__ = [
    "SdMatrix",
    "SharpConstantReport",
    "assemble_sd",
    "power_iteration",
    "lambda_max",
    "radial_kernel",
    "radial_sd_matrix",
    "radial_sd_lambda_max",
    "row_integral",
    "apply_sd",
    "quadratic_form",
    "schur_bound",
    "sharp_constant",
]

MAX_NODES = 20000
MAX_POWER_ITER = 10000
DIAGONAL_RULES = ("row-exact", "cell-disk")
RADIAL_ORDER = 8
_ROW_CHUNK = 512


@dataclass(frozen=True)
class SdMatrix:
    """Symmetric Nystrom matrix ``A = W^{1/2} K W^{1/2}`` for the kernel ``1/|x - y|``.

    ``diagonal_rule`` names the treatment of the singular diagonal:

    ``"row-exact"``
        ``A_ii = psi(x_i) - sum_{j != i} w_j / |x_i - x_j|`` where
        ``psi(x) = int_D dy / |x - y|`` is computed accurately. Each row of
        the unsymmetrized operator then integrates constants exactly. On
        thin Gauss cells the off-diagonal sum can exceed ``psi`` and the
        diagonal goes negative; off-diagonal entries stay positive.
    ``"cell-disk"``
        ``A_ii = 2 sqrt(pi w_i)``, the integral of ``1/|x_i - y|`` over a disk
        of area ``w_i`` centred at ``x_i``.
    """

    entries: np.ndarray
    mesh: Optional[QuadratureMesh]
    diagonal_rule: str

    @property
    def size(self):
        return self.entries.shape[0]

    def row_sums(self):
        """``sum_j w_j K(x_i, x_j)`` including the diagonal term, per row."""
        sw = np.sqrt(self.mesh.weights)
        return (self.entries @ sw) / sw


def _cell_disk_diagonal(weights):
    return 2.0 * np.sqrt(math.pi * weights)


def assemble_sd(mesh: QuadratureMesh, diagonal_rule="row-exact", n_angle=32) -> SdMatrix:
    """Assemble the symmetrized Nystrom matrix of ``S_D`` on ``mesh``.

    Off-diagonal entries are ``sqrt(w_i w_j) / |x_i - x_j|``; the diagonal
    follows ``diagonal_rule`` (see :class:`SdMatrix`).

    Raises
    ------
    MemoryError
        If the mesh has more than 20000 nodes.
    """
    if diagonal_rule not in DIAGONAL_RULES:
        raise ValueError(f"diagonal_rule must be one of {DIAGONAL_RULES}")
    n = len(mesh)
    if n > MAX_NODES:
        raise MemoryError(f"{n} nodes exceeds the dense-matrix guard of {MAX_NODES}")
    z = mesh.nodes
    w = mesh.weights
    sw = np.sqrt(w)
    a = np.empty((n, n))
    off_sums = np.empty(n)
    for i0 in range(0, n, _ROW_CHUNK):
        rows = slice(i0, min(i0 + _ROW_CHUNK, n))
        idx = np.arange(rows.start, rows.stop)
        d = np.abs(z[rows, None] - z[None, :])
        d[idx - i0, idx] = np.inf
        inv = 1.0 / d
        off_sums[rows] = inv @ w
        # outer product first so that (i, j) and (j, i) round identically
        a[rows] = np.outer(sw[rows], sw) * inv
    # the sqrt(w) similarity leaves the diagonal unchanged
    if diagonal_rule == "row-exact":
        diag = row_integral(mesh.domain, z, n_angle=n_angle) - off_sums
    else:
        diag = _cell_disk_diagonal(w)
    a[np.arange(n), np.arange(n)] = diag
    return SdMatrix(a, mesh, diagonal_rule)


def power_iteration(matrix, tol=1e-12, max_iter=MAX_POWER_ITER):
    """Power iteration from the all-ones vector.

    Returns ``(eigenvalue, unit eigenvector, iterations)``. Stops when the
    Rayleigh quotient changes by less than ``tol`` relatively.

    Raises
    ------
    ConvergenceError
        If ``max_iter`` iterations are not enough.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    a = matrix.entries if isinstance(matrix, SdMatrix) else np.asarray(matrix, dtype=float)
    v = np.ones(a.shape[0]) / math.sqrt(a.shape[0])
    prev = None
    for it in range(1, max_iter + 1):
        y = a @ v
        rq = float(v @ y)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0, v, it
        v = y / norm
        if prev is not None and abs(rq - prev) <= tol * abs(rq):
            return rq, v, it
        prev = rq
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def lambda_max(matrix, tol=1e-12) -> float:
    """Largest eigenvalue of a symmetric matrix with a positive top eigenvector."""
    return power_iteration(matrix, tol)[0]


def radial_kernel(rho, sigma):
    """Angular integral of ``1/|x - y|`` for ``|x| = rho``, ``|y| = sigma``.

    ``K0 = 4 K(m) / (rho + sigma)`` with ``m = 4 rho sigma / (rho + sigma)**2``.
    """
    rho, sigma = np.broadcast_arrays(np.asarray(rho, float), np.asarray(sigma, float))
    total = rho + sigma
    m = 4.0 * rho * sigma / (total * total)
    return 4.0 * elliptic_k(m) / total


def _radial_panels(a, b, n_panels):
    t = np.linspace(0.0, 1.0, n_panels + 1)
    # cosine grading clusters panels at both ends
    breaks = a + (b - a) * 0.5 * (1.0 - np.cos(np.pi * t))
    x, wx = np.polynomial.legendre.leggauss(RADIAL_ORDER)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    nodes = (0.5 * (lo + hi) + 0.5 * (hi - lo) * x).ravel()
    weights = (0.5 * (hi - lo) * wx).ravel()
    panel = np.repeat(np.arange(n_panels), RADIAL_ORDER)
    return nodes, weights, panel, breaks


def _log_antiderivative(t, r):
    # antiderivative of log|t - r|, zero at t = r
    d = t - r
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(d == 0, 0.0, d * np.log(np.abs(d)) - d)


def radial_sd_matrix(radius, n_nodes=256, r_inner=0.0):
    """Symmetrized 1-D Nystrom matrix of ``S_D`` restricted to radial functions.

    ``(S f)(rho) = int K0(rho, sigma) f(sigma) sigma d sigma`` on
    ``[r_inner, radius]``. ``K0`` has a ``-(2/rho) log|rho - sigma|``
    singularity; on the band of neighbouring panels this term is subtracted
    and integrated exactly, and the smooth remainder has diagonal limit
    ``(2/rho) log(8 rho)``.

    Returns ``(nodes, weights, A)`` with ``A_ij = sqrt(v_i) K0 sqrt(v_j)`` off
    the diagonal, ``v = weights * nodes``.
    """
    if n_nodes < 16:
        raise ValueError("n_nodes must be at least 16")
    if not 0 <= r_inner < radius:
        raise ValueError("need 0 <= r_inner < radius")
    n_panels = -(-int(n_nodes) // RADIAL_ORDER)
    s, w, panel, breaks = _radial_panels(float(r_inner), float(radius), n_panels)
    n = s.size
    P, S = s[:, None], s[None, :]
    off = ~np.eye(n, dtype=bool)
    k0 = np.zeros((n, n))
    k0[off] = radial_kernel(np.broadcast_to(P, (n, n))[off], np.broadcast_to(S, (n, n))[off])
    band = (np.abs(panel[:, None] - panel[None, :]) <= 1) & off
    with np.errstate(divide="ignore"):
        log_term = np.where(band, -(2.0 / P) * np.log(np.abs(P - S)), 0.0)

    lo = breaks[np.maximum(panel - 1, 0)]
    hi = breaks[np.minimum(panel + 1, n_panels - 1) + 1]
    exact_band = -(2.0 / s) * (_log_antiderivative(hi, s) - _log_antiderivative(lo, s))
    discrete_band = log_term @ w
    diag_smooth = (2.0 / s) * np.log(8.0 * s)
    # M_ii acts on f(s_i) s_i; the smooth part uses the quadrature weight
    m_diag = w * s * diag_smooth + s * (exact_band - discrete_band)

    v = w * s
    sv = np.sqrt(v)
    a = np.outer(sv, sv) * k0
    a[np.arange(n), np.arange(n)] = m_diag
    return s, w, a


def radial_sd_lambda_max(radius=1.0, n_nodes=256, r_inner=0.0, tol=1e-13):
    """``lambda_max(S_D)`` for a disk (or annulus when ``r_inner > 0``) via the radial operator.

    The top eigenfunction of the positive, rotation-invariant kernel is
    radial, so the 1-D operator has the same top eigenvalue.
    """
    _, _, a = radial_sd_matrix(radius, n_nodes, r_inner)
    return lambda_max(a, tol)


def row_integral(spec: DomainSpec, x, n_angle=32):
    """``psi(x) = int_D dy / |x - y|`` by polar integration about ``x``."""
    return polar_integral(spec, x, None, None, n_angle=n_angle).real


def apply_sd(spec: DomainSpec, f: Callable, x, n_angle=32, n_t=24):
    """``(S_D f)(x)`` for a smooth ``f`` by polar integration about ``x``."""
    return polar_integral(spec, x, f, None, n_angle=n_angle, n_t=n_t)


def quadratic_form(spec: DomainSpec, f: Callable, level=2, n_angle=32, n_t=24):
    """``<S_D f, f> = int_D conj(f) S_D f`` on a level mesh."""
    mesh = build_mesh(spec, level)
    sf = apply_sd(spec, f, mesh.nodes, n_angle, n_t)
    return float(np.real(np.sum(mesh.weights * sf * np.conj(f(mesh.nodes)))))


def _pattern_search(g, x0, step, spec, min_step):
    best_x, best = x0, g(x0)
    moves = np.array([1, -1, 1j, -1j])
    while step > min_step:
        cand = best_x + step * moves
        cand = cand[spec.contains(cand)]
        vals = np.array([g(c) for c in cand])
        if vals.size and vals.max() > best:
            i = int(np.argmax(vals))
            best_x, best = cand[i], vals[i]
        else:
            step *= 0.5
    return best_x, best


def schur_bound(spec: DomainSpec, n_grid=41, n_angle=32, refine=True, full_output=False):
    """``(1 / 2 pi) sup_x int_D dy / |x - y|``, an upper bound for ``C_sharp(D)``.

    The supremum is taken over an ``n_grid x n_grid`` interior lattice and,
    with ``refine``, polished by a compass search from the best lattice point.
    With ``full_output`` also returns the maximizing point.
    """
    pts = spec.sample_grid(n_grid)
    vals = row_integral(spec, pts, n_angle)
    i = int(np.argmax(vals))
    x_best, v_best = pts[i], float(vals[i])
    if refine:
        step = spec.diameter() / (n_grid + 1)

        def g(x):
            return float(row_integral(spec, np.array([x]), n_angle)[0])

        x_best, v_best = _pattern_search(g, x_best, step, spec, 1e-7 * spec.diameter())
    bound = v_best / (2.0 * math.pi)
    return (bound, complex(x_best)) if full_output else bound


@dataclass(frozen=True)
class SharpConstantReport:
    """Nystrom estimates of ``C_sharp(D)`` per mesh level plus bounds.

    ``per_level`` holds ``(level, node_count, lambda_max, c_estimate)``.
    ``lower_bound`` is the Rayleigh quotient of ``f == 1``; ``schur_upper``
    is :func:`schur_bound`.
    """

    domain: DomainSpec
    diagonal_rule: str
    per_level: tuple
    extrapolated: float
    fitted_order: Optional[float]
    order_used: float
    lower_bound: float
    schur_upper: float
    radial_value: Optional[float] = None
    eigenvector: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def estimates(self):
        return np.array([row[3] for row in self.per_level])


def richardson(values, ratio=2.0, default_order=1.0, order_range=(0.5, 4.0)):
    """Extrapolate the last of a sequence with mesh size shrinking by ``ratio``.

    The order is fitted from the last three values and used when it falls in
    ``order_range``; otherwise ``default_order`` is assumed. Returns
    ``(extrapolated, fitted_order, order_used)``.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(values[-1]), None, default_order
    fitted = None
    if values.size >= 3:
        d1, d2 = values[-2] - values[-3], values[-1] - values[-2]
        if d1 != 0 and d2 != 0 and d1 / d2 > 0:
            fitted = math.log(d1 / d2) / math.log(ratio)
    p = fitted if fitted is not None and order_range[0] <= fitted <= order_range[1] else default_order
    diff = values[-1] - values[-2]
    return float(values[-1] + diff / (ratio**p - 1.0)), fitted, p


def sharp_constant(
    spec: DomainSpec,
    max_level=2,
    min_level=0,
    diagonal_rule="row-exact",
    tol=1e-12,
    n_angle=32,
) -> SharpConstantReport:
    """Estimate ``C_sharp(D) = lambda_max(S_D) / (2 pi)`` on levels ``min_level..max_level``.

    Each level halves the mesh spacing; the sequence is Richardson
    extrapolated with the order fitted from the last three levels.
    """
    if max_level < 2 or max_level - min_level < 2:
        raise ValueError("sharp_constant needs at least three levels up to max_level >= 2")
    rows = []
    vec = None
    for level in range(min_level, max_level + 1):
        mesh = build_mesh(spec, level)
        mat = assemble_sd(mesh, diagonal_rule, n_angle)
        lam, vec, _ = power_iteration(mat, tol)
        rows.append((level, len(mesh), lam, lam / (2.0 * math.pi)))
        del mat
    extrap, fitted, used = richardson([r[3] for r in rows])

    psi = row_integral(spec, mesh.nodes, n_angle)
    lower = float(np.sum(mesh.weights * psi)) / (2.0 * math.pi * spec.area())
    upper = schur_bound(spec)
    radial = None
    if spec.is_radial:
        lo, hi = spec.radial_support
        radial = radial_sd_lambda_max(hi, 256, lo) / (2.0 * math.pi)
    return SharpConstantReport(
        domain=spec,
        diagonal_rule=diagonal_rule,
        per_level=tuple(rows),
        extrapolated=extrap,
        fitted_order=fitted,
        order_used=used,
        lower_bound=lower,
        schur_upper=upper,
        radial_value=radial,
        eigenvector=vec,
    )

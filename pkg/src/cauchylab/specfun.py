"""Bessel functions of orders 0 and 1, the complete elliptic integral K, and a
bracketing root finder.

Everything is plain float64 numpy, vectorized over the argument.

The Bessel functions use three argument ranges:

* ``x <= 8``: ascending power series (log-augmented for Y).
* ``8 < x <= 25``: Miller backward recurrence for J_n, normalized with
  ``J_0 + 2 sum J_2k = 1``; Y_0 and Y_1 follow from the Neumann series in the
  recurrence values.
* ``x > 25``: Hankel asymptotic expansion in amplitude/phase form.

The middle range exists because in double precision the series loses about
``exp(x) * eps`` to cancellation while the asymptotic expansion bottoms out
near ``exp(-2x)``, and no single switch point gives 1e-12 on both sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ConvergenceError, NoSignChangeError

__all__ = [
    "RootBracket",
    "bessel_j",
    "bessel_y",
    "elliptic_k",
    "bessel_j0_first_zero",
    "bracketed_root",
]

EULER_GAMMA = 0.57721566490153286061

SERIES_MAX = 8.0
ASYMPTOTIC_MIN = 25.0

_SERIES_TERMS = 40
_HANKEL_TERMS = 20
_MILLER_MARGIN = 40


def _check_order(order):
    if order not in (0, 1):
        raise ValueError(f"Bessel order must be 0 or 1, got {order!r}")


def _as_float_array(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("Bessel argument must be finite")
    return x


def _j_series(order, x):
    half = 0.5 * x
    q = -half * half
    term = half if order == 1 else np.ones_like(x)
    total = term.copy()
    for m in range(1, _SERIES_TERMS):
        term = term * q / (m * (m + order))
        total += term
    return total


def _y_series(order, x):
    half = 0.5 * x
    q = -half * half
    log_part = np.log(half) + EULER_GAMMA
    if order == 0:
        # Y0 = (2/pi)[(log(x/2) + gamma) J0 - sum_{k>=1} H_k q^k / (k!)^2]
        term = np.ones_like(x)
        j0 = term.copy()
        acc = np.zeros_like(x)
        harmonic = 0.0
        for k in range(1, _SERIES_TERMS):
            term = term * q / (k * k)
            harmonic += 1.0 / k
            j0 += term
            acc += harmonic * term
        return (2.0 / math.pi) * (log_part * j0 - acc)
    # Y1 = -2/(pi x) + (2/pi)(log(x/2) + gamma) J1 - (1/pi) sum (H_k + H_{k+1}) t_k
    term = half.copy()
    j1 = term.copy()
    acc = term * 1.0  # H_0 + H_1 = 1
    h_k = 0.0
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (k + 1))
        h_k += 1.0 / k
        j1 += term
        acc += (2.0 * h_k + 1.0 / (k + 1)) * term
    return -2.0 / (math.pi * x) + (2.0 / math.pi) * log_part * j1 - acc / math.pi


def _miller(x):
    """Normalized J_0..J_N at each x by backward recurrence.

    Returns an array of shape (N + 2, len(x)).
    """
    n_top = int(np.max(x)) + _MILLER_MARGIN
    n_top += n_top % 2
    vals = np.zeros((n_top + 2, x.size))
    vals[n_top] = 1e-30
    for n in range(n_top, 0, -1):
        vals[n - 1] = (2.0 * n / x) * vals[n] - vals[n + 1]
    norm = vals[0] + 2.0 * vals[2::2].sum(axis=0)
    return vals / norm


def _j_miller(order, x):
    return _miller(x)[order]


def _y_miller(order, x):
    vals = _miller(x)
    log_part = np.log(0.5 * x) + EULER_GAMMA
    n_top = vals.shape[0] - 2
    k = np.arange(1, n_top // 2 + 1)
    sign = np.where(k % 2 == 0, 1.0, -1.0)[:, None]
    if order == 0:
        neumann = (sign * vals[2 * k] / k[:, None]).sum(axis=0)
        return (2.0 / math.pi) * (log_part * vals[0] - 2.0 * neumann)
    neumann = (sign * (vals[2 * k - 1] - vals[2 * k + 1]) / k[:, None]).sum(axis=0)
    return (2.0 / math.pi) * (-vals[0] / x + log_part * vals[1] + neumann)


def _hankel_pq(order, x):
    mu = 4.0 * order * order
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, _HANKEL_TERMS):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if k % 2 == 1:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += term if (k // 2) % 2 == 0 else -term
    return p, q


def _phase(order, x):
    # cos/sin of x - (order/2 + 1/4) pi, expanded to avoid cancellation in the shift
    c, s = np.cos(x), np.sin(x)
    r = math.sqrt(0.5)
    if order == 0:
        return r * (c + s), r * (s - c)
    return r * (s - c), -r * (c + s)


def _j_asymptotic(order, x):
    p, q = _hankel_pq(order, x)
    cos_chi, sin_chi = _phase(order, x)
    return np.sqrt(2.0 / (math.pi * x)) * (p * cos_chi - q * sin_chi)


def _y_asymptotic(order, x):
    p, q = _hankel_pq(order, x)
    cos_chi, sin_chi = _phase(order, x)
    return np.sqrt(2.0 / (math.pi * x)) * (p * sin_chi + q * cos_chi)


def _dispatch(x, series, miller, asymptotic):
    out = np.empty_like(x)
    low = x <= SERIES_MAX
    high = x > ASYMPTOTIC_MIN
    mid = ~(low | high)
    if low.any():
        out[low] = series(x[low])
    if mid.any():
        out[mid] = miller(x[mid])
    if high.any():
        out[high] = asymptotic(x[high])
    return out


def bessel_j(order, x):
    """Bessel function of the first kind J_0 or J_1.

    Parameters
    ----------
    order : {0, 1}
    x : float or array_like
        Non-negative finite argument(s).

    Returns
    -------
    float or ndarray
        Same shape as ``x``.
    """
    _check_order(order)
    x = _as_float_array(x)
    if np.any(x < 0):
        raise ValueError("bessel_j is defined here for x >= 0 only")
    flat = x.ravel()
    out = _dispatch(
        flat,
        lambda t: _j_series(order, t),
        lambda t: _j_miller(order, t),
        lambda t: _j_asymptotic(order, t),
    )
    return out.reshape(x.shape)[()]


def bessel_y(order, x):
    """Bessel function of the second kind Y_0 or Y_1 for ``x > 0``."""
    _check_order(order)
    x = _as_float_array(x)
    if np.any(x <= 0):
        raise ValueError("bessel_y requires x > 0")
    flat = x.ravel()
    out = _dispatch(
        flat,
        lambda t: _y_series(order, t),
        lambda t: _y_miller(order, t),
        lambda t: _y_asymptotic(order, t),
    )
    return out.reshape(x.shape)[()]


def elliptic_k(m):
    """Complete elliptic integral of the first kind, parameter ``m = k**2``.

    Computed as ``pi / (2 AGM(1, sqrt(1 - m)))``.
    """
    m = np.asarray(m, dtype=float)
    if np.any(~np.isfinite(m)) or np.any(m < 0) or np.any(m >= 1):
        raise ValueError("elliptic_k requires 0 <= m < 1")
    a = np.ones_like(m)
    b = np.sqrt(1.0 - m)
    # a and b can settle one ulp apart, so the loop is capped rather than exact
    for _ in range(64):
        if np.all(np.abs(a - b) < 1e-16 * a):
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return (0.5 * math.pi / a)[()]


@dataclass(frozen=True)
class RootBracket:
    """Search interval ``[lo, hi]`` with absolute tolerance ``tol``."""

    lo: float
    hi: float
    tol: float = 1e-12

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty bracket [{self.lo}, {self.hi}]")
        if not self.tol > 0:
            raise ValueError("bracket tolerance must be positive")


def bracketed_root(f: Callable[[float], float], bracket: RootBracket, max_iter=200):
    """Root of ``f`` in ``bracket`` by bisection with safeguarded secant steps.

    A secant step is taken only when it lands strictly inside the current
    bracket and the previous step shrank the bracket by at least half;
    otherwise the step bisects. The result lies within ``bracket.tol`` of a
    sign change of ``f``.

    Raises
    ------
    NoSignChangeError
        If ``f(lo)`` and ``f(hi)`` have the same strict sign.
    ConvergenceError
        If ``max_iter`` steps do not reach the tolerance.
    """
    a, b = float(bracket.lo), float(bracket.hi)
    fa, fb = float(f(a)), float(f(b))
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise NoSignChangeError(f"no sign change on [{a}, {b}]: f = {fa}, {fb}")

    force_bisect = False
    for _ in range(max_iter):
        width = b - a
        if width <= 2.0 * bracket.tol:
            return 0.5 * (a + b)
        x = b - fb * (b - a) / (fb - fa)
        if force_bisect or not a < x < b:
            x = 0.5 * (a + b)
        fx = float(f(x))
        if fx == 0.0:
            return x
        if (fx > 0) == (fa > 0):
            a, fa = x, fx
        else:
            b, fb = x, fx
        force_bisect = (b - a) > 0.5 * width
    raise ConvergenceError(f"bracketed_root did not converge in {max_iter} steps")


@lru_cache(maxsize=None)
def bessel_j0_first_zero():
    """First positive zero of J_0 (about 2.40483)."""
    return bracketed_root(lambda t: bessel_j(0, t), RootBracket(2.0, 3.0, 1e-15))

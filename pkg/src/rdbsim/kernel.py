"""Steering vectors, the Fejer beam-gain kernel and wrapped-angle arithmetic.

Directions are *normalized* angles ``theta = 2 d sin(phi) / lambda`` with
critical spacing ``d / lambda = 1/2``. The steering vector is periodic in
``theta`` with period 2, so every direction has a canonical representative
in ``(-1, 1]``.

All simulation code goes through :func:`fejer_gain` / :func:`beam_power`,
which cost O(1) per (user, beam) pair regardless of the array size ``M``.
Explicit length-``M`` vectors (:func:`steering_vector`,
:func:`inner_product`) exist as an independent reference.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "wrap_direction",
    "steering_vector",
    "inner_product",
    "fejer_gain",
    "beam_power",
]

# Veltkamp splitter for 53-bit doubles: hi keeps the top 26 bits.
_SPLITTER = 134217729.0  # 2**27 + 1


def _check_antennas(M):
    if int(M) != M or M < 1:
        raise ValueError(f"antenna count M must be a positive integer, got {M!r}")
    return int(M)


def wrap_direction(x):
    """Map a normalized direction onto its canonical representative in (-1, 1].

    Values already in range are returned unchanged, so wrapping is
    idempotent bit for bit. Accepts scalars or arrays.

    Raises
    ------
    ValueError
        If any input is NaN or infinite.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("direction must be finite")
    inside = (x > -1.0) & (x <= 1.0)
    if np.all(inside):
        return x[()] if x.ndim == 0 else x.copy()
    r = np.remainder(x, 2.0)
    # r in [0, 2); r - 2 is exact for r in (1, 2)
    r = np.where(r > 1.0, r - 2.0, r)
    out = np.where(inside, x, r)
    return out[()] if out.ndim == 0 else out


def steering_vector(M, theta):
    """Unit-norm ULA steering vector ``a(theta)`` of length ``M``.

    Entry ``n`` is ``exp(-i pi n theta) / sqrt(M)``. Phases are formed in
    extended precision and reduced modulo 2 before exponentiation, so each
    entry is accurate to about one ulp even for large ``n``.
    """
    M = _check_antennas(M)
    theta = float(wrap_direction(theta))
    n = np.arange(M, dtype=np.longdouble)
    phase = np.remainder(n * np.longdouble(theta), 2)
    pi = np.longdouble("3.14159265358979323846264338327950288")
    entries = np.exp(-1j * pi * phase) / np.sqrt(np.longdouble(M))
    return entries.astype(np.complex128)


def inner_product(u, v):
    """Conjugate-linear inner product ``u^H v``.

    Accumulated in extended precision so that it can serve as a reference
    for the closed-form kernel near its nulls.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"vectors must be 1-D with equal lengths, got {u.shape} and {v.shape}")
    return complex(np.vdot(u.astype(np.clongdouble), v.astype(np.clongdouble)))


def _two_diff(a, b):
    """Return ``(s, e)`` with ``s = fl(a - b)`` and ``s + e == a - b`` exactly."""
    s = a - b
    bb = s - a
    e = (a - (s - bb)) - (b + bb)
    return s, e


def _half_turns(M, d, err=0.0):
    """``M * (d + err)`` reduced modulo 4, with the product ``M * d`` formed exactly.

    ``sin(pi/2 * t)`` only depends on ``t`` modulo 4, and the reduction
    keeps the absolute rounding error near 1e-15 instead of growing
    with ``M * |d|``.
    """
    c = _SPLITTER * d
    hi = c - (c - d)
    lo = d - hi
    # exact for M < 2**26
    t = M * hi
    t = t - 4.0 * np.rint(0.25 * t)
    return t + (M * lo + M * err)


def _fejer(M, d, err=0.0):
    """Kernel body for an already wrapped difference ``d + err``."""
    den = np.sin(0.5 * np.pi * (d + err))
    num = np.sin(0.5 * np.pi * _half_turns(M, d, err))
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.abs(num / den) / M
    g = np.where(d == 0.0, 1.0, np.minimum(g, 1.0))
    return g[()] if g.ndim == 0 else g


def fejer_gain(M, delta):
    """Fejer kernel ``F_M(delta) = |sin(pi M delta / 2) / sin(pi delta / 2)| / M``.

    This is ``|a(theta)^H a(theta + delta)|``: the magnitude of the
    correlation between two steering vectors whose directions differ by
    ``delta``. Even, 2-periodic, bounded in ``[0, 1]``, and exactly 1 when
    ``delta`` wraps to 0. Vectorized over ``delta``.
    """
    M = _check_antennas(M)
    return _fejer(M, wrap_direction(delta))


def beam_power(M, theta, vartheta):
    """Array gain ``M |a(theta)^H a(vartheta)|^2`` delivered by a beam.

    Evaluated as ``M * F_M(vartheta - theta)^2``. The difference is carried
    exactly (value plus rounding error), so the result matches the
    explicit vector product to high relative accuracy even close to a
    null. Broadcasts over ``theta`` and ``vartheta``.
    """
    M = _check_antennas(M)
    theta = np.asarray(theta, dtype=float)
    vartheta = np.asarray(vartheta, dtype=float)
    d, err = _two_diff(vartheta, theta)
    if not np.all(np.isfinite(d)):
        raise ValueError("direction must be finite")
    # |d| < 4 for canonical inputs; shifting by 2 is exact there
    d = np.where(d > 1.0, d - 2.0, np.where(d <= -1.0, d + 2.0, d))
    if np.any(np.abs(d) > 1.0):
        w = wrap_direction(d)
        err = np.where(w == d, err, 0.0)
        d = w
    g = _fejer(M, d, err)
    return M * g * g

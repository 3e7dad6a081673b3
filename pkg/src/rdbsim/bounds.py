"""Closed-form rate brackets, limiting ratios and probabilities.

Rate brackets are of the form ``log(1 + M^e)`` with ``e = e0 - eps`` for
the lower end and ``e0 + eps`` for the upper end. They are asymptotic
statements, so for finite ``M`` they serve as overlays and loose oracles.
Functions reject parameters outside the region where the corresponding
statement holds. Callers that want an empty cell instead catch
``ValueError``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .schemes import Scheme

__all__ = [
    "BoundBracket",
    "AsymptoticRatio",
    "lemma1_bounds",
    "thm1_bounds",
    "thm2_ratio",
    "thm3_bounds",
    "corollary1_ratio",
    "thm4_bounds",
    "thm5_bounds",
    "fro_theoretical",
    "fro_empirical",
    "cone_probability",
    "cone_nonempty_probability",
    "perfect_csi_asymptote",
]

FRACTION = "fraction"
TRANSITION = "transition"
VANISHING = "vanishing"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class BoundBracket:
    """Lower and upper values with the ``M``-exponents that produced them."""

    lower: float
    upper: float
    exponent_lower: float
    exponent_upper: float

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"bracket is inverted: {self.lower} > {self.upper}")

    def contains(self, value):
        return self.lower <= value <= self.upper

    @property
    def width(self):
        return self.upper - self.lower


@dataclass(frozen=True)
class AsymptoticRatio:
    """Limit of a rate ratio together with the regime it belongs to.

    ``regime`` is one of ``"fraction"`` (positive limit), ``"transition"``
    (boundary point, limit 0), ``"vanishing"`` (the rate itself tends to
    0, limit 0) or ``"degenerate"`` (no limit is claimed, ``value`` is NaN).
    """

    value: float
    regime: str

    def __float__(self):
        return float(self.value)


def _check_M(M):
    if not (M >= 1 and math.isfinite(M)):
        raise ValueError(f"M must be a finite number >= 1, got {M!r}")
    return float(M)


def _check_open_unit(name, x, lo=0.0, hi=1.0):
    if not (lo < x < hi):
        raise ValueError(f"{name} must lie in ({lo:g}, {hi:g}), got {x!r}")
    return float(x)


def _check_eps(eps):
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError(f"eps must be positive, got {eps!r}")
    return float(eps)


def _log_bracket(M, centre, eps):
    lo, hi = centre - eps, centre + eps
    return BoundBracket(math.log1p(M ** lo), math.log1p(M ** hi), lo, hi)


def lemma1_bounds(M, p):
    """Bounds on the exceedance probability ``Pr{Z > M^p}`` of one beam.

    Returns ``(1/(2 pi), 4/pi) * M^(-(1+p)/2)``.
    """
    M = _check_M(M)
    p = _check_open_unit("p", p, -1.0, 1.0)
    e = -(1.0 + p) / 2.0
    scale = M ** e
    return BoundBracket(scale / (2.0 * math.pi), 4.0 * scale / math.pi, e, e)


def thm1_bounds(M, q, eps=0.1):
    """Single-beam rate bracket ``log(1 + M^(2q-1 -/+ eps))`` for ``K = M^q`` unit-gain users."""
    M = _check_M(M)
    q = _check_open_unit("q", q)
    eps = _check_eps(eps)
    centre = 2.0 * q - 1.0
    if not (-1.0 < centre - eps and centre + eps < 1.0):
        raise ValueError(f"2q-1 +/- eps must stay inside (-1, 1); got q={q}, eps={eps}")
    return _log_bracket(M, centre, eps)


def thm2_ratio(q):
    """Limit of single-beam rate over perfect-CSI rate when ``K = M^q``."""
    q = _check_open_unit("q", q)
    if q > 0.5:
        return AsymptoticRatio(2.0 * q - 1.0, FRACTION)
    if q == 0.5:
        return AsymptoticRatio(0.0, TRANSITION)
    return AsymptoticRatio(0.0, VANISHING)


def thm3_bounds(M, q, ell, eps=0.1):
    """Multi-beam single-user bracket ``log(1 + M^(2q+2l-1 -/+ eps))`` with ``S = M^l`` beams."""
    M = _check_M(M)
    q = _check_open_unit("q", q)
    ell = _check_open_unit("ell", ell)
    eps = _check_eps(eps)
    if not q + ell < 1.0:
        raise ValueError(f"requires q + ell < 1, got {q + ell}")
    return _log_bracket(M, 2.0 * (q + ell) - 1.0, eps)


def corollary1_ratio(q, ell):
    """Limit of the multi-beam single-user rate over the perfect-CSI rate.

    ``2(q + l) - 1`` for ``1/2 < q + l < 1``; zero at the transition
    ``q + l = 1/2``; NaN with regime ``"degenerate"`` below it.
    """
    q = _check_open_unit("q", q)
    if not 0.0 <= ell < 1.0:
        raise ValueError(f"ell must lie in [0, 1), got {ell!r}")
    s = q + ell
    if s >= 1.0:
        raise ValueError(f"requires q + ell < 1, got {s}")
    if s > 0.5:
        return AsymptoticRatio(2.0 * s - 1.0, FRACTION)
    if s == 0.5:
        return AsymptoticRatio(0.0, TRANSITION)
    return AsymptoticRatio(math.nan, DEGENERATE)


def _check_multiuser(q, ell, eps):
    q = _check_open_unit("q", q)
    eps = _check_eps(eps)
    if not 0.0 < ell < q - eps / 2.0:
        raise ValueError(f"requires 0 < ell < q - eps/2 = {q - eps / 2.0:g}, got ell={ell!r}")
    return q, float(ell), eps


def thm4_bounds(M, q, ell, eps=0.1):
    """Per-user rate bracket under a fixed total power: ``log(1 + M^(2q-1-l -/+ eps))``."""
    M = _check_M(M)
    q, ell, eps = _check_multiuser(q, ell, eps)
    return _log_bracket(M, 2.0 * q - 1.0 - ell, eps)


def thm5_bounds(M, q, ell, eps=0.1):
    """Per-user rate bracket under a fixed per-user power: ``log(1 + M^(2q-1 -/+ eps))``.

    The bracket does not depend on ``ell``, which only enters the
    admissibility conditions ``ell < q - eps/2`` and ``ell < 1/2``.
    """
    M = _check_M(M)
    q, ell, eps = _check_multiuser(q, ell, eps)
    if not ell < 0.5:
        raise ValueError(f"requires ell < 1/2, got {ell}")
    return _log_bracket(M, 2.0 * q - 1.0, eps)


def fro_theoretical(scheme, q):
    """Fractional rate order: the exponent ``gamma`` in ``rate ~ M^gamma``.

    Single beam: 0 above ``q = 1/2`` and ``2q - 1`` below. Multi-beam
    single-user (with ``S`` large enough to reach the log-growth regime): 0.
    Multi-beam multi-user: ``2q - 1``.
    """
    scheme = Scheme.parse(scheme)
    q = _check_open_unit("q", q)
    if scheme is Scheme.SINGLE_BEAM:
        return 0.0 if q > 0.5 else 2.0 * q - 1.0
    if scheme is Scheme.MULTIBEAM_SU:
        return 0.0
    if scheme is Scheme.MULTIBEAM_MU:
        return 2.0 * q - 1.0
    raise ValueError(f"no fractional rate order is defined for scheme {scheme.value!r}")


def fro_empirical(points):
    """Least-squares slope of ``log(rate)`` against ``log(M)``.

    Parameters
    ----------
    points : sequence of (M, rate) pairs
        At least two distinct ``M`` values; every rate must be positive.
    """
    arr = np.asarray(list(points), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise ValueError("need at least two (M, rate) points")
    M, rate = arr[:, 0], arr[:, 1]
    if np.any(M <= 0):
        raise ValueError("M values must be positive")
    if np.unique(M).size < 2:
        raise ValueError("need at least two distinct M values")
    if np.any(~(rate > 0)):
        raise ValueError("rates must be positive to take logarithms")
    slope, _ = np.polyfit(np.log(M), np.log(rate), 1)
    return float(slope)


def cone_probability(M, eta):
    """Approximate probability ``exp(-eta^2 M)`` that a Rayleigh vector lies in one coordinate's cone."""
    M = _check_M(M)
    eta = _check_open_unit("eta", eta)
    return math.exp(-eta * eta * M)


def cone_nonempty_probability(M, K, eta):
    """Probability ``1 - (1 - exp(-eta^2 M))^K`` that at least one of ``K`` users falls in the cone."""
    if not K >= 1:
        raise ValueError(f"K must be >= 1, got {K!r}")
    p = cone_probability(M, eta)
    return -math.expm1(K * math.log1p(-p))


def perfect_csi_asymptote(M, K):
    """Large-system approximation ``log M + log log K`` of the perfect-CSI rate."""
    if not (M >= 3 and K >= 3 and math.isfinite(M) and math.isfinite(K)):
        raise ValueError(f"requires M >= 3 and K >= 3, got M={M!r}, K={K!r}")
    return math.log(M) + math.log(math.log(K))

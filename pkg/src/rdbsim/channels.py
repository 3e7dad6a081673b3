"""UR-LoS and i.i.d. Rayleigh channel sampling.

Under the uniform-random line-of-sight model, user ``k`` has the single
path ``h_k = alpha_k sqrt(M) a(theta_k)`` with ``theta_k ~ Unif(-1, 1]``.
Only ``(theta_k, alpha_k)`` is stored. The length-``M`` vector is never
materialized by the simulation code.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .streams import CHANNEL

__all__ = [
    "GainModel",
    "UrLosUser",
    "UrLosUsers",
    "sample_urlos",
    "sample_rayleigh",
    "complex_normal",
]


class GainModel(str, enum.Enum):
    """Law of the LoS path gain ``alpha_k``."""

    UNIT = "unit"
    COMPLEX_GAUSSIAN = "cn"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"unit": cls.UNIT, "1": cls.UNIT, "cn": cls.COMPLEX_GAUSSIAN,
                   "complex-gaussian": cls.COMPLEX_GAUSSIAN, "rayleigh": cls.COMPLEX_GAUSSIAN}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown gain model {value!r}; expected 'unit' or 'cn'") from None


class UrLosUser(NamedTuple):
    theta: float
    alpha: complex


@dataclass(frozen=True)
class UrLosUsers:
    """A population of UR-LoS users, stored column-wise.

    Indexing yields :class:`UrLosUser` records, so the object behaves like
    a list of users while the simulation works on the arrays.
    """

    theta: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=complex))
        if theta.shape != alpha.shape or theta.ndim != 1:
            raise ValueError("theta and alpha must be 1-D arrays of equal length")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def from_users(cls, users):
        users = list(users)
        return cls(np.array([u.theta for u in users], dtype=float),
                   np.array([u.alpha for u in users], dtype=complex))

    @property
    def gain2(self):
        """``|alpha_k|^2`` for every user."""
        return self.alpha.real ** 2 + self.alpha.imag ** 2

    def __len__(self):
        return self.theta.size

    def __getitem__(self, k):
        return UrLosUser(float(self.theta[k]), complex(self.alpha[k]))

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]


def as_users(users):
    if isinstance(users, UrLosUsers):
        return users
    return UrLosUsers.from_users(users)


def complex_normal(rng, shape, variance=1.0):
    """Circularly-symmetric complex normal draws with ``E|z|^2 = variance``."""
    xy = rng.standard_normal(tuple(np.atleast_1d(shape)) + (2,))
    return np.sqrt(0.5 * variance) * (xy[..., 0] + 1j * xy[..., 1])


def sample_urlos(K, gain, stream):
    """Draw ``K`` independent UR-LoS users from the stream's channel range.

    Directions are drawn first, so the unit-gain and complex-Gaussian
    models see identical directions for the same stream.
    """
    if int(K) != K or K < 1:
        raise ValueError(f"number of users K must be a positive integer, got {K!r}")
    theta, alpha = draw_urlos(stream.generator(CHANNEL), int(K), GainModel.parse(gain))
    return UrLosUsers(theta, alpha)


def draw_urlos(rng, K, gain):
    """Raw ``(theta, alpha)`` arrays for ``K`` users from an already positioned generator."""
    # 1 - 2u maps [0, 1) onto (-1, 1]
    theta = 1.0 - 2.0 * rng.random(K)
    if gain is GainModel.UNIT:
        return theta, np.ones(K, dtype=complex)
    return theta, complex_normal(rng, K)


def sample_rayleigh(K, M, stream, sigma_h2=1.0):
    """``K x M`` matrix of i.i.d. ``CN(0, sigma_h2)`` entries; row ``k`` is ``h_k``."""
    if int(K) != K or K < 1 or int(M) != M or M < 1:
        raise ValueError("K and M must be positive integers")
    if not sigma_h2 > 0:
        raise ValueError(f"sigma_h2 must be positive, got {sigma_h2!r}")
    rng = stream.generator(CHANNEL)
    return complex_normal(rng, (int(K), int(M)), sigma_h2)

"""Single-realization evaluation of the transmission and scheduling schemes.

Every function here maps one channel realization plus the beam-side
randomness of one :class:`~rdbsim.streams.RandomStream` to a
:class:`TrialOutcome`. Rates are in nats. Noise power is normalized to one.

Tie-breaking is always "lowest index wins" (``np.argmax`` semantics).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .channels import as_users, complex_normal
from .kernel import beam_power, wrap_direction
from .streams import BEAM

__all__ = [
    "Scheme",
    "BeamGrid",
    "FixedTotal",
    "FixedPerUser",
    "TrialOutcome",
    "draw_offset",
    "make_beam_grid",
    "beam_powers",
    "multiuser_sinr",
    "rdb_single_beam",
    "rdb_multibeam_single_user",
    "rdb_multibeam_multi_user",
    "perfect_csi_rate",
    "rbf_rayleigh",
]


class Scheme(str, enum.Enum):
    SINGLE_BEAM = "single-beam"
    MULTIBEAM_SU = "multibeam-su"
    MULTIBEAM_MU = "multibeam-mu"
    PERFECT_CSI = "perfect-csi"
    RBF = "rbf"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown scheme {value!r}; expected one of {names}") from None


@dataclass(frozen=True)
class FixedTotal:
    """Total transmit power ``P_t`` shared equally: ``rho = P_t / S``."""

    p_t: float = 1.0

    def __post_init__(self):
        if not self.p_t > 0:
            raise ValueError("total power must be positive")

    def rho(self, S):
        return self.p_t / S

    def total(self, S):
        return self.p_t


@dataclass(frozen=True)
class FixedPerUser:
    """Every scheduled stream gets power ``rho`` regardless of ``S``."""

    rho_: float = 1.0

    def __post_init__(self):
        if not self.rho_ > 0:
            raise ValueError("per-user power must be positive")

    def rho(self, S):
        return self.rho_

    def total(self, S):
        return self.rho_ * S


@dataclass(frozen=True)
class BeamGrid:
    """``S`` directions spaced ``2/S`` apart on the period-2 circle, starting at ``offset``."""

    offset: float
    S: int

    def __post_init__(self):
        if int(self.S) != self.S or self.S < 1:
            raise ValueError(f"beam count S must be a positive integer, got {self.S!r}")
        object.__setattr__(self, "S", int(self.S))
        object.__setattr__(self, "offset", float(wrap_direction(self.offset)))

    @property
    def directions(self):
        return grid_directions(self.offset, self.S)


@dataclass(frozen=True)
class TrialOutcome:
    """Result of one scheme on one realization.

    ``users[i]`` is the user served on beam ``beams[i]``; ``-1`` marks a
    beam left idle. ``sinr`` holds SNR values for single-user schemes.
    """

    scheme: Scheme
    users: np.ndarray
    beams: np.ndarray
    sinr: np.ndarray
    rates: np.ndarray = field(repr=False)

    @property
    def sum_rate(self):
        return float(np.sum(self.rates))

    @property
    def mean_beam_rate(self):
        return float(np.mean(self.rates))

    @property
    def user(self):
        """Selected user of a single-stream scheme."""
        return int(self.users[0])

    @property
    def beam(self):
        return int(self.beams[0])


def draw_offset(stream, reuse=None):
    """Random beam offset ``vartheta ~ Unif(-1, 1]`` from the stream's beam range."""
    return 1.0 - 2.0 * stream.generator(BEAM, reuse).random()


def make_beam_grid(S, stream=None, offset=None):
    """Equi-spaced beam grid with a random (or forced) common offset."""
    if int(S) != S or S < 1:
        raise ValueError(f"beam count S must be a positive integer, got {S!r}")
    if offset is None:
        if stream is None:
            raise ValueError("either a stream or a forced offset is required")
        offset = draw_offset(stream)
    return BeamGrid(offset, int(S))


def beam_powers(users, M, directions):
    """``K x S`` matrix of received signal powers ``|alpha_k|^2 Z_{k,b}``."""
    users = as_users(users)
    directions = np.atleast_1d(np.asarray(directions, dtype=float))
    return received_powers(users.theta, users.gain2, M, directions)


def received_powers(theta, gain2, M, directions):
    """``gain2[..., k] * beam_power(M, theta[..., k], directions[..., b])``, shape ``(..., K, S)``."""
    Z = beam_power(M, theta[..., :, None], directions[..., None, :])
    return gain2[..., :, None] * Z


def grid_directions(offset, S):
    """Beam directions for one offset or an array of offsets (trailing axis ``S``)."""
    offset = np.asarray(offset, dtype=float)
    return wrap_direction(offset[..., None] + 2.0 * np.arange(S) / S)


def _nonempty(users):
    users = as_users(users)
    if len(users) == 0:
        raise ValueError("at least one user is required")
    return users


def rdb_single_beam(users, M, stream=None, offset=None):
    """One random beam; serve the user with the largest received power.

    The instantaneous rate is ``log(1 + max_k |alpha_k|^2 Z_k)``.
    """
    users = _nonempty(users)
    grid = make_beam_grid(1, stream, offset)
    P = beam_powers(users, M, grid.directions)[:, 0]
    k = int(np.argmax(P))
    snr = P[k : k + 1]
    return TrialOutcome(Scheme.SINGLE_BEAM, np.array([k]), np.array([0]), snr, np.log1p(snr))


def rdb_multibeam_single_user(users, M, S, stream=None, offset=None):
    """Train ``S`` equi-spaced beams; serve the best (user, beam) pair only.

    Users report received power (not SINR). With ``S == 1`` this is
    exactly :func:`rdb_single_beam` for the same offset.
    """
    users = _nonempty(users)
    grid = make_beam_grid(S, stream, offset)
    P = beam_powers(users, M, grid.directions)
    k, b = np.unravel_index(int(np.argmax(P)), P.shape)
    snr = np.array([P[k, b]])
    return TrialOutcome(Scheme.MULTIBEAM_SU, np.array([k]), np.array([b]), snr, np.log1p(snr))


def multiuser_sinr(signal):
    """Per-(user, beam) SINR from a ``K x S`` matrix of received powers.

    Leading axes, if any, are treated as independent realizations.

    ``signal[k, b]`` must already include the per-stream power ``rho``.
    Interference at user ``k`` on beam ``b`` is the sum over the other beams.
    """
    total = signal.sum(axis=-1, keepdims=True)
    interference = np.maximum(total - signal, 0.0)
    return signal / (1.0 + interference)


def _assign(sinr, allow_duplicates):
    K, S = sinr.shape
    if allow_duplicates:
        return np.argmax(sinr, axis=0)
    winners = np.full(S, -1)
    taken = np.zeros(K, dtype=bool)
    for b in range(S):
        col = np.where(taken, -np.inf, sinr[:, b])
        k = int(np.argmax(col))
        if np.isfinite(col[k]):
            winners[b] = k
            taken[k] = True
    return winners


def rdb_multibeam_multi_user(users, M, S, power=FixedTotal(1.0), stream=None, offset=None,
                             allow_duplicate_winners=True):
    """Send ``S`` simultaneous streams, one per equi-spaced beam.

    Beam ``b`` goes to ``argmax_k SINR_{k,b}`` where

        SINR_{k,b} = rho g_k Z_{k,b} / (1 + rho g_k sum_{b' != b} Z_{k,b'}),

    with ``g_k = |alpha_k|^2``. The sum rate adds ``log(1 + SINR)`` over
    beams. By default one user may win several beams. With
    ``allow_duplicate_winners=False`` beams are assigned in index order
    among users not yet served, and a beam with no candidate stays idle
    at rate 0.
    """
    users = _nonempty(users)
    grid = make_beam_grid(S, stream, offset)
    signal = power.rho(grid.S) * beam_powers(users, M, grid.directions)
    sinr = multiuser_sinr(signal)
    winners = _assign(sinr, allow_duplicate_winners)
    served = winners >= 0
    best = np.zeros(grid.S)
    best[served] = sinr[winners[served], np.flatnonzero(served)]
    return TrialOutcome(Scheme.MULTIBEAM_MU, winners, np.arange(grid.S), best, np.log1p(best))


def perfect_csi_rate(users, M):
    """Rate of exact beamforming towards the strongest user: ``log(1 + M max_k |alpha_k|^2)``."""
    users = _nonempty(users)
    if int(M) != M or M < 1:
        raise ValueError("M must be a positive integer")
    return float(np.log1p(M * np.max(users.gain2)))


def random_orthonormal_beams(M, S, stream):
    """``M x S`` matrix with orthonormal columns spanning a uniformly random subspace."""
    rng = stream.generator(BEAM)
    G = complex_normal(rng, (int(M), int(S)))
    Q, R = np.linalg.qr(G)
    d = np.diagonal(R)
    # unit-modulus column phases make the distribution exactly unitarily invariant
    return Q * (d / np.abs(d))


def rbf_rayleigh(H, S, P_t, stream):
    """Random orthonormal beamforming on a rich-scattering channel matrix.

    ``H`` is ``K x M`` with row ``k`` equal to ``h_k``. Each of the ``S``
    beams goes to its max-SINR user. A user may win several beams.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] < 1:
        raise ValueError("H must be a K x M matrix with K >= 1")
    K, M = H.shape
    if int(S) != S or S < 1:
        raise ValueError("S must be a positive integer")
    if S > M:
        raise ValueError(f"cannot form {S} orthonormal beams in dimension {M}")
    if not P_t > 0:
        raise ValueError("P_t must be positive")
    U = random_orthonormal_beams(M, S, stream)
    G = H.conj() @ U
    signal = (P_t / S) * (G.real ** 2 + G.imag ** 2)
    sinr = multiuser_sinr(signal)
    winners = np.argmax(sinr, axis=0)
    best = sinr[winners, np.arange(int(S))]
    return TrialOutcome(Scheme.RBF, winners, np.arange(int(S)), best, np.log1p(best))

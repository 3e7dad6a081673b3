"""Deterministic Monte Carlo estimation and parameter sweeps.

Trial ``t`` of a run always uses ``RandomStream(master_seed, experiment, t)``.
Per-trial results are gathered into an array indexed by ``t`` before any
reduction, so the worker count cannot change a single bit of the output.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import itertools
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .channels import GainModel, draw_urlos, sample_rayleigh, sample_urlos
from .kernel import beam_power, wrap_direction
from .schemes import (
    FixedPerUser,
    FixedTotal,
    Scheme,
    grid_directions,
    multiuser_sinr,
    perfect_csi_rate,
    received_powers,
    rbf_rayleigh,
    rdb_multibeam_multi_user,
    rdb_multibeam_single_user,
    rdb_single_beam,
)
from .streams import BEAM, CHANNEL, RandomStream, trial_generators

__all__ = [
    "SchemeConfig",
    "RateEstimate",
    "ProbabilityEstimate",
    "SweepSpec",
    "estimate_rate",
    "estimate_ratio_to_perfect_csi",
    "simulate_trials",
    "empirical_exceedance",
    "empirical_beam_power",
    "sample_wrapped_difference",
    "empirical_cone",
    "run_sweep",
    "SWEEP_COLUMNS",
    "write_csv",
    "format_csv",
]

DEFAULT_TRIALS = 5000
DEFAULT_M_GRID = (100, 316, 1000, 3162, 10000)
BLOCK = 1 << 16
METRICS = ("sum", "per_beam")


def power_from_spec(kind, value=1.0):
    """Build a power convention from a ``("total" | "per-user", value)`` description."""
    kind = str(kind).lower().replace("_", "-")
    if kind in ("total", "fixed-total"):
        return FixedTotal(float(value))
    if kind in ("per-user", "fixed-per-user"):
        return FixedPerUser(float(value))
    raise ValueError(f"unknown power convention {kind!r}; expected 'total' or 'per-user'")


def _power_fields(power):
    if isinstance(power, FixedTotal):
        return "total", power.p_t
    return "per-user", power.rho_


@dataclass(frozen=True)
class SchemeConfig:
    """One simulation point.

    ``K`` is either given explicitly or derived as ``max(1, round(c_u M^q))``.
    ``S`` likewise from ``ell`` and ``c_b``. The single-beam and
    perfect-CSI schemes always use ``S = 1``. Random beamforming defaults
    to ``S = M`` orthonormal beams.

    ``metric`` selects what a multi-stream trial reports: ``"sum"`` for the
    sum rate over beams, ``"per_beam"`` for the mean per-beam rate, which is
    the rate of a scheduled user.
    """

    scheme: Scheme
    M: int
    K: int | None = None
    q: float | None = None
    c_u: float = 1.0
    S: int | None = None
    ell: float | None = None
    c_b: float = 1.0
    gain: GainModel = GainModel.COMPLEX_GAUSSIAN
    power: FixedTotal | FixedPerUser = FixedTotal(1.0)
    metric: str = "sum"
    bits: bool = False
    allow_duplicate_winners: bool = True
    sigma_h2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        object.__setattr__(self, "gain", GainModel.parse(self.gain))
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M!r}")
        object.__setattr__(self, "M", int(self.M))
        if (self.K is None) == (self.q is None):
            raise ValueError("give exactly one of K or q")
        if self.K is not None and (int(self.K) != self.K or self.K < 1):
            raise ValueError(f"K must be a positive integer, got {self.K!r}")
        if self.q is not None and not 0.0 < self.q <= 1.0:
            raise ValueError(f"q must lie in (0, 1], got {self.q!r}")
        if self.S is not None and self.ell is not None:
            raise ValueError("give at most one of S or ell")
        if self.S is not None and (int(self.S) != self.S or self.S < 1):
            raise ValueError(f"S must be a positive integer, got {self.S!r}")
        if self.ell is not None and not 0.0 <= self.ell < 1.0:
            raise ValueError(f"ell must lie in [0, 1), got {self.ell!r}")
        if not (self.c_u > 0 and self.c_b > 0):
            raise ValueError("c_u and c_b must be positive")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if not self.sigma_h2 > 0:
            raise ValueError("sigma_h2 must be positive")
        multi = (Scheme.MULTIBEAM_SU, Scheme.MULTIBEAM_MU)
        if self.scheme in multi and self.S is None and self.ell is None:
            raise ValueError(f"scheme {self.scheme.value} needs S or ell")
        if self.scheme is Scheme.RBF and self.resolved_S > self.M:
            raise ValueError(f"random beamforming needs S <= M, got S={self.resolved_S}, M={self.M}")
        if self.scheme is Scheme.MULTIBEAM_MU and self.resolved_S > self.resolved_K:
            warnings.warn(f"S={self.resolved_S} beams exceed K={self.resolved_K} users; "
                          "some beams will serve a user twice or stay idle", stacklevel=2)

    @property
    def resolved_K(self):
        if self.K is not None:
            return int(self.K)
        return max(1, round(self.c_u * self.M ** self.q))

    @property
    def resolved_S(self):
        if self.scheme in (Scheme.SINGLE_BEAM, Scheme.PERFECT_CSI):
            return 1
        if self.S is not None:
            return int(self.S)
        if self.ell is not None:
            return max(1, round(self.c_b * self.M ** self.ell))
        return self.M

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def as_dict(self):
        """Flat, JSON-friendly view including the derived ``K`` and ``S``."""
        kind, value = _power_fields(self.power)
        return {
            "scheme": self.scheme.value, "M": self.M, "q": self.q, "K": self.resolved_K,
            "c_u": self.c_u, "ell": self.ell, "S": self.resolved_S, "c_b": self.c_b,
            "gain": self.gain.value, "power": kind, "power_value": value,
            "metric": self.metric, "log_base": 2 if self.bits else "e",
            "allow_duplicate_winners": self.allow_duplicate_winners, "sigma_h2": self.sigma_h2,
        }


@dataclass(frozen=True)
class RateEstimate:
    """Sample mean with its standard error (``std(ddof=1) / sqrt(n)``; 0 when ``n == 1``)."""

    mean: float
    stderr: float
    n_trials: int

    @classmethod
    def from_samples(cls, x):
        x = np.asarray(x, dtype=float)
        n = x.size
        if n == 0:
            raise ValueError("no samples")
        mean = math.fsum(x) / n
        se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean, se, n)


@dataclass(frozen=True)
class ProbabilityEstimate:
    """Event frequency with binomial standard error."""

    p: float
    stderr: float
    n: int

    @classmethod
    def from_count(cls, hits, n):
        p = hits / n
        return cls(p, math.sqrt(p * (1.0 - p) / n), int(n))


def _trial(config, stream):
    """Return ``(rate, perfect_csi_rate)`` in nats for one realization."""
    scheme, M = config.scheme, config.M
    K, S = config.resolved_K, config.resolved_S
    if scheme is Scheme.RBF:
        H = sample_rayleigh(K, M, stream, config.sigma_h2)
        out = rbf_rayleigh(H, S, config.power.total(S), stream)
        rate = out.sum_rate if config.metric == "sum" else out.mean_beam_rate
        return rate, math.nan
    users = sample_urlos(K, config.gain, stream)
    perfect = perfect_csi_rate(users, M)
    if scheme is Scheme.PERFECT_CSI:
        return perfect, perfect
    if scheme is Scheme.SINGLE_BEAM:
        out = rdb_single_beam(users, M, stream)
    elif scheme is Scheme.MULTIBEAM_SU:
        out = rdb_multibeam_single_user(users, M, S, stream)
    else:
        out = rdb_multibeam_multi_user(users, M, S, config.power, stream,
                                       allow_duplicate_winners=config.allow_duplicate_winners)
    rate = out.sum_rate if config.metric == "sum" else out.mean_beam_rate
    return rate, perfect


def _batched(config):
    if config.scheme is Scheme.RBF:
        return False
    return config.allow_duplicate_winners or config.scheme is not Scheme.MULTIBEAM_MU


def _chunk_size(config):
    """Trials per chunk. Depends on the configuration only, never on the worker count."""
    if not _batched(config):
        return 64
    work = config.resolved_K * config.resolved_S
    return int(min(1024, max(1, (1 << 18) // work)))


def _run_chunk(config, master_seed, experiment, start, stop):
    if not _batched(config):
        out = np.empty((stop - start, 2))
        for i, t in enumerate(range(start, stop)):
            out[i] = _trial(config, RandomStream(master_seed, experiment, t))
        return out
    return _run_batch(config, master_seed, experiment, start, stop)


def _run_batch(config, master_seed, experiment, start, stop):
    """Vectorized twin of :func:`_trial` for line-of-sight schemes.

    Each trial still draws from its own substream, in the same order as
    the per-trial scheme functions, and the arithmetic is elementwise
    identical, so the rows match :func:`_trial` exactly.
    """
    M, K, S, scheme = config.M, config.resolved_K, config.resolved_S, config.scheme
    T = stop - start
    theta = np.empty((T, K))
    alpha = np.empty((T, K), dtype=complex)
    offset = np.empty(T)
    trials = range(start, stop)
    channel = trial_generators(master_seed, experiment, trials, CHANNEL)
    beam = trial_generators(master_seed, experiment, trials, BEAM)
    for i, (gc, gb) in enumerate(zip(channel, beam)):
        theta[i], alpha[i] = draw_urlos(gc, K, config.gain)
        # same expression as schemes.draw_offset
        offset[i] = 1.0 - 2.0 * gb.random()
    gain2 = alpha.real ** 2 + alpha.imag ** 2
    perfect = np.log1p(M * np.max(gain2, axis=1))
    if scheme is Scheme.PERFECT_CSI:
        return np.column_stack([perfect, perfect])
    P = received_powers(theta, gain2, M, grid_directions(offset, S))
    if scheme in (Scheme.SINGLE_BEAM, Scheme.MULTIBEAM_SU):
        rate = np.log1p(np.max(P.reshape(T, -1), axis=1))
    else:
        sinr = multiuser_sinr(config.power.rho(S) * P)
        rates = np.log1p(np.max(sinr, axis=1))
        rate = np.sum(rates, axis=1) if config.metric == "sum" else np.mean(rates, axis=1)
    return np.column_stack([rate, perfect])


def _chunks(n, size):
    return [(s, min(n, s + size)) for s in range(0, n, size)]


def simulate_trials(config, n_trials, master_seed, experiment="", workers=1, executor=None):
    """Per-trial ``(rate, perfect_csi_rate)`` array of shape ``(n_trials, 2)``, in nats.

    Row ``t`` depends only on ``(config, master_seed, experiment, t)``.
    An existing ``executor`` is reused instead of starting ``workers``
    new processes.
    """
    if int(n_trials) != n_trials or n_trials < 1:
        raise ValueError(f"n_trials must be a positive integer, got {n_trials!r}")
    n_trials = int(n_trials)
    workers = max(1, int(workers))
    spans = _chunks(n_trials, _chunk_size(config))
    if (workers == 1 and executor is None) or len(spans) == 1:
        return np.concatenate([_run_chunk(config, master_seed, experiment, a, b) for a, b in spans])
    if executor is None:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return simulate_trials(config, n_trials, master_seed, experiment, workers, pool)
    futures = [executor.submit(_run_chunk, config, master_seed, experiment, a, b) for a, b in spans]
    return np.concatenate([f.result() for f in futures])


def _unit(config):
    return math.log(2.0) if config.bits else 1.0


def estimate_rate(config, n_trials=DEFAULT_TRIALS, master_seed=0, experiment="", workers=1):
    """Mean and standard error of the configured scheme's per-trial rate."""
    trials = simulate_trials(config, n_trials, master_seed, experiment, workers)
    return RateEstimate.from_samples(trials[:, 0] / _unit(config))


def _ratio_estimate(trials):
    num, den = trials[:, 0], trials[:, 1]
    n = num.size
    a, b = math.fsum(num) / n, math.fsum(den) / n
    r = a / b
    if n == 1:
        return RateEstimate(r, 0.0, 1)
    cov = np.cov(num, den, ddof=1)
    # delta method for a ratio of means
    var = (cov[0, 0] - 2.0 * r * cov[0, 1] + r * r * cov[1, 1]) / (b * b * n)
    return RateEstimate(r, math.sqrt(max(var, 0.0)), n)


def estimate_ratio_to_perfect_csi(config, n_trials=DEFAULT_TRIALS, master_seed=0, experiment="",
                                  workers=1):
    """``E[rate] / E[log(1 + M max_k |alpha_k|^2)]`` from coupled realizations.

    The standard error comes from the delta method. The ratio does not
    depend on the log base.
    """
    if config.scheme is Scheme.RBF:
        raise ValueError("the perfect-CSI reference is defined for line-of-sight channels only")
    return _ratio_estimate(simulate_trials(config, n_trials, master_seed, experiment, workers))


def _blocks(n):
    if int(n) != n or n < 1:
        raise ValueError(f"sample size must be a positive integer, got {n!r}")
    n = int(n)
    return [(b, min(BLOCK, n - b * BLOCK)) for b in range(math.ceil(n / BLOCK))]


def _offsets(master_seed, experiment, n):
    for b, size in _blocks(n):
        rng = RandomStream(master_seed, experiment, b).generator()
        yield 1.0 - 2.0 * rng.random(size)


def empirical_exceedance(M, p, n, master_seed=0):
    """Frequency of ``M F_M(u)^2 > M^p`` over ``n`` uniform offsets ``u``."""
    if not -1.0 < p < 1.0:
        raise ValueError(f"p must lie in (-1, 1), got {p!r}")
    threshold = float(M) ** p
    hits = 0
    for u in _offsets(master_seed, f"exceedance:{M}", n):
        hits += int(np.count_nonzero(beam_power(M, 0.0, u) > threshold))
    return ProbabilityEstimate.from_count(hits, int(n))


def empirical_beam_power(M, n, master_seed=0):
    """Mean of ``Z = M F_M(u)^2`` over ``n`` uniform offsets."""
    z = np.concatenate([beam_power(M, 0.0, u) for u in _offsets(master_seed, f"beam-power:{M}", n)])
    return RateEstimate.from_samples(z)


def sample_wrapped_difference(n, master_seed=0):
    """``wrap(v - t)`` for ``n`` independent pairs of uniform directions."""
    parts = []
    for b, size in _blocks(n):
        rng = RandomStream(master_seed, "wrapped-difference", b).generator()
        tv = 1.0 - 2.0 * rng.random((2, size))
        parts.append(wrap_direction(tv[1] - tv[0]))
    return np.concatenate(parts)


def empirical_cone(M, K, eta, n, master_seed=0):
    """Cone membership frequencies over ``n`` Rayleigh vectors.

    Returns ``(single, nonempty)``. ``single`` is the fraction of vectors
    with ``|h_1| >= eta ||h||``. ``nonempty`` splits the vectors into
    ``n // K`` consecutive groups of ``K`` and counts groups with at least
    one member inside the cone.
    """
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta!r}")
    if int(K) != K or K < 1 or int(M) != M or M < 1:
        raise ValueError("M and K must be positive integers")
    if n < K:
        raise ValueError("need at least K samples to form one group")
    inside = []
    rows = max(1, BLOCK // int(M))
    for b in range(math.ceil(n / rows)):
        size = min(rows, int(n) - b * rows)
        H = sample_rayleigh(size, M, RandomStream(master_seed, f"cone:{M}", b))
        p2 = H.real ** 2 + H.imag ** 2
        inside.append(p2[:, 0] >= eta * eta * p2.sum(axis=1))
    inside = np.concatenate(inside)
    groups = inside[: (inside.size // K) * K].reshape(-1, K).any(axis=1)
    return (ProbabilityEstimate.from_count(int(inside.sum()), inside.size),
            ProbabilityEstimate.from_count(int(groups.sum()), groups.size))


# --------------------------------------------------------------------- sweeps

SWEEP_COLUMNS = (
    "scheme", "M", "q", "K", "c_u", "ell", "S", "c_b", "gain", "power", "power_value",
    "metric", "log_base", "n_trials", "mean", "stderr", "perfect_mean", "ratio",
    "ratio_stderr", "theory_ratio", "theory_regime", "fro_theory", "eps", "bound_lower",
    "bound_upper", "csi_asymptote", "status",
)


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian grid ``schemes x q x ell x M`` sharing one base configuration.

    ``base`` holds the remaining :class:`SchemeConfig` fields (gain, power,
    metric, ...). ``ell_values`` is ignored by schemes that use a single
    beam. All points share the experiment label, so every scheme and
    every grid point sees the same channel draws for a given trial index.
    """

    schemes: tuple
    M_values: tuple = DEFAULT_M_GRID
    q_values: tuple = (0.5,)
    ell_values: tuple = (None,)
    n_trials: int = DEFAULT_TRIALS
    master_seed: int = 0
    experiment: str = "sweep"
    eps: float = 0.1
    base: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("schemes", "M_values", "q_values", "ell_values"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise ValueError(f"{name} must not be empty")
            object.__setattr__(self, name, vals)
        object.__setattr__(self, "schemes", tuple(Scheme.parse(s) for s in self.schemes))
        if int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise ValueError("n_trials must be a positive integer")

    def points(self):
        """Grid points in output order."""
        for scheme, q, ell, M in itertools.product(self.schemes, self.q_values,
                                                   self.ell_values, self.M_values):
            if scheme in (Scheme.SINGLE_BEAM, Scheme.PERFECT_CSI):
                if ell != self.ell_values[0]:
                    continue
                ell = None
            yield scheme, q, ell, M


def _try(fn, *args):
    try:
        return fn(*args)
    except (ValueError, ZeroDivisionError, OverflowError):
        return None


def _overlays(config, eps):
    """Theory columns for one point. Cells whose preconditions fail stay empty."""
    s, M, q, ell = config.scheme, config.M, config.q, config.ell
    row = {"eps": eps}
    if q is None:
        return row
    ratio = bracket = None
    if s is Scheme.SINGLE_BEAM:
        ratio = _try(bounds.thm2_ratio, q)
        bracket = _try(bounds.thm1_bounds, M, q, eps)
    elif s is Scheme.MULTIBEAM_SU and ell is not None:
        ratio = _try(bounds.corollary1_ratio, q, ell)
        bracket = _try(bounds.thm3_bounds, M, q, ell, eps)
    elif s is Scheme.MULTIBEAM_MU and ell is not None and config.metric == "per_beam":
        fn = bounds.thm4_bounds if isinstance(config.power, FixedTotal) else bounds.thm5_bounds
        bracket = _try(fn, M, q, ell, eps)
    if ratio is not None:
        row["theory_ratio"] = ratio.value
        row["theory_regime"] = ratio.regime
    if bracket is not None:
        unit = _unit(config)
        row["bound_lower"] = bracket.lower / unit
        row["bound_upper"] = bracket.upper / unit
    fro = _try(bounds.fro_theoretical, s, q)
    if fro is not None:
        row["fro_theory"] = fro
    if s is not Scheme.RBF:
        asym = _try(bounds.perfect_csi_asymptote, M, config.resolved_K)
        if asym is not None:
            row["csi_asymptote"] = asym / _unit(config)
    return row


def evaluate_point(config, n_trials, master_seed, experiment="", workers=1, eps=0.1,
                   executor=None):
    """One sweep row (dict keyed by :data:`SWEEP_COLUMNS`) for a valid config."""
    row = config.as_dict()
    row.update(n_trials=int(n_trials), status="ok")
    trials = simulate_trials(config, n_trials, master_seed, experiment, workers, executor)
    est = RateEstimate.from_samples(trials[:, 0] / _unit(config))
    row.update(mean=est.mean, stderr=est.stderr)
    if config.scheme is not Scheme.RBF:
        row["perfect_mean"] = math.fsum(trials[:, 1]) / trials.shape[0] / _unit(config)
        ratio = _ratio_estimate(trials)
        row.update(ratio=ratio.mean, ratio_stderr=ratio.stderr)
    row.update(_overlays(config, eps))
    return row


def run_sweep(spec, workers=1, on_row=None):
    """Evaluate every grid point of ``spec``; a failing point yields a flagged row.

    Returns a list of dicts keyed by :data:`SWEEP_COLUMNS` (missing keys
    are empty cells). ``on_row`` is called after each row, e.g. for progress.
    """
    workers = max(1, int(workers))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return _sweep_rows(spec, workers, on_row, pool)
    return _sweep_rows(spec, 1, on_row, None)


def _sweep_rows(spec, workers, on_row, executor):
    rows = []
    for scheme, q, ell, M in spec.points():
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                config = SchemeConfig(scheme=scheme, M=M, q=q, ell=ell, **spec.base)
            row = evaluate_point(config, spec.n_trials, spec.master_seed, spec.experiment,
                                 workers, spec.eps, executor)
        except ValueError as exc:
            row = {"scheme": Scheme.parse(scheme).value, "M": M, "q": q, "ell": ell,
                   "n_trials": spec.n_trials, "status": f"error: {exc}"}
        rows.append(row)
        if on_row is not None:
            on_row(row)
    return rows


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def format_csv(rows, columns=SWEEP_COLUMNS):
    """Render rows as CSV text with round-trip float formatting and ``\\n`` line ends."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(path, rows, columns=SWEEP_COLUMNS):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(rows, columns))

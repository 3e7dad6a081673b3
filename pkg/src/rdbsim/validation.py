"""Self-check suites behind ``rdbsim validate``.

Each suite returns a list of :class:`Check` records. ``budget`` scales the
Monte Carlo sample sizes (1.0 is the default budget).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from . import bounds
from .engine import (
    SchemeConfig,
    empirical_cone,
    empirical_exceedance,
    estimate_rate,
    sample_wrapped_difference,
)
from .kernel import beam_power, fejer_gain, inner_product, steering_vector
from .schemes import FixedTotal

__all__ = ["Check", "SUITES", "run_suite"]


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    expected: object
    passed: bool

    def as_dict(self):
        d = asdict(self)
        d["measured"] = float(d["measured"])
        d["verdict"] = "pass" if d.pop("passed") else "fail"
        return d


def _n(base, budget, floor=100):
    return max(floor, int(round(base * budget)))


def kernel_suite(budget=1.0, seed=0):
    rng = np.random.default_rng([seed, 1])
    n = _n(10_000, budget, 50)
    Ms = rng.integers(1, 1025, n)
    th = 1.0 - 2.0 * rng.random(n)
    vt = 1.0 - 2.0 * rng.random(n)
    worst = 0.0
    for M, a, b in zip(Ms, th, vt):
        ref = M * abs(inner_product(steering_vector(M, a), steering_vector(M, b))) ** 2
        got = beam_power(M, a, b)
        worst = max(worst, abs(got - ref) / max(ref, 1e-300))
    checks = [Check("closed form vs explicit vectors, max relative error", worst, "<= 1e-9",
                    worst <= 1e-9)]
    for M in (4, 64, 1024):
        j = np.arange(1, M)
        nulls = float(np.max(fejer_gain(M, 2.0 * j / M)))
        checks.append(Check(f"nulls at 2j/M, M={M}", nulls, "<= 1e-9", nulls <= 1e-9))
        grid = np.linspace(1e-6, 1.0, 200_001)
        excess = float(np.max(fejer_gain(M, grid) - 1.0 / (M * grid)))
        checks.append(Check(f"F_M(d) <= 1/(M|d|) on (0, 1], M={M}", excess, "<= 1e-12",
                            excess <= 1e-12))
    M, S = 128, 8
    A = np.array([steering_vector(M, 0.1 + 2.0 * b / S) for b in range(S)])
    G = np.abs(A.conj() @ A.T)
    off = float(np.max(G - np.diag(np.diag(G))))
    checks.append(Check("beam grid orthogonality, M=128, S=8", off, "<= 1e-10", off <= 1e-10))
    return checks


def lemma1_suite(budget=1.0, seed=0):
    n = _n(1_000_000, budget)
    checks = []
    for M in (1000, 10000):
        for p in (-0.5, 0.0, 0.5):
            est = empirical_exceedance(M, p, n, seed)
            br = bounds.lemma1_bounds(M, p)
            checks.append(Check(f"Pr{{Z > M^p}}, M={M}, p={p}", est.p,
                                [br.lower, br.upper], br.contains(est.p)))
    return checks


def thm_brackets_suite(budget=1.0, seed=0, eps=0.15):
    n = _n(5000, budget)
    checks = []
    for M in (1000, 10000):
        for q in (0.7, 0.8, 0.9):
            cfg = SchemeConfig("single-beam", M=M, q=q, gain="unit")
            est = estimate_rate(cfg, n, seed, experiment="thm1")
            br = bounds.thm1_bounds(M, q, eps)
            checks.append(Check(f"single-beam rate, M={M}, q={q}, eps={eps}", est.mean,
                                [br.lower, br.upper], br.contains(est.mean)))
    cfg = SchemeConfig("multibeam-mu", M=10000, q=0.7, ell=0.3, gain="unit",
                       power=FixedTotal(1.0), metric="per_beam")
    est = estimate_rate(cfg, _n(1000, budget), seed, experiment="thm4")
    br = bounds.thm4_bounds(10000, 0.7, 0.3, eps)
    checks.append(Check(f"per-user rate, total power, M=10000, q=0.7, ell=0.3, eps={eps}",
                        est.mean, [br.lower, br.upper], br.contains(est.mean)))
    return checks


def appendix_a_suite(budget=1.0, seed=0):
    x = sample_wrapped_difference(_n(100_000, budget), seed)
    res = stats.kstest(x, stats.uniform(loc=-1.0, scale=2.0).cdf)
    return [Check("wrapped difference ~ Unif(-1, 1], KS p-value", float(res.pvalue), "> 0.01",
                  res.pvalue > 0.01)]


def appendix_c_suite(budget=1.0, seed=0, M=30, eta2=0.2, K=400):
    n = _n(1_000_000, budget, floor=10 * K)
    single, nonempty = empirical_cone(M, K, math.sqrt(eta2), n, seed)
    ref = bounds.cone_probability(M, math.sqrt(eta2))
    ratio = single.p / ref
    pred = -math.expm1(K * math.log1p(-single.p))
    z = abs(nonempty.p - pred) / nonempty.stderr if nonempty.stderr > 0 else math.inf
    return [
        Check(f"single-vector cone probability / exp(-eta^2 M), M={M}", ratio, "in [0.5, 2]",
              0.5 <= ratio <= 2.0),
        Check(f"nonempty-cone probability vs 1-(1-p)^K, K={K}, |z|", z, "<= 3", z <= 3.0),
    ]


def rbf_trend_suite(budget=1.0, seed=0, K=256):
    n = _n(2000, budget)
    per_antenna = []
    for M in (8, 16, 32, 64):
        cfg = SchemeConfig("rbf", M=M, K=K, power=FixedTotal(1.0))
        per_antenna.append(estimate_rate(cfg, n, seed, experiment="rbf").mean / M)
    steps = np.diff(per_antenna)
    return [Check(f"RBF sum rate / M, K={K}, M in (8, 16, 32, 64), largest step",
                  float(np.max(steps)), "< 0 (strictly decreasing)", bool(np.all(steps < 0)))]


SUITES = {
    "kernel": kernel_suite,
    "lemma1": lemma1_suite,
    "thm-brackets": thm_brackets_suite,
    "appendixA": appendix_a_suite,
    "appendixC": appendix_c_suite,
    "rbf-trend": rbf_trend_suite,
}


def run_suite(name, budget=1.0, seed=0):
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}") from None
    if not budget > 0:
        raise ValueError("budget must be positive")
    return fn(budget, seed)

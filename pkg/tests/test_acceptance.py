"""Acceptance suite: one test per numbered criterion.

Each test records a ``criterion N PASS|FAIL`` line that is repeated in the
terminal summary. Seeds are fixed, so every verdict is reproducible.
Monotone-in-M trends over the five-point grid are judged by the sign of
the least-squares slope of the mean against log10(M), which must exceed
two standard errors. Step-by-step differences are printed for reference.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from rdbsim import bounds
from rdbsim.cli import main
from rdbsim.engine import (
    SchemeConfig,
    empirical_beam_power,
    empirical_cone,
    empirical_exceedance,
    estimate_rate,
    estimate_ratio_to_perfect_csi,
    sample_wrapped_difference,
)
from rdbsim.kernel import beam_power, inner_product, steering_vector
from rdbsim.schemes import FixedPerUser, FixedTotal, rdb_multibeam_multi_user
from rdbsim.channels import sample_urlos
from rdbsim.streams import RandomStream

SEED = 20240611
LOG_GRID = [100, 316, 1000, 3162, 10000]
N_FIG = 5000


def trend(Ms, estimates):
    """OLS slope of the means against log10(M) and its standard error (points independent)."""
    x = np.log10(Ms)
    xc = x - x.mean()
    y = np.array([e.mean for e in estimates])
    se = np.array([e.stderr for e in estimates])
    sxx = float(np.sum(xc ** 2))
    slope = float(np.sum(xc * (y - y.mean())) / sxx)
    return slope, float(math.sqrt(np.sum(xc ** 2 * se ** 2)) / sxx)


def describe(Ms, estimates):
    return ", ".join(f"M={m}: {e.mean:.4f}+/-{e.stderr:.4f}" for m, e in zip(Ms, estimates))


def test_criterion_01_kernel_matches_explicit_vectors(criterion):
    rng = np.random.default_rng([SEED, 1])
    Ms = rng.integers(1, 1025, 10_000)
    th, vt = 1.0 - 2.0 * rng.random((2, 10_000))
    t0 = time.perf_counter()
    worst = 0.0
    for M, a, b in zip(Ms, th, vt):
        ref = M * abs(inner_product(steering_vector(M, a), steering_vector(M, b))) ** 2
        worst = max(worst, abs(beam_power(M, a, b) - ref) / ref)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 10.0
    assert criterion("1", "kernel vs explicit steering vectors", ok,
                     f"max relative error {worst:.2e} (<= 1e-9), {elapsed:.1f} s (< 10 s)")


def test_criterion_02_mean_beam_power_is_one(criterion):
    t0 = time.perf_counter()
    parts, ok = [], True
    for M in (10, 100, 1000):
        est = empirical_beam_power(M, 1_000_000, SEED)
        z = abs(est.mean - 1.0) / est.stderr
        ok &= z <= 3.0
        parts.append(f"M={M}: {est.mean:.4f} ({z:.2f} se)")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30.0
    assert criterion("2", "E[Z] = 1 within 3 se", ok, "; ".join(parts) + f"; {elapsed:.1f} s (< 30 s)")


def test_criterion_03_jensen_bound(criterion):
    cfg = SchemeConfig("single-beam", M=64, K=1, gain="cn")
    est = estimate_rate(cfg, 1_000_000, SEED, experiment="jensen")
    limit = math.log(2) + 3 * est.stderr
    assert criterion("3", "single-user rate <= log 2 + 3 se", est.mean <= limit,
                     f"R1 = {est.mean:.5f} +/- {est.stderr:.5f}, limit {limit:.5f}")


def test_criterion_04_lemma1_brackets(criterion):
    t0 = time.perf_counter()
    parts, ok = [], True
    for M in (1000, 10000):
        for p in (-0.5, 0.0, 0.5):
            est = empirical_exceedance(M, p, 1_000_000, SEED)
            br = bounds.lemma1_bounds(M, p)
            ok &= br.contains(est.p)
            parts.append(f"(M={M}, p={p}): {est.p:.3e} in [{br.lower:.3e}, {br.upper:.3e}]")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120.0
    assert criterion("4", "exceedance inside lemma brackets", ok, "; ".join(parts) + f"; {elapsed:.1f} s")


def test_criterion_05_single_beam_rate_brackets(criterion):
    parts, ok = [], True
    for M in (1000, 10000):
        for q in (0.7, 0.8, 0.9):
            est = estimate_rate(SchemeConfig("single-beam", M=M, q=q, gain="unit"), N_FIG, SEED, "c5")
            br = bounds.thm1_bounds(M, q, 0.15)
            ok &= br.contains(est.mean)
            parts.append(f"(M={M}, q={q}): {est.mean:.3f} in [{br.lower:.3f}, {br.upper:.3f}]")
    assert criterion("5", "single-beam rate inside eps=0.15 brackets", ok, "; ".join(parts))


def test_criterion_06_ratio_convergence(criterion):
    dist = []
    for M in (100, 1000, 10000):
        r = estimate_ratio_to_perfect_csi(SchemeConfig("single-beam", M=M, q=0.8, gain="cn"), N_FIG, SEED, "c6")
        dist.append((M, r.mean, abs(r.mean - 0.6)))
    low = estimate_ratio_to_perfect_csi(SchemeConfig("single-beam", M=10000, q=0.3, gain="cn"), N_FIG, SEED, "c6")
    decreasing = all(b[2] < a[2] for a, b in zip(dist, dist[1:]))
    ok = decreasing and low.mean < 0.1
    detail = ", ".join(f"M={m}: ratio {r:.4f} (|r-0.6|={d:.4f})" for m, r, d in dist)
    assert criterion("6", "ratio approaches 2q-1 at q=0.8; q=0.3 ratio < 0.1", ok,
                     f"{detail}; q=0.3, M=10^4: {low.mean:.4f}")


def _single_beam_curve(q):
    return [estimate_rate(SchemeConfig("single-beam", M=M, q=q, gain="cn"), N_FIG, SEED, "c7") for M in LOG_GRID]


def test_criterion_07_single_beam_rate_vs_M(criterion):
    ok, parts = True, []
    for q, sign in ((0.1, -1), (0.3, -1), (0.7, 1), (0.9, 1)):
        est = _single_beam_curve(q)
        slope, se = trend(LOG_GRID, est)
        good = sign * slope > 2 * se
        ok &= good
        parts.append(f"q={q}: slope {slope:+.4f} +/- {se:.4f} per decade "
                     f"({'down' if sign < 0 else 'up'} expected) [{describe(LOG_GRID, est)}]")
    flat = _single_beam_curve(0.5)
    means = np.array([e.mean for e in flat])
    spread = float((means.max() - means.min()) / means.mean())
    ok &= spread < 0.15
    parts.append(f"q=0.5: (max-min)/mean = {spread:.3f} (< 0.15) [{describe(LOG_GRID, flat)}]")
    assert criterion("7", "single-beam rate trends in M", ok, "; ".join(parts))


def test_criterion_08_multibeam_single_user_regimes(criterion):
    ok, parts = True, []
    for ell, sign in ((0.1, -1), (0.3, 1), (0.4, 1)):
        est = [estimate_rate(SchemeConfig("multibeam-su", M=M, q=0.3, ell=ell, gain="cn"), N_FIG, SEED, "c8")
               for M in LOG_GRID]
        slope, se = trend(LOG_GRID, est)
        ok &= sign * slope > 2 * se
        parts.append(f"ell={ell}: slope {slope:+.4f} +/- {se:.4f} "
                     f"({'down' if sign < 0 else 'up'} expected) [{describe(LOG_GRID, est)}]")
    assert criterion("8", "multi-beam single-user rate vs M at q=0.3", ok, "; ".join(parts))


def test_criterion_09_multi_user_regimes(criterion):
    ok, parts = True, []
    for ell, sign in ((0.3, 1), (0.5, -1)):
        est = [estimate_rate(SchemeConfig("multibeam-mu", M=M, q=0.7, ell=ell, gain="cn",
                                          power=FixedTotal(1.0), metric="per_beam"), N_FIG, SEED, "c9")
               for M in LOG_GRID]
        slope, se = trend(LOG_GRID, est)
        ok &= sign * slope > 2 * se
        parts.append(f"ell={ell}: slope {slope:+.4f} +/- {se:.4f} "
                     f"({'down' if sign < 0 else 'up'} expected) [{describe(LOG_GRID, est)}]")
    assert criterion("9", "per-user rate vs M at q=0.7, total power 1", ok, "; ".join(parts))


def test_criterion_10_per_user_power_dominates(criterion):
    M, q, ell = 512, 0.7, 0.3
    K, S = round(M ** q), round(M ** ell)
    worst, violations = math.inf, 0
    for t in range(10_000):
        s = RandomStream(SEED, "c10", t)
        users = sample_urlos(K, "cn", s)
        a = rdb_multibeam_multi_user(users, M, S, FixedPerUser(1.0), s).sinr
        b = rdb_multibeam_multi_user(users, M, S, FixedTotal(1.0), s).sinr
        violations += int(np.sum(a < b))
        worst = min(worst, float(np.min(a - b)))
    assert criterion("10", "per-beam SINR, per-user power >= total power", violations == 0 and S >= 2,
                     f"K={K}, S={S}, 10^4 trials, violations {violations}, min difference {worst:.3e}")


def _fro(config, Ms, n, label):
    est = [estimate_rate(config.replace(M=M), n, SEED, label) for M in Ms]
    return bounds.fro_empirical([(M, e.mean) for M, e in zip(Ms, est)]), est


FRO_GRID = [1000, 3162, 10000]


def test_criterion_11a_fro_multi_user(criterion):
    cfg = SchemeConfig("multibeam-mu", M=1000, q=0.8, ell=0.7, gain="unit", power=FixedTotal(1.0))
    slope, est = _fro(cfg, FRO_GRID, 200, "c11")
    target = bounds.fro_theoretical("multibeam-mu", 0.8)
    assert criterion("11a", "FRO of multi-user sum rate, q=0.8, ell=0.7",
                     abs(slope - target) <= 0.15,
                     f"slope {slope:.3f} vs {target:.1f} +/- 0.15 [{describe(FRO_GRID, est)}]")


def test_criterion_11b_fro_single_beam(criterion):
    cfg = SchemeConfig("single-beam", M=1000, q=0.3, gain="unit")
    slope, est = _fro(cfg, FRO_GRID, 20_000, "c11")
    target = bounds.fro_theoretical("single-beam", 0.3)
    assert criterion("11b", "FRO of single-beam rate, q=0.3",
                     abs(slope - target) <= 0.15,
                     f"slope {slope:.3f} vs {target:.1f} +/- 0.15 [{describe(FRO_GRID, est)}]")


def test_criterion_12_wrapped_difference_uniform(criterion):
    x = sample_wrapped_difference(100_000, SEED)
    res = stats.kstest(x, stats.uniform(loc=-1.0, scale=2.0).cdf)
    assert criterion("12", "wrapped difference KS vs Unif(-1, 1]", res.pvalue > 0.01,
                     f"D = {res.statistic:.5f}, p = {res.pvalue:.3f} (> 0.01)")


def test_criterion_13_cone_probabilities(criterion):
    M, eta2, K = 30, 0.2, 400
    single, nonempty = empirical_cone(M, K, math.sqrt(eta2), 1_000_000, SEED)
    ref = bounds.cone_probability(M, math.sqrt(eta2))
    pred = -math.expm1(K * math.log1p(-single.p))
    z = abs(nonempty.p - pred) / nonempty.stderr
    ok = 0.5 <= single.p / ref <= 2.0 and z <= 3.0
    assert criterion("13", "cone probabilities", ok,
                     f"single {single.p:.3e} vs exp(-6) = {ref:.3e} (ratio {single.p / ref:.3f}); "
                     f"nonempty {nonempty.p:.4f} vs 1-(1-p)^K = {pred:.4f} ({z:.2f} se, {nonempty.n} groups)")


def test_criterion_14_rbf_trend(criterion):
    Ms = [8, 16, 32, 64]
    est = [estimate_rate(SchemeConfig("rbf", M=M, K=256, power=FixedTotal(1.0)), 2000, SEED, "c14") for M in Ms]
    per = [e.mean / M for M, e in zip(Ms, est)]
    ok = all(b < a for a, b in zip(per, per[1:]))
    assert criterion("14", "RBF sum rate / M strictly decreasing, K=256", ok,
                     ", ".join(f"M={M}: {p:.4f}" for M, p in zip(Ms, per)))


def test_criterion_15_fig3a_identical_across_workers(criterion, tmp_path, capsys):
    blobs = []
    for w in (1, 4, 8):
        prefix = str(tmp_path / f"w{w}")
        assert main(["figure", "fig3a", "--trials", "200", "--seed", str(SEED), "--workers", str(w),
                     "-o", prefix]) == 0
        blobs.append((tmp_path / f"w{w}.csv").read_bytes())
    capsys.readouterr()
    ok = blobs[0] == blobs[1] == blobs[2]
    rows = len(blobs[0].splitlines()) - 1
    assert criterion("15", "fig3a CSV byte-identical for 1, 4, 8 workers", ok,
                     f"{rows} rows, {len(blobs[0])} bytes each")

"""More beams, more chances: the three multi-beam regimes.

Splitting the array into S = M^l orthogonal beams gives each of K = M^q
users S chances to land on a main lobe. Serving only the single best
user, the rate grows with M once q + l > 1/2 and fades below that. When
every beam serves its own user under a fixed total power, each beam gets
1/S of the power and inter-beam leakage appears, so the per-user rate
climbs only while l stays small relative to 2q - 1.

Run: python3 demos/multibeam_regimes.py [trials]
"""

import sys

from rdbsim import FixedTotal, SchemeConfig, estimate_rate

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
Ms = (100, 1000, 10000)


def row(label, make):
    cells = [estimate_rate(make(M), trials, 11, "demo") for M in Ms]
    print(f"{label:<28}" + " ".join(f"{e.mean:8.3f}" for e in cells))


print(f"{'configuration':<28}" + " ".join(f"{'M=' + str(M):>8}" for M in Ms))
print("best user only, q = 0.3")
for ell in (0.1, 0.3, 0.4):
    row(f"  l = {ell}", lambda M, ell=ell: SchemeConfig("multibeam-su", M=M, q=0.3, ell=ell, gain="cn"))
print("one user per beam, q = 0.7, per-user rate")
for ell in (0.1, 0.3, 0.5):
    row(f"  l = {ell}", lambda M, ell=ell: SchemeConfig(
        "multibeam-mu", M=M, q=0.7, ell=ell, gain="cn", power=FixedTotal(1.0), metric="per_beam"))

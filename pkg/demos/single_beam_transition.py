"""Where a single random beam stops paying off.

One random direction is broadcast and the strongest of K = M^q users is
served. With more users than about sqrt(M), someone almost always sits
close to the beam and the rate keeps a fixed fraction 2q - 1 of the
perfect-CSI rate. With fewer, the best user is usually off the main lobe
and the ratio collapses. This script prints the measured ratio against
its limit on a q grid for a few array sizes.

Run: python3 demos/single_beam_transition.py [trials]
"""

import sys

from rdbsim import SchemeConfig, estimate_ratio_to_perfect_csi
from rdbsim.bounds import thm2_ratio

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
Ms = (100, 1000, 10000)
print(f"{'q':>5} {'limit':>7} " + " ".join(f"{'M=' + str(M):>10}" for M in Ms))
for q in (0.2, 0.4, 0.5, 0.6, 0.8, 0.95):
    cells = []
    for M in Ms:
        r = estimate_ratio_to_perfect_csi(SchemeConfig("single-beam", M=M, q=q, gain="cn"), trials, 7, "demo")
        cells.append(f"{r.mean:10.3f}")
    print(f"{q:5.2f} {thm2_ratio(q).value:7.3f} " + " ".join(cells))

"""A weak kinematic similarity that moves the nonuniform spectrum.

S(n) = exp(-a n) is bounded together with its inverse by exp(a|n|), which
is allowed for nonuniform similarities. It maps the oscillating scalar
system with rate -omega to the same system with rate -(omega - a), and the
nonuniform spectrum moves right by a.
"""

import time

from dichospec import (check_weakly_nondegenerate, exp_scaling, get_example,
                       invariance_experiment)

omega, a = 2.0, 1.0
ex = get_example("ex731", {"omega": omega, "a": a})
S = exp_scaling(-a, theta_S=a)

# the map has to pass the nondegeneracy bounds on the window first
nd = check_weakly_nondegenerate(S, (-400, 400))
print(f"S = {S.label}: worst slack {nd['slack_S']:.3g} / {nd['slack_S_inv']:.3g}, "
      f"passed={nd['passed']}")

t0 = time.perf_counter()
res = invariance_experiment(ex.system, S, ex.rate, "nonuniform", grid_step=0.05,
                            window=(-400, 400), refinement_tol=0.01, jobs=2)
print(f"both spectra in {time.perf_counter() - t0:.1f} s")

for tag in ("A", "B"):
    (lo, hi), = res[f"spectrum_{tag}"].endpoints()
    print(f"  spectrum of {tag}: [{lo:+.3f}, {hi:+.3f}]")
print(f"  expected A: [{-omega - 3 * a:+.1f}, {-omega + 3 * a:+.1f}]  "
      f"B: [{-omega - 2 * a:+.1f}, {-omega + 4 * a:+.1f}]")

for row in res["diff"]:
    print(f"  endpoint {row['endpoint']}: moved by {row['displacement']:+.3f}")
print(res["label"])

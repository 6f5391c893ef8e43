"""Windowed estimates tighten as the window grows.

Dichotomies are statements about all of Z; every number here comes from a
finite window. Re-running the same estimates on windows 100, 200 and 400
shows the endpoints and the ratio values settling towards the closed forms.
"""

import math

from dichospec import estimate_spectrum, get_example, identity_projector, sweep_ratios

ex731 = get_example("ex731", {"omega": 2.0, "a": 1.0})
ex707 = get_example("ex707")

print("window   ex731 nonuniform      ex707 nonuniform      st(2) on ex731")
for N in (100, 200, 400):
    W = (-N, N)
    (a1, b1), = estimate_spectrum(ex731.system, ex731.rate, "nonuniform", (-8, 4), 0.05, W,
                                  refinement_tol=0.01).endpoints()
    (a2, b2), = estimate_spectrum(ex707.system, ex707.rate, "nonuniform", (-3, 3), 0.05, W,
                                  refinement_tol=0.01).endpoints()
    st = sweep_ratios(ex731.system, ex731.rate, (1.0, math.inf), window=W, gammas=[2.0],
                      projector=identity_projector(1)).samples[0].st
    print(f"{N:6d}   [{a1:+.4f}, {b1:+.4f}]   [{a2:+.4f}, {b2:+.4f}]   {st:+.4f}")
print("closed forms: [-5, 1], [-1, 1], -1")

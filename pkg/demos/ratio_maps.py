"""Optimal ratio curves on the two gaps of the oscillating example.

On the right gap st(gamma) = -omega - gamma + 3a and on the left gap
un(gamma) = -omega - gamma - 3a; both vanish at the spectral edges and the
windowed estimates carry a small bias of size logK_cap / window.
"""

import math

from dichospec import boundary_locator, get_example, identity_projector, sweep_ratios, zero_projector

omega, a = 2.0, 1.0
ex = get_example("ex731", {"omega": omega, "a": a})
W = (-400, 400)

right = sweep_ratios(ex.system, ex.rate, (-omega + 3 * a, math.inf), window=W,
                     gammas=[1.25, 1.5, 2, 3, 5, 8], projector=identity_projector(1))
print(" gamma      st   closed form")
for s in right.samples:
    print(f"{s.gamma:6.2f} {s.st:+7.3f}   {-omega - s.gamma + 3 * a:+7.3f}")

left = sweep_ratios(ex.system, ex.rate, (-math.inf, -omega - 3 * a), window=W,
                    gammas=[-10, -8, -6, -5.25], projector=zero_projector(1))
print(" gamma      un   closed form")
for s in left.samples:
    print(f"{s.gamma:6.2f} {s.un:+7.3f}   {-omega - s.gamma - 3 * a:+7.3f}")

print("monotone:", right.is_monotone() and left.is_monotone())
print("edges from bisection:",
      round(boundary_locator(ex.system, ex.rate, "stable", (1, 4), 0.01, W), 4),
      round(boundary_locator(ex.system, ex.rate, "unstable", (-9, -5), 0.01, W), 4))

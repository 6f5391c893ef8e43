"""Four spectra of one system under the quadratic rate mu(n) = exp(sgn(n) n^2).

x(n+1) = exp(-2n-1) x(n) has Phi(k, n) = exp(-(k^2 - n^2)). Every solution is
bounded, so no projector is unique and the slow class never fails, while the
nonuniform class sees [-1, 1]. The uniform class sees [-1, 1] as well on
any window: with this rate the constant K = 1 and alpha = 1 - gamma work for
all gamma > 1, so the uniform spectrum is not the whole line.
"""

from dichospec import estimate_spectrum, get_example, upp_check, usp_check

ex = get_example("ex707")
W = (-200, 200)

for cls in ("uniform", "nonuniform", "upp", "slow"):
    est = estimate_spectrum(ex.system, ex.rate, cls, (-3, 3), 0.05, W, refinement_tol=0.01)
    ivs = ", ".join(
        f"{'(' if iv.lo_open else '['}{iv.lo:+.3f}, {iv.hi:+.3f}{')' if iv.hi_open else ']'}"
        for iv in est.intervals) or "empty"
    ref = ", ".join(str(iv.as_list()) for iv in ex.references.get(cls, [])) or "empty"
    print(f"{cls:>10}: {ivs:<22} reference {ref}")
    print(f"{'':>10}  {ex.notes[cls]}")

print("bounded directions through n0 = 0:", usp_check(ex.system, (-50, 50)))
u = upp_check(ex.system, ex.rate, W, "slow", 0.0)
print("slow-class projectors at gamma = 0:", u["feasible"])

"""How fast can joint determinants shrink?  Exhaustive minima against the pigeon-hole bounds."""

from macdecay import DecayQuery, MacCode, build_tower, decay_exhaustive, fit_decay_slope, upper_bound_exponents
from macdecay.decay import lower_bound_exponents
from macdecay.pigeonhole import small_det_witness_pipeline

# two users, one antenna each, over Q(i, sqrt 5)
code = MacCode(build_tower(2, 1, "gaussian"))

print("D(N, 1): only the first user's coefficient range grows")
recs = [decay_exhaustive(DecayQuery(code, (1, 2), (n, 1))) for n in (2, 4, 8, 16)]
for r in recs:
    print(f"  N={r.query.bounds[0]:>2}  D={r.value:.5f}  witness={r.witness}  ({r.nodes:,} tuples, {r.seconds:.2f} s)")
print(f"  fitted slope {fit_decay_slope(recs).slope:.3f}; both bounds predict -1")

print("\nD(N, N): both ranges grow")
recs = [decay_exhaustive(DecayQuery(code, (1, 2), (n, n))) for n in range(1, 5)]
for r in recs:
    print(f"  N={r.query.bounds[0]}  D={r.value:.5f}")
lo = lower_bound_exponents(2, 1, 2)
up = upper_bound_exponents(2, 1, 2, 2)
print(f"  fitted slope {fit_decay_slope(recs).slope:.3f}; lower bound exponent -{lo.equal_n}, upper bound exponent -{up.alpha}")

print("\nThree users: the constructive witness pipeline")
code3 = MacCode(build_tower(3, 1, "gaussian"))
up3 = upper_bound_exponents(3, 1, 3, 3)
print(f"  predicted decay N^-{up3.alpha} with per-user exponents {[str(e) for e in up3.exponents]}")
for n in (2, 4, 8):
    p = small_det_witness_pipeline(code3, (1, 2, 3), (n, n, n))
    print(f"  N={n}: sqrt det {p.sqrt_det:.4g} <= {p.bound:.4g} (C={p.constant:.4g}), witness {p.witness}")

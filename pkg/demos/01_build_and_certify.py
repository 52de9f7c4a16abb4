"""Build a three-user code, certify its rank criterion exactly, and look at one joint codeword."""

import numpy as np

from macdecay import MacCode, UserWord, build_tower, exact_gram_determinant, joint_matrix, valuation_certificate
from macdecay.cyclotomic import embed_numeric
from macdecay.tower import minimal_polynomial, verify_inert

# L = Q(i, zeta_7 + zeta_7^-1) over K = Q(i), with the inert prime 2+i
spec = build_tower(3, 1, "gaussian")
cert = verify_inert(spec)
print(f"tower of degree {spec.degree}, ambient conductor {spec.conductor}, sigma: zeta_7 -> zeta_7^{spec.sigma_exp}")
print(f"minimal polynomial of theta (low to high): {minimal_polynomial(spec)}")
print(f"p = 2+i inert: {cert.inert} (residue field F_{cert.q})")
for line in cert.transcript:
    print("   ", line)

code = MacCode(spec)
print(f"\n{code!r}: each user has a rank-{code.lattice_dim} lattice of 1 x {code.k} codewords")

# one word per user; every nonzero choice must give a nonzero joint determinant
rng = np.random.default_rng(1)
words = [UserWord.from_flat(j, rng.integers(-2, 3, size=code.lattice_dim).tolist(), 1) for j in (1, 2, 3)]
J = joint_matrix(words, code)
d = exact_gram_determinant(J, spec)
print("\njoint matrix (numeric):")
print(np.array2string(J.numeric, precision=3, suppress_small=True))
print(f"exact determinant lies in F: {spec.in_F(d)}; value {embed_numeric(d):.6f}")
print(f"numpy determinant            {np.linalg.det(J.numeric):.6f}")

for w in words:
    c = valuation_certificate(w.elements(spec), spec)
    print(f"user {w.user}: word {w.flat()} has reduced-norm valuation {c.valuation} (shift {c.shift})")

"""Finite-SNR check: an inert prime against a deliberately rank-broken code (p = 1)."""

from macdecay import MacCode, SimConfig, build_tower, empirical_dmin, simulate
from macdecay.tower import k_element

spec = build_tower(2, 1, "gaussian")
good = MacCode(spec)
broken = MacCode(build_tower(2, 1, "gaussian", p=k_element("gaussian", spec.conductor, 1, 0), check_inert=False))

res = simulate(SimConfig(good, 1, 2, (5.0, 10.0, 15.0, 20.0), 2000, seed=7))
print("joint ML and bounded-distance decoding, N=1, nr=2, 2000 trials per point")
for row in res.rows():
    print(f"  {row['snr_db']:>5.1f} dB  ML CER {row['ml_cer']:.4f} +- {row['ci_halfwidth']:.4f}  BD failure {row['bd_fail']:.4f}")

for name, code in (("inert p=1+i", good), ("broken p=1", broken)):
    r = simulate(SimConfig(code, 1, 2, (20.0,), 20000, seed=8, bounded_distance=False))
    q = empirical_dmin(SimConfig(code, 1, 2, (20.0,), 1, seed=8), draws=200, quantiles=(0.01, 0.1, 0.5))
    qs = ", ".join(f"q{int(k * 100)}={v:.3f}" for k, v in q.quantiles.items())
    print(f"{name:>12}: CER at 20 dB {r.ml_cer[0]:.4f} +- {r.ci_halfwidth[0]:.4f}; d_min {qs}")

"""Exact DMT curves: where does the code's lower bound meet the optimal MAC tradeoff?"""

from macdecay import DmtScenario, mac_lower_bound, mac_optimal, optimality_threshold
from macdecay.dmt import lower_bound_theta

for U, nt, nr in [(3, 2, 4), (3, 2, 8), (2, 3, 6)]:
    sc = DmtScenario(U, nt, nr)
    t = optimality_threshold(sc)
    print(f"U={U}, nt={nt}, nr={nr}: optimal for r <= {t} = {float(t):.4f}; theta = {lower_bound_theta(sc)}")
    print("  optimal breakpoints:    ", [(str(r), str(d)) for r, d in mac_optimal(sc).points])
    print("  lower-bound breakpoints:", [(str(r), str(d)) for r, d in mac_lower_bound(sc).points])

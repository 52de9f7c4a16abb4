"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line; the lines are repeated in the pytest
terminal summary.  Run standalone with ``python3 tests/test_acceptance.py``.
"""

import time
from fractions import Fraction
from functools import lru_cache

import numpy as np

from macdecay.channel import SimConfig, simulate
from macdecay.codes import MacCode, UserWord, exact_gram_determinant, joint_matrix, valuation_certificate
from macdecay.decay import DecayQuery, decay_exhaustive, fit_decay_slope, upper_bound_exponents
from macdecay.dmt import DmtScenario, optimality_threshold
from macdecay.pigeonhole import pigeonhole_witness, small_det_witness_pipeline
from macdecay.tower import build_tower, k_element
from macdecay.verify import run_suite

RESULTS: list[str] = []


def report(number: int, ok: bool, text: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}"
    RESULTS.append(line)
    print(line)


@lru_cache(maxsize=None)
def two_user_code() -> MacCode:
    return MacCode(build_tower(2, 1, "gaussian"))


@lru_cache(maxsize=None)
def equal_n_series() -> tuple:
    code = two_user_code()
    return tuple(decay_exhaustive(DecayQuery(code, (1, 2), (n, n))) for n in range(1, 7))


def test_criterion_1_dmt_thresholds():
    t0 = time.perf_counter()
    a = optimality_threshold(DmtScenario(3, 2, 4))
    b = optimality_threshold(DmtScenario(2, 3, 6))
    c = optimality_threshold(DmtScenario(3, 2, 8))
    secs = time.perf_counter() - t0
    ok = a == Fraction(6, 25) and b == Fraction(3, 5) and c == Fraction(14, 45) and abs(float(c) - 0.311) < 1e-3 and secs < 1
    report(1, ok, f"thresholds {a}, {b}, {c} (|{c} - 0.311| = {abs(float(c) - 0.311):.5f}) in {secs:.3f} s")
    assert ok


def test_criterion_2_upper_bound_exponent():
    p = upper_bound_exponents(3, 1, 3, 3)
    ok = p.alpha == Fraction(5, 2)
    report(2, ok, f"alpha = {p.alpha}, exponents {[str(e) for e in p.exponents]}")
    assert ok


def _random_tuple(code: MacCode, rng, bound: int = 2) -> list[UserWord]:
    words = []
    for j in range(1, code.U + 1):
        while True:
            flat = rng.integers(-bound, bound + 1, size=code.lattice_dim)
            if flat.any():
                break
        words.append(UserWord.from_flat(j, flat.tolist(), code.nt))
    return words


def test_criterion_3_generalized_rank():
    t0 = time.perf_counter()
    cases = [(MacCode(build_tower(3, 1, "gaussian"), 1), 10_000), (MacCode(build_tower(2, 2, "eisenstein"), 2), 1_000)]
    zeros, bad_val, checked = 0, 0, []
    for code, count in cases:
        spec = code.spec
        assert (spec.h, spec.m) in ((7, 1), (17, 2))
        rng = np.random.default_rng([3, spec.h])
        for _ in range(count):
            words = _random_tuple(code, rng)
            if exact_gram_determinant(joint_matrix(words, code), spec).is_zero():
                zeros += 1
            for w in words:
                v = valuation_certificate(w.elements(spec), spec).valuation
                bad_val += not 0 <= v <= spec.nt - 1
        checked.append(count)
    secs = time.perf_counter() - t0
    ok = zeros == 0 and bad_val == 0 and secs < 600
    report(3, ok, f"{checked[0]} C_3,1 + {checked[1]} C_2,2 tuples, {zeros} zero determinants, {bad_val} bad valuations, {secs:.1f} s")
    assert ok


def test_criterion_4_single_varying_slope():
    t0 = time.perf_counter()
    code = two_user_code()
    recs = [decay_exhaustive(DecayQuery(code, (1, 2), (n, 1))) for n in (2, 4, 8, 16, 32)]
    fit = fit_decay_slope(recs)
    secs = time.perf_counter() - t0
    ok = -1.25 <= fit.slope <= -0.75 and secs < 1800
    vals = ", ".join(f"{r.value:.4g}" for r in recs)
    report(4, ok, f"D(N,1) for N=2..32: {vals}; slope {fit.slope:.3f} in [-1.25, -0.75], {secs:.1f} s")
    assert ok


def test_criterion_5_equal_n_slope():
    t0 = time.perf_counter()
    recs = equal_n_series()
    fit = fit_decay_slope(recs)
    secs = time.perf_counter() - t0
    ok = -2.25 <= fit.slope <= -0.75 and secs < 3600
    vals = ", ".join(f"{r.value:.4g}" for r in recs)
    report(5, ok, f"D(N,N) for N=1..6: {vals}; slope {fit.slope:.3f} in [-2.25, -0.75], {secs:.1f} s")
    assert ok


def test_criterion_6_pigeonhole():
    violations, zero = 0, 0
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng([6, seed])
        gens = rng.standard_normal((4, 1, 3)) + 1j * rng.standard_normal((4, 1, 3))
        A = [rng.standard_normal((1, 3)) + 1j * rng.standard_normal((1, 3))]
        res = pigeonhole_witness(gens, A, M=4 + seed % 5)
        zero += not any(res.coords)
        violations += not res.within_bound
        worst = max(worst, res.projection_norm / res.bound)
    ok = violations == 0 and zero == 0
    report(6, ok, f"100 instances (h=4, l=4), {violations} violations, {zero} zero witnesses, worst norm/bound {worst:.3f}")
    assert ok


def test_criterion_7_witness_pipeline():
    code = MacCode(build_tower(3, 1, "gaussian"))
    calib = small_det_witness_pipeline(code, (1, 2, 3), (2, 2, 2))
    C = calib.constant
    alpha = float(upper_bound_exponents(3, 1, 3, 3).alpha)
    parts, ok = [], calib.sqrt_det <= C * 2**-alpha
    for n in (4, 8, 16):
        r = small_det_witness_pipeline(code, (1, 2, 3), (n, n, n))
        bound = C * n**-alpha
        ok &= r.sqrt_det <= bound
        parts.append(f"N={n}: {r.sqrt_det:.4g} <= {bound:.4g}")
    ex = equal_n_series()
    below = []
    for rec in ex[1:]:
        n = rec.query.bounds[0]
        pipe = small_det_witness_pipeline(two_user_code(), (1, 2), (n, n))
        if pipe.sqrt_det < rec.value * (1 - 1e-9):
            below.append(n)
    ok &= not below
    report(7, ok, f"C = {C:.4g} from N=2; " + "; ".join(parts) + f"; pipeline >= exhaustive on C_2,1 for N=2..6 ({len(below)} exceptions)")
    assert ok


def test_criterion_8_lemma_suites():
    results = run_suite("lemmas", 42)
    ok = all(r.passed for r in results)
    summary = "; ".join(f"{r.name} {r.instances}/{r.violations}" for r in results)
    report(8, ok, f"instances/violations: {summary}")
    assert ok


def test_criterion_9_simulation():
    spec = build_tower(2, 1, "gaussian")
    code = MacCode(spec)
    res = simulate(SimConfig(code, 1, 2, (5.0, 10.0, 15.0, 20.0), 10_000, seed=2024))
    cer, bd = res.ml_cer, res.bd_fail
    monotone = all(a >= b for a, b in zip(cer, cer[1:]))
    dominated = all(f >= e for e, f in zip(cer, bd))
    broken = MacCode(build_tower(2, 1, "gaussian", p=k_element("gaussian", spec.conductor, 1, 0), check_inert=False))
    good = simulate(SimConfig(code, 1, 2, (20.0,), 100_000, seed=2025, bounded_distance=False))
    bad = simulate(SimConfig(broken, 1, 2, (20.0,), 100_000, seed=2025, bounded_distance=False))
    beats = good.ml_cer[0] < bad.ml_cer[0]
    ok = monotone and dominated and beats
    report(
        9,
        ok,
        f"CER {[round(c, 4) for c in cer]} non-increasing: {monotone}; BD failure {[round(b, 4) for b in bd]} >= CER: {dominated}; "
        f"20 dB inert {good.ml_cer[0]:.4f} +- {good.ci_halfwidth[0]:.4f} vs p=1 {bad.ml_cer[0]:.4f} +- {bad.ci_halfwidth[0]:.4f}",
    )
    assert ok


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)

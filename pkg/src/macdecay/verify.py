"""Randomized checks of the determinant lemmas, the Liouville bound and the two-user norm test."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .codes import exact_det, hilbert90_witness, two_user_matrix, two_user_norm_test
from .cyclotomic import embed_numeric
from .lemmas import hadamard_split_bound, liouville_check, minkowski_det_inequality, row_replacement_invariance
from .tower import IntegralElement, TowerSpec, build_tower, minimal_polynomial, relative_norm

__all__ = ["CheckResult", "SUITES", "run_suite"]


@dataclass
class CheckResult:
    name: str
    instances: int
    violations: int
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.instances > 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{status} {self.name}: {self.instances} instances, {self.violations} violations{extra}"


def _cmat(rng, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def check_row_replacement(rng: np.random.Generator, count: int = 1000) -> CheckResult:
    bad = 0
    for _ in range(count):
        k = int(rng.integers(1, 5))
        n = int(rng.integers(k, k + 4))
        c = _cmat(rng, k, n)
        e = c[:-1].copy()
        for i in range(k - 1):
            coef = rng.standard_normal(k - i - 1)
            e[i] = c[i] - coef @ c[i + 1 :]
        bad += not row_replacement_invariance(c, e)
    return CheckResult("row replacement invariance", count, bad)


def check_hadamard(rng: np.random.Generator, count: int = 1000) -> CheckResult:
    bad = 0
    for _ in range(count):
        n = int(rng.integers(1, 6))
        k = int(rng.integers(n, n + 4))
        X = _cmat(rng, n, k)
        perm = rng.permutation(n)
        cuts = sorted(rng.choice(np.arange(1, n), size=int(rng.integers(0, n)), replace=False)) if n > 1 else []
        parts = [p.tolist() for p in np.split(perm, cuts)]
        bad += not hadamard_split_bound(X, parts).holds()
    return CheckResult("generalized Hadamard split", count, bad)


def check_minkowski(rng: np.random.Generator, count: int = 1000) -> CheckResult:
    bad = 0
    for _ in range(count):
        n = int(rng.integers(1, 7))
        A, B = _cmat(rng, n, n), _cmat(rng, n, n)
        A = A @ A.conj().T + 1e-3 * np.eye(n)
        B = B @ B.conj().T + 1e-3 * np.eye(n)
        bad += not minkowski_det_inequality(A, B)
    return CheckResult("Minkowski determinant inequality", count, bad)


def _liouville_fields() -> list[TowerSpec]:
    return [build_tower(3, 1, "gaussian"), build_tower(2, 2, "eisenstein")]


def check_liouville(rng: np.random.Generator, count: int = 1000) -> CheckResult:
    bad, zeros, total = 0, 0, 0
    for spec in _liouville_fields():
        mp = list(minimal_polynomial(spec))
        alpha = embed_numeric(spec.theta).real
        for i in range(count // 2):
            l = int(rng.integers(1, 5))
            P = [int(v) for v in rng.integers(-100, 101, size=l + 1)]
            if P[-1] == 0:
                P[-1] = 1
            if i % 50 == 0 and l >= len(mp) - 1:
                # plant an exact multiple of the minimal polynomial now and then
                extra = l - (len(mp) - 1)
                m = [int(v) for v in rng.integers(1, 3, size=extra + 1)]
                P = [sum(mp[a] * m[b] for a in range(len(mp)) for b in range(len(m)) if a + b == t) for t in range(l + 1)]
            r = liouville_check(P, mp, alpha)
            zeros += r.zero
            bad += not r.holds
            total += 1
    return CheckResult("Liouville bound", total, bad, f"{zeros} exact zeros skipped")


def _quad_tower() -> TowerSpec:
    return build_tower(2, 1, "gaussian")


def _rand_el(spec: TowerSpec, rng, bound: int = 3):
    while True:
        c = [int(v) for v in rng.integers(-bound, bound + 1, size=2 * spec.degree)]
        if any(c):
            return IntegralElement(c).to_cyclotomic(spec)


def check_hilbert90(rng: np.random.Generator, count: int = 100) -> CheckResult:
    bad = 0
    specs = [_quad_tower(), build_tower(2, 1, "eisenstein")]
    for i in range(count):
        spec = specs[i % 2]
        w = _rand_el(spec, rng)
        u = spec.sigma(w) / w
        z = hilbert90_witness(u, spec)
        bad += z.is_zero() or not z.is_integral() or spec.sigma(z) != u * z
    return CheckResult("Hilbert 90 witness", count, bad)


def check_norm_test_singular(rng: np.random.Generator, count: int = 20) -> CheckResult:
    spec = _quad_tower()
    bad = 0
    for _ in range(count):
        a, b, c, w = (_rand_el(spec, rng) for _ in range(4))
        d = b * c * spec.sigma(w) / (a * w)
        res = two_user_norm_test(a, b, c, d, spec)
        if not res.singular_exists or res.witness is None:
            bad += 1
            continue
        x, y = res.witness
        bad += x.is_zero() or y.is_zero() or not exact_det(two_user_matrix(a, b, c, d, x, y, spec)).is_zero()
    return CheckResult("two-user norm test, singular instances", count, bad)


def check_norm_test_full_rank(rng: np.random.Generator, count: int = 20, coord_bound: int = 2) -> CheckResult:
    """Exhaustive search over |coords| <= coord_bound for a singular matrix, which must fail."""
    spec = _quad_tower()
    D = 2 * spec.degree
    ax = np.arange(-coord_bound, coord_bound + 1)
    grid = np.stack(np.meshgrid(*([ax] * D), indexing="ij"), -1).reshape(-1, D)
    grid = grid[np.any(grid != 0, axis=1)]
    emb = spec.basis_numeric  # rows: sigma powers
    xs, sx = grid @ emb[0], grid @ emb[1]
    bad, done = 0, 0
    while done < count:
        a, b, c, d = (_rand_el(spec, rng) for _ in range(4))
        res = two_user_norm_test(a, b, c, d, spec)
        if res.singular_exists:
            continue
        done += 1
        A, B, C, Dn = (embed_numeric(v) for v in (a, b, c, d))
        det = np.outer(A * xs, Dn * sx) - np.outer(B * sx, C * xs)
        for i, j in zip(*np.nonzero(np.abs(det) < 1e-6)):
            x = IntegralElement(grid[i].tolist()).to_cyclotomic(spec)
            y = IntegralElement(grid[j].tolist()).to_cyclotomic(spec)
            bad += exact_det(two_user_matrix(a, b, c, d, x, y, spec)).is_zero()
    return CheckResult("two-user norm test, full-rank instances", count, bad, f"search |coord| <= {coord_bound}")


SUITES: dict[str, list[Callable]] = {
    "lemmas": [
        check_row_replacement,
        check_hadamard,
        check_minkowski,
        check_liouville,
        check_hilbert90,
        check_norm_test_singular,
        check_norm_test_full_rank,
    ],
}


def run_suite(name: str = "lemmas", seed: int = 0) -> list[CheckResult]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    out = []
    for i, fn in enumerate(SUITES[name]):
        rng = np.random.default_rng([seed, i])
        out.append(fn(rng))
    return out

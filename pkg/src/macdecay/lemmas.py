"""Determinant and Diophantine inequalities used by the decay bounds, as checkable functions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .decay import DecayError

__all__ = [
    "HadamardBounds",
    "hadamard_split_bound",
    "row_replacement_invariance",
    "liouville_bound",
    "LiouvilleCheck",
    "liouville_check",
    "poly_height",
    "minkowski_det_inequality",
    "is_positive_definite",
]


def _gram_det(X: np.ndarray) -> float:
    return float(np.linalg.det(X @ np.conj(X.T)).real)


@dataclass(frozen=True)
class HadamardBounds:
    det: float
    block_product: float
    frobenius_product: float

    def holds(self, rtol: float = 1e-9) -> bool:
        slack = rtol * max(1.0, abs(self.block_product), abs(self.frobenius_product))
        return self.det <= self.block_product + slack and self.block_product <= self.frobenius_product + slack


def hadamard_split_bound(X: np.ndarray, partition: Sequence[Sequence[int]]) -> HadamardBounds:
    """det(X X^H) <= prod det(X_i X_i^H) <= prod ||X_i||_F^(2 j_i) / j_i^j_i for a row partition."""
    X = np.asarray(X, dtype=complex)
    rows = sorted(r for part in partition for r in part)
    if rows != list(range(X.shape[0])):
        raise DecayError("partition must cover every row exactly once")
    block, frob = 1.0, 1.0
    for part in partition:
        Xi = X[list(part)]
        j = len(part)
        block *= _gram_det(Xi)
        frob *= np.linalg.norm(Xi) ** (2 * j) / j**j
    return HadamardBounds(_gram_det(X), block, float(frob))


def row_replacement_invariance(c: np.ndarray, e: np.ndarray, rtol: float = 1e-9) -> bool:
    """Compare det(A A^H) and det(B B^H), A = (c_1..c_k), B = (e_1..e_{k-1}, c_k).

    The caller guarantees c_i - e_i lies in the real span of c_{i+1}, ..., c_k.
    """
    c = np.asarray(c, dtype=complex)
    e = np.asarray(e, dtype=complex)
    if e.shape[0] != c.shape[0] - 1:
        raise DecayError("need exactly k-1 replacement rows")
    B = np.vstack([e, c[-1:]]) if e.size else c[-1:]
    da, db = _gram_det(c), _gram_det(B)
    return abs(da - db) <= rtol * max(1.0, abs(da))


def liouville_bound(kappa: int, h_alpha: int, l: int, H: int) -> Fraction:
    """c^l / H^(kappa-1) with c = 1 / (3^(kappa-1) h^kappa)."""
    if min(kappa, h_alpha, l, H) < 1:
        raise DecayError("Liouville bound inputs must be positive integers")
    c = Fraction(1, 3 ** (kappa - 1) * h_alpha**kappa)
    return c**l / Fraction(H) ** (kappa - 1)


def poly_height(coeffs: Sequence[int]) -> int:
    return max(abs(int(v)) for v in coeffs)


def _divides(f: Sequence[int], g: Sequence[int]) -> bool:
    # does f divide g over Q (coefficients low to high)
    r = [Fraction(v) for v in g]
    f = [Fraction(v) for v in f]
    while f and f[-1] == 0:
        f.pop()
    while r and r[-1] == 0:
        r.pop()
    while len(r) >= len(f):
        q = r[-1] / f[-1]
        shift = len(r) - len(f)
        for i, fi in enumerate(f):
            r[shift + i] -= q * fi
        while r and r[-1] == 0:
            r.pop()
    return not r


@dataclass(frozen=True)
class LiouvilleCheck:
    value: mpmath.mpf
    bound: Fraction
    zero: bool

    @property
    def holds(self) -> bool:
        return self.zero or self.value >= mpmath.mpf(self.bound.numerator) / self.bound.denominator


def liouville_check(P: Sequence[int], minpoly: Sequence[int], alpha: complex | mpmath.mpc, dps: int = 50) -> LiouvilleCheck:
    """Evaluate |P(alpha)| against the bound; exact zero test by divisibility by the minimal polynomial.

    Polynomials are given low to high.  ``alpha`` should be a root of ``minpoly``;
    it is polished to ``dps`` digits before evaluation.
    """
    kappa = len(minpoly) - 1
    while P and P[-1] == 0:
        P = P[:-1]
    if not P or not any(P):
        raise DecayError("P must be nonzero")
    l = max(len(P) - 1, 1)
    bound = liouville_bound(kappa, poly_height(minpoly), l, poly_height(P))
    zero = _divides(minpoly, P)
    with mpmath.workdps(dps):
        root = mpmath.findroot(lambda x: mpmath.polyval(list(minpoly[::-1]), x), mpmath.mpmathify(alpha))
        val = abs(mpmath.polyval(list(P[::-1]), root))
    return LiouvilleCheck(val, bound, zero)


def is_positive_definite(A: np.ndarray, tol: float = 1e-12) -> bool:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    if not np.allclose(A, np.conj(A.T), atol=tol * max(1.0, np.abs(A).max())):
        return False
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        return False
    return True


def minkowski_det_inequality(A: np.ndarray, B: np.ndarray, rtol: float = 1e-9) -> bool:
    """det(A+B)^(1/n) >= det(A)^(1/n) + det(B)^(1/n) for Hermitian positive definite A, B."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if not (is_positive_definite(A) and is_positive_definite(B)):
        raise DecayError("both matrices must be Hermitian positive definite")
    n = A.shape[0]
    lhs = np.linalg.det(A + B).real ** (1 / n)
    rhs = np.linalg.det(A).real ** (1 / n) + np.linalg.det(B).real ** (1 / n)
    return bool(lhs >= rhs - rtol * max(1.0, rhs))

"""Multi-user MIMO-MAC lattice codes from the cyclic division algebra (L/F, tau, p).

A user's codeword is the nt x U*nt matrix

    B_j = (M_j, sigma(M_j), ..., p^-m sigma^(j-1)(M_j), ..., sigma^(U-1)(M_j))

where M_j = psi(x_j) is the left regular representation of an element of the
natural order.  Stacking the blocks of several users gives a joint matrix whose
rank is certified exactly through p-adic valuations.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce
from math import gcd
from typing import Sequence

import numpy as np

from .cyclotomic import CyclotomicElement, embed_numeric
from .tower import (
    IntegralElement,
    TowerError,
    TowerSpec,
    _as_element,
    relative_norm,
    valuation,
)

__all__ = [
    "CodeError",
    "MacCode",
    "UserWord",
    "JointMatrix",
    "ValuationCertificate",
    "NormTestResult",
    "psi_matrix",
    "algebra_multiply",
    "user_block",
    "joint_matrix",
    "exact_det",
    "exact_gram_determinant",
    "normalize_word",
    "valuation_certificate",
    "two_user_norm_test",
    "hilbert90_witness",
    "two_user_matrix",
]

Matrix = list[list[CyclotomicElement]]


class CodeError(ValueError):
    pass


def _pow_p(spec: TowerSpec, k: int) -> CyclotomicElement:
    return spec.p**k if k >= 0 else spec.p_inverse ** (-k)


def psi_matrix(xs: Sequence, spec: TowerSpec) -> Matrix:
    """Left regular representation of x_1 + u x_2 + ... + u^(nt-1) x_nt.

    Entry (r, c) is p^[r<c] * tau^c(x_{(r-c) mod nt}); multiplication in the
    algebra follows a*u = u*tau(a) and u^nt = p.
    """
    nt = spec.nt
    if len(xs) != nt:
        raise CodeError(f"psi needs {nt} slots, got {len(xs)}")
    els = [_as_element(x, spec) for x in xs]
    out: Matrix = []
    for r in range(nt):
        row = []
        for c in range(nt):
            val = spec.tau(els[(r - c) % nt], c)
            if r < c:
                val = spec.p * val
            row.append(val)
        out.append(row)
    return out


def algebra_multiply(x: Sequence, y: Sequence, spec: TowerSpec) -> list[CyclotomicElement]:
    """Product in (L/F, tau, p) of elements written sum_i u^i x_i (slot i = x_{i+1})."""
    nt = spec.nt
    xs = [_as_element(v, spec) for v in x]
    ys = [_as_element(v, spec) for v in y]
    out = [CyclotomicElement.zero(spec.conductor) for _ in range(nt)]
    # (u^i a)(u^j b) = u^(i+j) tau^j(a) b
    for i, a in enumerate(xs):
        if a.is_zero():
            continue
        for j, b in enumerate(ys):
            if b.is_zero():
                continue
            term = spec.tau(a, j) * b
            k = i + j
            if k >= nt:
                term = spec.p * term
                k -= nt
            out[k] = out[k] + term
    return out


def _sigma_matrix(M: Matrix, spec: TowerSpec, power: int) -> Matrix:
    return [[spec.sigma(v, power) for v in row] for row in M]


def user_block(j: int, M: Matrix, spec: TowerSpec, m: int | None = None) -> Matrix:
    """nt x U*nt block row of user j (1-based): block c is sigma^(c-1)(M), scaled by p^-m at c = j."""
    if not 1 <= j <= spec.U:
        raise CodeError(f"user index {j} outside 1..{spec.U}")
    m = spec.m if m is None else m
    scale = _pow_p(spec, -m)
    rows: Matrix = [[] for _ in range(spec.nt)]
    for c in range(spec.U):
        blk = _sigma_matrix(M, spec, c)
        for r in range(spec.nt):
            rows[r].extend(v * scale if c == j - 1 else v for v in blk[r])
    return rows


def exact_det(M: Matrix) -> CyclotomicElement:
    """Determinant by Laplace expansion memoized over column subsets (no divisions)."""
    n = len(M)
    if n == 0:
        raise CodeError("empty matrix")
    if any(len(row) != n for row in M):
        raise CodeError("determinant of a non-square matrix")
    cond = M[0][0].conductor
    zero = CyclotomicElement.zero(cond)
    memo: dict[int, CyclotomicElement] = {}

    def rec(r: int, mask: int) -> CyclotomicElement:
        if r == n:
            return CyclotomicElement.one(cond)
        if mask in memo:
            return memo[mask]
        total = zero
        sign = 1
        for c in range(n):
            if mask >> c & 1:
                continue
            a = M[r][c]
            if not a.is_zero():
                sub = rec(r + 1, mask | (1 << c))
                if not sub.is_zero():
                    term = a * sub
                    total = total + term if sign > 0 else total - term
            sign = -sign
        memo[mask] = total
        return total

    return rec(0, 0)


@dataclass(frozen=True)
class UserWord:
    """Integer coordinates of one user's codeword: slot i uses coords[i] over the working basis."""

    user: int  # 1-based
    coords: tuple[tuple[int, ...], ...]
    bound: int | None = None

    def __post_init__(self):
        coords = tuple(tuple(int(c) for c in slot) for slot in self.coords)
        object.__setattr__(self, "coords", coords)
        if self.bound is not None and any(abs(c) > self.bound for s in coords for c in s):
            raise CodeError(f"coordinate exceeds bound N={self.bound}")

    @classmethod
    def from_flat(cls, user: int, flat: Sequence[int], nt: int, bound: int | None = None) -> UserWord:
        flat = [int(v) for v in flat]
        step = len(flat) // nt
        return cls(user, tuple(tuple(flat[i * step : (i + 1) * step]) for i in range(nt)), bound)

    def flat(self) -> tuple[int, ...]:
        return tuple(c for s in self.coords for c in s)

    def is_zero(self) -> bool:
        return not any(self.flat())

    def elements(self, spec: TowerSpec) -> list[CyclotomicElement]:
        return [IntegralElement(s).to_cyclotomic(spec) for s in self.coords]


@dataclass
class JointMatrix:
    users: tuple[int, ...]
    exact: Matrix
    numeric: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.numeric.shape


class MacCode:
    """The U-user code C_{U,nt}(L/K, p, sigma, m) built on a validated tower."""

    def __init__(self, spec: TowerSpec, m: int | None = None):
        self.spec = spec
        self.m = spec.m if m is None else int(m)
        if self.m * 2 <= spec.U * (spec.nt - 1):
            raise CodeError(f"m={self.m} must exceed U(nt-1)/2")

    def __repr__(self) -> str:
        s = self.spec
        return f"MacCode(U={s.U}, nt={s.nt}, K={s.K_kind}, h={s.h}, m={self.m})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MacCode):
            return NotImplemented
        return self.spec == other.spec and self.m == other.m

    def __hash__(self) -> int:
        return hash((self.spec, self.m))

    @property
    def U(self) -> int:
        return self.spec.U

    @property
    def nt(self) -> int:
        return self.spec.nt

    @property
    def k(self) -> int:
        """Code length (columns), equal to U*nt."""
        return self.spec.degree

    @property
    def dim_per_slot(self) -> int:
        return 2 * self.spec.degree

    @property
    def lattice_dim(self) -> int:
        """Real dimension 2*U*nt^2 of each user's lattice."""
        return self.nt * self.dim_per_slot

    @cached_property
    def p_numeric(self) -> complex:
        return embed_numeric(self.spec.p)

    @cached_property
    def generators(self) -> np.ndarray:
        """Numeric lattice generators, shape (U, lattice_dim, nt, k)."""
        spec, U, nt, k = self.spec, self.U, self.nt, self.k
        D = self.dim_per_slot
        emb = spec.basis_numeric  # [sigma power, basis index]
        p = self.p_numeric
        scale = p ** (-self.m)
        out = np.zeros((U, nt * D, nt, k), dtype=complex)
        for j in range(U):
            for s in range(nt):
                for b in range(D):
                    g = out[j, s * D + b]
                    for cb in range(U):
                        for r in range(nt):
                            c = (r - s) % nt  # column where slot s appears in row r
                            val = emb[(cb + U * c) % k, b]
                            if r < c:
                                val = val * p
                            if cb == j:
                                val = val * scale
                            g[r, cb * nt + c] = val
        return out

    @cached_property
    def generators_real(self) -> np.ndarray:
        """Generators flattened to real vectors, shape (U, lattice_dim, 2*nt*k)."""
        g = self.generators.reshape(self.U, self.lattice_dim, -1)
        return np.concatenate([g.real, g.imag], axis=-1)

    def check_lattice_rank(self) -> bool:
        return all(
            np.linalg.matrix_rank(self.generators_real[j]) == self.lattice_dim for j in range(self.U)
        )

    def word_numeric(self, j: int, flat_coords) -> np.ndarray:
        """Numeric nt x k codeword(s) of user j (1-based) from flattened coordinates."""
        c = np.asarray(flat_coords, dtype=float)
        return np.tensordot(c, self.generators[j - 1], axes=([-1], [0]))

    def word_exact(self, word: UserWord) -> Matrix:
        M = psi_matrix(word.elements(self.spec), self.spec)
        return user_block(word.user, M, self.spec, self.m)

    def exact_generator(self, j: int, index: int) -> Matrix:
        flat = [0] * self.lattice_dim
        flat[index] = 1
        return self.word_exact(UserWord.from_flat(j, flat, self.nt))

    def descriptor(self) -> dict:
        gens = self.generators
        return {
            "tower": self.spec.to_json(),
            "m": self.m,
            "lattice_dim": self.lattice_dim,
            "generators_numeric": [
                [[[[float(z.real), float(z.imag)] for z in row] for row in g] for g in gens[j]]
                for j in range(self.U)
            ],
            "generators_exact": [
                [
                    [[v.to_json() for v in row] for row in self.exact_generator(j + 1, i)]
                    for i in range(self.lattice_dim)
                ]
                for j in range(self.U)
            ],
        }

    @classmethod
    def from_descriptor(cls, obj: dict) -> MacCode:
        code = cls(TowerSpec.from_json(obj["tower"]), int(obj["m"]))
        if "generators_exact" in obj:
            for j, gens in enumerate(obj["generators_exact"]):
                for i, mat in enumerate(gens):
                    stored = [[CyclotomicElement.from_json(v) for v in row] for row in mat]
                    if stored != code.exact_generator(j + 1, i):
                        raise CodeError(f"descriptor generator ({j + 1}, {i}) does not match the tower")
        return code


def joint_matrix(words: Sequence[UserWord], code: MacCode) -> JointMatrix:
    """Stack the block rows of the given users (in the given order)."""
    if not words:
        raise CodeError("joint matrix of an empty user subset")
    users = tuple(w.user for w in words)
    if len(set(users)) != len(users):
        raise CodeError("repeated user in subset")
    exact: Matrix = []
    numeric = []
    for w in words:
        if len(w.coords) != code.nt or any(len(s) != code.dim_per_slot for s in w.coords):
            raise CodeError("word shape does not match the code")
        exact.extend(code.word_exact(w))
        numeric.append(code.word_numeric(w.user, w.flat()))
    return JointMatrix(users, exact, np.concatenate(numeric, axis=0))


def _conj_transpose(M: Matrix) -> Matrix:
    return [[M[r][c].conjugate() for r in range(len(M))] for c in range(len(M[0]))]


def _matmul(A: Matrix, B: Matrix) -> Matrix:
    cond = A[0][0].conductor
    out = []
    for row in A:
        new = []
        for c in range(len(B[0])):
            acc = CyclotomicElement.zero(cond)
            for a, brow in zip(row, B):
                if not a.is_zero() and not brow[c].is_zero():
                    acc = acc + a * brow[c]
            new.append(acc)
        out.append(new)
    return out


def exact_gram_determinant(A: JointMatrix | Matrix, spec: TowerSpec | None = None) -> CyclotomicElement:
    """det(A) for square A, otherwise det(A A^dagger), computed exactly.

    When ``spec`` is given and A is square the result is checked to lie in the
    center F of the algebra.
    """
    M = A.exact if isinstance(A, JointMatrix) else A
    rows, cols = len(M), len(M[0])
    if rows == cols:
        d = exact_det(M)
        if spec is not None and not d.is_zero() and not spec.in_F(d):
            raise CodeError("square joint determinant is not in F")
        return d
    return exact_det(_matmul(M, _conj_transpose(M)))


def normalize_word(xs: Sequence, spec: TowerSpec) -> tuple[list[CyclotomicElement], int]:
    """Divide every slot by p^k, k the minimum slot valuation; returns (slots, k)."""
    els = [_as_element(x, spec) for x in xs]
    vals = [valuation(x, spec) for x in els if not x.is_zero()]
    if not vals:
        raise CodeError("cannot normalize the zero word")
    k = int(min(vals))
    if k:
        f = _pow_p(spec, -k)
        els = [x * f for x in els]
    return els, k


@dataclass(frozen=True)
class ValuationCertificate:
    valuation: int
    shift: int
    det: CyclotomicElement


def valuation_certificate(xs: Sequence, spec: TowerSpec) -> ValuationCertificate:
    """Valuation of det(psi(x)) after normalization; asserted to lie in [0, nt-1]."""
    if all(_as_element(x, spec).is_zero() for x in xs):
        raise CodeError("valuation certificate of the zero word")
    norm, shift = normalize_word(xs, spec)
    det = exact_det(psi_matrix(norm, spec))
    if det.is_zero():
        raise CodeError("reduced norm vanished on a nonzero element")
    v = valuation(det, spec)
    if not 0 <= v <= spec.nt - 1:
        raise CodeError(f"valuation {v} outside [0, {spec.nt - 1}]")
    return ValuationCertificate(int(v), shift, det)


def hilbert90_witness(u, spec: TowerSpec, max_candidates: int | None = None) -> CyclotomicElement:
    """Nonzero algebraic integer z in L with sigma(z) = u * z, given N_{L/K}(u) = 1.

    Uses z = sum_k c_k sigma^k(v) with c_0 = 1, c_{k+1} = sigma(c_k)/u over
    working-basis candidates v, then clears denominators and content.
    """
    u = _as_element(u, spec)
    if u.is_zero() or relative_norm(u, spec, "L/K") != 1:
        raise CodeError("Hilbert 90 needs an element of relative norm 1")
    d = spec.degree
    uinv = u.inverse()
    coeffs = [CyclotomicElement.one(spec.conductor)]
    for _ in range(1, d):
        coeffs.append(spec.sigma(coeffs[-1]) * uinv)
    candidates = list(spec.basis)
    # sums of pairs catch the rare case where every single basis element gives zero
    candidates += [a + b for i, a in enumerate(spec.basis) for b in spec.basis[i + 1 :]]
    if max_candidates is not None:
        candidates = candidates[:max_candidates]
    for v in candidates:
        z = CyclotomicElement.zero(spec.conductor)
        for k, c in enumerate(coeffs):
            z = z + c * spec.sigma(v, k)
        if z.is_zero():
            continue
        z = z * z.den
        g = reduce(gcd, z.num, 0)
        if g > 1:
            z = z / g
        if spec.sigma(z) != u * z:
            raise CodeError("Hilbert 90 construction failed its exact check")
        return z
    raise CodeError("no nonzero Hilbert 90 witness among basis candidates")


@dataclass(frozen=True)
class NormTestResult:
    singular_exists: bool
    norm_det: CyclotomicElement
    witness: tuple[CyclotomicElement, CyclotomicElement] | None = None

    @property
    def status(self) -> str:
        return "singular_exists" if self.singular_exists else "full_rank"


def two_user_norm_test(a, b, c, d, spec: TowerSpec) -> NormTestResult:
    """Decide whether some [[a x, b sigma(x)], [c y, d sigma(y)]] with x, y != 0 is singular.

    This happens iff N(a)N(d) - N(b)N(c) = 0 for N = N_{L/K}.  A singular witness
    (x, y) is returned when one exists.
    """
    if spec.degree != 2:
        raise CodeError("the two-user norm test needs a quadratic extension L/K")
    a, b, c, d = (_as_element(v, spec) for v in (a, b, c, d))
    N = lambda v: relative_norm(v, spec, "L/K")  # noqa: E731
    det = N(a) * N(d) - N(b) * N(c)
    if not det.is_zero():
        return NormTestResult(False, det)
    one = CyclotomicElement.one(spec.conductor)
    if b.is_zero() or c.is_zero():
        return NormTestResult(True, det, (one, one))
    z = hilbert90_witness(a * d / (b * c), spec)
    return NormTestResult(True, det, (z, one))


def two_user_matrix(a, b, c, d, x, y, spec: TowerSpec) -> Matrix:
    a, b, c, d, x, y = (_as_element(v, spec) for v in (a, b, c, d, x, y))
    return [[a * x, b * spec.sigma(x)], [c * y, d * spec.sigma(y)]]

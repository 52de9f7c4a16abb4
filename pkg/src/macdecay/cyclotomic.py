"""Exact arithmetic in cyclotomic fields Q(zeta_n).

Every algebraic number used by the package lives in one ambient field
``Q(zeta_n)``.  Elements are stored in the power basis ``1, z, ..., z^(phi-1)``
reduced modulo the n-th cyclotomic polynomial, as an integer numerator vector
over a single positive denominator.  Because ``Z[zeta_n]`` is the full ring of
integers and the power basis is an integral basis, an element is an algebraic
integer exactly when its denominator is 1.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd, lcm
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "CyclotomicElement",
    "CyclotomicError",
    "CyclotomicZeroDivision",
    "cyclotomic_polynomial",
    "euler_phi",
    "apply_automorphism",
    "embed_numeric",
    "lift_conductor",
    "cyc_arith",
    "common_conductor",
]

_INT64_SAFE = 2**62


class CyclotomicError(ValueError):
    """Raised on conductor mismatches, bad automorphisms and division by zero."""


class CyclotomicZeroDivision(CyclotomicError, ZeroDivisionError):
    pass


def euler_phi(n: int) -> int:
    result, m, q = n, n, 2
    while q * q <= m:
        if m % q == 0:
            while m % q == 0:
                m //= q
            result -= result // q
        q += 1
    if m > 1:
        result -= result // m
    return result


def _poly_divexact(a: list[int], b: list[int]) -> list[int]:
    # exact division of integer polynomials, b monic; coefficients low->high
    a = list(a)
    out = [0] * (len(a) - len(b) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = a[i + len(b) - 1]
        out[i] = c
        if c:
            for j, bj in enumerate(b):
                a[i + j] -= c * bj
    assert not any(a), "inexact division"
    return out


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients (low to high) of the n-th cyclotomic polynomial."""
    if n < 1:
        raise CyclotomicError(f"conductor must be positive, got {n}")
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_divexact(poly, list(cyclotomic_polynomial(d)))
    return tuple(poly)


@lru_cache(maxsize=None)
def _reduction_matrix(n: int) -> np.ndarray:
    """Row k holds the coefficients of x^k mod Phi_n, for 0 <= k < n."""
    phi = euler_phi(n)
    cp = cyclotomic_polynomial(n)
    rows = np.zeros((n, phi), dtype=object)
    cur = [0] * phi
    cur[0] = 1
    for k in range(n):
        rows[k] = cur
        # multiply by x and reduce
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * cp[j] for j, c in enumerate(cur)]
    return rows


@lru_cache(maxsize=None)
def _reduction_matrix_int(n: int) -> np.ndarray:
    return _reduction_matrix(n).astype(np.int64)


@lru_cache(maxsize=None)
def _automorphism_matrix(n: int, exp: int) -> np.ndarray:
    phi = euler_phi(n)
    red = _reduction_matrix(n)
    return np.array([red[(j * exp) % n] for j in range(phi)], dtype=object)


@lru_cache(maxsize=None)
def _roots(n: int) -> np.ndarray:
    phi = euler_phi(n)
    return np.exp(2j * np.pi * np.arange(phi) / n)


def _content(values: Iterable[int]) -> int:
    return reduce(gcd, values, 0)


class CyclotomicElement:
    """An immutable element of Q(zeta_n) in canonical reduced form.

    ``coeffs`` exposes the rational power-basis coefficients; ``num`` and
    ``den`` give the equivalent integer vector over a common denominator.
    """

    __slots__ = ("_n", "_num", "_den", "_hash")

    def __init__(self, conductor: int, coeffs: Sequence[int | Fraction] | None = None):
        n = int(conductor)
        if n < 1:
            raise CyclotomicError(f"conductor must be positive, got {n}")
        phi = euler_phi(n)
        if coeffs is None:
            coeffs = [0] * phi
        if len(coeffs) != phi:
            raise CyclotomicError(f"expected {phi} coefficients for conductor {n}, got {len(coeffs)}")
        fr = [Fraction(c) for c in coeffs]
        den = lcm(*(f.denominator for f in fr)) if fr else 1
        num = tuple(int(f.numerator * (den // f.denominator)) for f in fr)
        self._set(n, num, den)

    def _set(self, n: int, num: tuple[int, ...], den: int) -> None:
        g = gcd(_content(num), den)
        if g > 1:
            num = tuple(v // g for v in num)
            den //= g
        if not any(num):
            den = 1
        self._n = n
        self._num = num
        self._den = den
        self._hash = None

    @classmethod
    def _raw(cls, n: int, num: Sequence[int], den: int = 1) -> CyclotomicElement:
        obj = cls.__new__(cls)
        if den < 0:
            num, den = [-v for v in num], -den
        obj._set(n, tuple(int(v) for v in num), int(den))
        return obj

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> CyclotomicElement:
        return cls._raw(n, [0] * euler_phi(n))

    @classmethod
    def one(cls, n: int) -> CyclotomicElement:
        return cls.from_rational(n, 1)

    @classmethod
    def from_rational(cls, n: int, q: int | Fraction) -> CyclotomicElement:
        q = Fraction(q)
        num = [0] * euler_phi(n)
        num[0] = q.numerator
        return cls._raw(n, num, q.denominator)

    @classmethod
    def zeta(cls, n: int, k: int = 1) -> CyclotomicElement:
        """The power zeta_n^k."""
        return cls._raw(n, list(_reduction_matrix(n)[k % n]))

    @classmethod
    def from_exponents(cls, n: int, terms: dict[int, int | Fraction]) -> CyclotomicElement:
        """Build sum of c * zeta_n^k from a mapping k -> c."""
        out = cls.zero(n)
        for k, c in terms.items():
            out = out + cls.zeta(n, k) * c
        return out

    # properties ---------------------------------------------------------
    @property
    def conductor(self) -> int:
        return self._n

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(v, self._den) for v in self._num)

    @property
    def num(self) -> tuple[int, ...]:
        return self._num

    @property
    def den(self) -> int:
        return self._den

    def is_zero(self) -> bool:
        return not any(self._num)

    def is_integral(self) -> bool:
        return self._den == 1

    def is_rational(self) -> bool:
        return not any(self._num[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise CyclotomicError("element is not rational")
        return Fraction(self._num[0], self._den)

    def height(self) -> int:
        return max((abs(v) for v in self._num), default=0)

    # dunder -------------------------------------------------------------
    def __repr__(self) -> str:
        terms = []
        for j, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}*z^{j}" if j else f"{c}")
        body = " + ".join(terms) if terms else "0"
        return f"CyclotomicElement(n={self._n}: {body})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = CyclotomicElement.from_rational(self._n, other)
        if not isinstance(other, CyclotomicElement):
            return NotImplemented
        return self._n == other._n and self._den == other._den and self._num == other._num

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._n, self._num, self._den))
        return self._hash

    def _coerce(self, other) -> CyclotomicElement:
        if isinstance(other, CyclotomicElement):
            if other._n != self._n:
                raise CyclotomicError(
                    f"conductor mismatch {self._n} vs {other._n}; lift to a common conductor first"
                )
            return other
        if isinstance(other, (int, Fraction, np.integer)):
            return CyclotomicElement.from_rational(self._n, int(other) if isinstance(other, np.integer) else other)
        raise TypeError(f"cannot combine CyclotomicElement with {type(other).__name__}")

    def __add__(self, other) -> CyclotomicElement:
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        den = lcm(self._den, o._den)
        a, b = den // self._den, den // o._den
        return CyclotomicElement._raw(self._n, [a * x + b * y for x, y in zip(self._num, o._num)], den)

    __radd__ = __add__

    def __neg__(self) -> CyclotomicElement:
        return CyclotomicElement._raw(self._n, [-x for x in self._num], self._den)

    def __sub__(self, other) -> CyclotomicElement:
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> CyclotomicElement:
        return (-self) + other

    def __mul__(self, other) -> CyclotomicElement:
        if isinstance(other, (int, Fraction, np.integer)):
            q = Fraction(int(other) if isinstance(other, np.integer) else other)
            return CyclotomicElement._raw(
                self._n, [x * q.numerator for x in self._num], self._den * q.denominator
            )
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return CyclotomicElement._raw(self._n, _mul_num(self._n, self._num, o._num), self._den * o._den)

    __rmul__ = __mul__

    def inverse(self) -> CyclotomicElement:
        if self.is_zero():
            raise CyclotomicZeroDivision("inverse of zero cyclotomic element")
        inv = _poly_inverse_mod(list(self.coeffs), [Fraction(c) for c in cyclotomic_polynomial(self._n)])
        return CyclotomicElement(self._n, inv)

    def __truediv__(self, other) -> CyclotomicElement:
        if isinstance(other, (int, Fraction, np.integer)):
            if other == 0:
                raise CyclotomicZeroDivision("division by zero")
            return self * (1 / Fraction(int(other) if isinstance(other, np.integer) else other))
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other) -> CyclotomicElement:
        return self._coerce(other) / self

    def __pow__(self, k: int) -> CyclotomicElement:
        if k < 0:
            return self.inverse() ** (-k)
        result = CyclotomicElement.one(self._n)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __complex__(self) -> complex:
        return embed_numeric(self)

    def conjugate(self) -> CyclotomicElement:
        return apply_automorphism(self, self._n - 1)

    def to_json(self) -> dict:
        return {"conductor": self._n, "coeffs": [[c.numerator, c.denominator] for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj: dict) -> CyclotomicElement:
        return cls(int(obj["conductor"]), [Fraction(int(a), int(b)) for a, b in obj["coeffs"]])


def _mul_num(n: int, a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Integer product of two reduced numerator vectors, reduced mod Phi_n."""
    phi = len(a)
    if not any(a) or not any(b):
        return [0] * phi
    red_int = _reduction_matrix_int(n)
    ha = max(abs(v) for v in a)
    hb = max(abs(v) for v in b)
    rmax = int(np.abs(red_int).max()) if red_int.size else 1
    if ha * hb * phi * n * rmax < _INT64_SAFE:
        prod = np.convolve(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        folded = np.zeros(n, dtype=np.int64)
        head = min(n, prod.size)
        folded[:head] = prod[:head]
        if prod.size > n:
            folded[: prod.size - n] += prod[n:]
        return (folded @ red_int).tolist()
    prod = np.convolve(np.asarray(a, dtype=object), np.asarray(b, dtype=object))
    folded = [0] * n
    for k, v in enumerate(prod):
        folded[k % n] += v
    red = _reduction_matrix(n)
    out = [0] * phi
    for k, v in enumerate(folded):
        if v:
            row = red[k]
            for j in range(phi):
                if row[j]:
                    out[j] += v * row[j]
    return out


def _poly_trim(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_divmod(a: list[Fraction], b: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    a = _poly_trim(list(a))
    b = _poly_trim(list(b))
    if not b:
        raise CyclotomicZeroDivision("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    lead = b[-1]
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        c = a[-1] / lead
        q[shift] = c
        for j, bj in enumerate(b):
            a[shift + j] -= c * bj
        _poly_trim(a)
    return q, a


def _poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_sub(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    m = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (m - len(a))
    b = list(b) + [Fraction(0)] * (m - len(b))
    return _poly_trim([x - y for x, y in zip(a, b)])


def _poly_inverse_mod(a: list[Fraction], mod: list[Fraction]) -> list[Fraction]:
    """Inverse of a modulo an irreducible polynomial via extended Euclid."""
    r0, r1 = _poly_trim(list(mod)), _poly_trim(list(a))
    s0, s1 = [], [Fraction(1)]
    while len(r1) > 1:
        q, r = _poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
    if not r1:
        raise CyclotomicZeroDivision("element is not invertible modulo the cyclotomic polynomial")
    c = r1[0]
    inv = [x / c for x in s1]
    _, inv = _poly_divmod(inv, mod)
    deg = len(mod) - 1
    return inv + [Fraction(0)] * (deg - len(inv))


# module-level operations ---------------------------------------------------


def cyc_arith(a: CyclotomicElement, b: CyclotomicElement, op: str) -> CyclotomicElement:
    """Dispatch ``add``, ``sub``, ``mul`` or ``div`` on two same-conductor elements."""
    if a.conductor != b.conductor:
        raise CyclotomicError(f"conductor mismatch {a.conductor} vs {b.conductor}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b.is_zero():
            raise CyclotomicZeroDivision("division by zero cyclotomic element")
        return a / b
    raise ValueError(f"unknown op {op!r}")


def apply_automorphism(a: CyclotomicElement, exp: int) -> CyclotomicElement:
    """Image of ``a`` under zeta_n -> zeta_n^exp."""
    n = a.conductor
    exp %= n
    if gcd(exp, n) != 1:
        raise CyclotomicError(f"exponent {exp} is not a unit modulo {n}")
    if exp == 1 or a.is_rational():
        return a
    mat = _automorphism_matrix(n, exp)
    num = np.asarray(a.num, dtype=object) @ mat
    return CyclotomicElement._raw(n, list(num), a.den)


def embed_numeric(a: CyclotomicElement) -> complex:
    """Evaluate at zeta_n = exp(2 pi i / n) in double precision."""
    vals = np.asarray(a.num, dtype=float)
    return complex(vals @ _roots(a.conductor)) / a.den


def embed_many(elements: Sequence[CyclotomicElement]) -> np.ndarray:
    return np.array([embed_numeric(e) for e in elements], dtype=complex)


def lift_conductor(a: CyclotomicElement, n2: int) -> CyclotomicElement:
    """Represent ``a`` inside Q(zeta_n2); requires conductor(a) | n2."""
    n = a.conductor
    if n2 % n:
        raise CyclotomicError(f"conductor {n} does not divide {n2}")
    if n2 == n:
        return a
    step = n2 // n
    red = _reduction_matrix(n2)
    out = [0] * euler_phi(n2)
    for j, c in enumerate(a.num):
        if c:
            row = red[(j * step) % n2]
            for k in range(len(out)):
                if row[k]:
                    out[k] += c * row[k]
    return CyclotomicElement._raw(n2, out, a.den)


def common_conductor(*elements: CyclotomicElement) -> list[CyclotomicElement]:
    n = lcm(*(e.conductor for e in elements))
    return [lift_conductor(e, n) for e in elements]

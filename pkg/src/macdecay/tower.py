"""Field towers K < F < L inside a cyclotomic ambient, with inert primes.

``K`` is Q(i) or Q(sqrt(-3)); ``L = K(theta)`` for a real period ``theta`` of
Q(zeta_h); ``sigma`` generates Gal(L/K) and ``tau = sigma^U`` fixes the middle
field ``F``.  All fields are realized in Q(zeta_n) with n = lcm(h, 4) or
lcm(h, 3), so Galois automorphisms are exponent maps zeta_n -> zeta_n^e.

The working order used for code lattices is ``O_K[theta]`` with Z-basis
``{theta^j, beta*theta^j}``.  It can be a proper suborder of O_L; valuations are
computed through relative norms and are therefore the true O_L valuations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm, isqrt
from typing import Sequence

import numpy as np

from .cyclotomic import (
    CyclotomicElement,
    apply_automorphism,
    euler_phi,
    lift_conductor,
)

__all__ = [
    "TowerError",
    "TableRow",
    "TABLE_ROWS",
    "TowerSpec",
    "IntegralElement",
    "InertCertificate",
    "build_tower",
    "catalog_rows",
    "verify_inert",
    "relative_norm",
    "valuation",
    "sigma_apply",
    "k_element",
    "default_m",
]

INF = float("inf")


class TowerError(ValueError):
    """A tower failed validation (inertness, Galois order, reality, ...)."""


@dataclass(frozen=True)
class TableRow:
    """One catalog row: the real generator theta = sum of zeta_h^k over ``exponents``."""

    degree: int
    h: int
    exponents: tuple[int, ...]
    p_gaussian: tuple[int, int]  # a + b*i
    p_eisenstein: tuple[int, int]  # a + b*sqrt(-3)
    standard: bool = True  # False for the small rows kept for quick experiments

    def field_label(self) -> str:
        if self.h == 1:
            return "K"
        parts = []
        for e in self.exponents:
            e = e if e <= self.h // 2 else e - self.h
            parts.append(f"z{self.h}^{e}" if e != 1 else f"z{self.h}")
        return "K(" + "+".join(parts) + ")"


# Degrees 3-7 are the published examples; degrees 1-2 extend the catalog so that
# single-antenna two-user codes and the degenerate one-user tower are available.
TABLE_ROWS: dict[int, TableRow] = {
    1: TableRow(1, 1, (0,), (1, 1), (0, 1), standard=False),
    2: TableRow(2, 5, (1, 4), (1, 1), (0, 1), standard=False),
    3: TableRow(3, 7, (1, 6), (2, 1), (0, 1)),
    4: TableRow(4, 17, (1, 4, 13, 16), (2, 1), (0, 1)),
    5: TableRow(5, 11, (1, 10), (1, 1), (2, 1)),
    6: TableRow(6, 13, (1, 12), (1, 1), (2, 1)),
    7: TableRow(7, 29, (1, 12, 17, 28), (1, 1), (0, 1)),
}


def catalog_rows() -> list[dict]:
    rows = []
    for deg, row in sorted(TABLE_ROWS.items()):
        rows.append(
            {
                "degree": deg,
                "field": row.field_label(),
                "h": row.h,
                "p_gaussian": _fmt_k(row.p_gaussian, "i"),
                "p_eisenstein": _fmt_k(row.p_eisenstein, "sqrt(-3)"),
                "standard": row.standard,
            }
        )
    return rows


def _fmt_k(ab: tuple[int, int], unit: str) -> str:
    a, b = ab
    if b == 0:
        return str(a)
    bs = "" if abs(b) == 1 else str(abs(b))
    sign = "-" if b < 0 else "+"
    if a == 0:
        return f"{'-' if b < 0 else ''}{bs}{unit}"
    return f"{a}{sign}{bs}{unit}"


def _ambient(kind: str, h: int) -> int:
    if kind == "gaussian":
        return lcm(h, 4)
    if kind == "eisenstein":
        return lcm(h, 3)
    raise TowerError(f"unknown K kind {kind!r}; expected 'gaussian' or 'eisenstein'")


def k_element(kind: str, n: int, a: int | Fraction, b: int | Fraction) -> CyclotomicElement:
    """a + b*i (gaussian) or a + b*sqrt(-3) (eisenstein) at conductor n."""
    if kind == "gaussian":
        unit = lift_conductor(CyclotomicElement.zeta(4), n)
    else:
        w = lift_conductor(CyclotomicElement.zeta(3), n)
        unit = 2 * w + 1
    return unit * b + a


def _k_generator(kind: str, n: int) -> CyclotomicElement:
    # beta for the working-order basis: i, or omega = zeta_3 so that O_K is contained
    if kind == "gaussian":
        return lift_conductor(CyclotomicElement.zeta(4), n)
    return lift_conductor(CyclotomicElement.zeta(3), n)


def _crt(r1: int, m1: int, r2: int, m2: int) -> int:
    # gcd(m1, m2) == 1
    for x in range(r1 % m1, m1 * m2, m1):
        if x % m2 == r2 % m2:
            return x
    raise TowerError("CRT failed")


def default_m(U: int, nt: int) -> int:
    """Smallest integer strictly greater than U(nt-1)/2."""
    return U * (nt - 1) // 2 + 1


@dataclass(frozen=True)
class InertCertificate:
    inert: bool
    q: int  # residue field size |O_K/(p)|
    char: int  # residue characteristic
    residue_ext: int  # [O_K/(p) : F_char]
    degree: int
    minpoly: tuple[int, ...]
    transcript: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class TowerSpec:
    U: int
    nt: int
    K_kind: str
    h: int
    theta: CyclotomicElement
    sigma_exp: int
    p: CyclotomicElement
    m: int
    theta_exponents: tuple[int, ...] = ()
    certificate: InertCertificate | None = field(default=None, compare=False)

    @property
    def degree(self) -> int:
        return self.U * self.nt

    @property
    def conductor(self) -> int:
        return self.theta.conductor

    @cached_property
    def ambient_sigma(self) -> int:
        """Exponent on zeta_n realizing sigma (fixes K, acts as sigma_exp on zeta_h)."""
        k_mod = 4 if self.K_kind == "gaussian" else 3
        if self.h == 1:
            return 1
        return _crt(self.sigma_exp, self.h, 1, k_mod)

    @cached_property
    def beta(self) -> CyclotomicElement:
        return _k_generator(self.K_kind, self.conductor)

    @cached_property
    def p_inverse(self) -> CyclotomicElement:
        return self.p.inverse()

    @cached_property
    def fixing_group(self) -> tuple[int, ...]:
        """Generators of the subgroup of (Z/n)^* fixing L pointwise."""
        n = self.conductor
        group = [e for e in range(1, n) if gcd(e, n) == 1] if n > 1 else [1]
        members = [
            e
            for e in group
            if apply_automorphism(self.beta, e) == self.beta
            and apply_automorphism(self.theta, e) == self.theta
        ]
        gens: list[int] = []
        closure = {1 % n if n > 1 else 0}
        for e in members:
            if e in closure:
                continue
            gens.append(e)
            closure = _closure(closure | {e}, n)
        return tuple(gens)

    @cached_property
    def basis(self) -> tuple[CyclotomicElement, ...]:
        """Z-basis {theta^j} + {beta*theta^j} of the working order."""
        powers = [CyclotomicElement.one(self.conductor)]
        for _ in range(1, self.degree):
            powers.append(powers[-1] * self.theta)
        return tuple(powers) + tuple(self.beta * t for t in powers)

    @cached_property
    def basis_matrix(self) -> np.ndarray:
        """Integer matrix mapping working-order coordinates to ambient numerators."""
        return np.array([b.num for b in self.basis], dtype=object)

    @cached_property
    def basis_numeric(self) -> np.ndarray:
        from .cyclotomic import embed_numeric

        return np.array(
            [[embed_numeric(self.sigma(b, k)) for b in self.basis] for k in range(self.degree)],
            dtype=complex,
        )

    def sigma(self, x: CyclotomicElement, power: int = 1) -> CyclotomicElement:
        power %= self.degree
        if power == 0:
            return x
        return apply_automorphism(x, pow(self.ambient_sigma, power, self.conductor))

    def tau(self, x: CyclotomicElement, power: int = 1) -> CyclotomicElement:
        return self.sigma(x, self.U * power)

    def in_L(self, x: CyclotomicElement) -> bool:
        return all(apply_automorphism(x, e) == x for e in self.fixing_group)

    def in_F(self, x: CyclotomicElement) -> bool:
        return self.in_L(x) and self.tau(x) == x

    def in_K(self, x: CyclotomicElement) -> bool:
        return self.in_L(x) and self.sigma(x) == x

    def element(self, coords: Sequence[int]) -> CyclotomicElement:
        """Working-order element from its 2*degree integer coordinates."""
        if len(coords) != 2 * self.degree:
            raise TowerError(f"expected {2 * self.degree} coordinates, got {len(coords)}")
        num = np.asarray([int(c) for c in coords], dtype=object) @ self.basis_matrix
        return CyclotomicElement._raw(self.conductor, list(num), 1)

    def to_json(self) -> dict:
        return {
            "U": self.U,
            "nt": self.nt,
            "K_kind": self.K_kind,
            "h": self.h,
            "theta": self.theta.to_json(),
            "theta_exponents": list(self.theta_exponents),
            "sigma_exp": self.sigma_exp,
            "p": self.p.to_json(),
            "m": self.m,
            "degree": self.degree,
        }

    @classmethod
    def from_json(cls, obj: dict) -> TowerSpec:
        spec = cls(
            U=int(obj["U"]),
            nt=int(obj["nt"]),
            K_kind=obj["K_kind"],
            h=int(obj["h"]),
            theta=CyclotomicElement.from_json(obj["theta"]),
            sigma_exp=int(obj["sigma_exp"]),
            p=CyclotomicElement.from_json(obj["p"]),
            m=int(obj["m"]),
            theta_exponents=tuple(obj.get("theta_exponents", ())),
        )
        return _validated(spec)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TowerSpec):
            return NotImplemented
        return self.to_json() == other.to_json()

    def __hash__(self) -> int:
        return hash((self.U, self.nt, self.K_kind, self.h, self.theta, self.sigma_exp, self.p, self.m))


def _closure(elems: set[int], n: int) -> set[int]:
    out = set(elems)
    frontier = list(out)
    while frontier:
        a = frontier.pop()
        for b in list(out):
            c = (a * b) % n
            if c not in out:
                out.add(c)
                frontier.append(c)
    return out


@dataclass(frozen=True)
class IntegralElement:
    """Coordinates over the working-order basis {theta^j, beta*theta^j}."""

    coords: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    def bound(self) -> int:
        return max((abs(c) for c in self.coords), default=0)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def to_cyclotomic(self, spec: TowerSpec) -> CyclotomicElement:
        return spec.element(self.coords)


def _as_element(x, spec: TowerSpec) -> CyclotomicElement:
    if isinstance(x, IntegralElement):
        return x.to_cyclotomic(spec)
    if isinstance(x, CyclotomicElement):
        if x.conductor != spec.conductor:
            return lift_conductor(x, spec.conductor)
        return x
    return CyclotomicElement.from_rational(spec.conductor, x)


# polynomial helpers over Z/q -------------------------------------------------


def _pmod(a: list[int], q: int) -> list[int]:
    a = [c % q for c in a]
    while a and a[-1] == 0:
        a.pop()
    return a


def _pdivmod(a: list[int], b: list[int], q: int) -> tuple[list[int], list[int]]:
    a = _pmod(a, q)
    b = _pmod(b, q)
    inv = pow(b[-1], -1, q)
    quo = [0] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        c = (a[-1] * inv) % q
        quo[shift] = c
        for j, bj in enumerate(b):
            a[shift + j] = (a[shift + j] - c * bj) % q
        a = _pmod(a, q)
    return quo, a


def _pmulmod(a: list[int], b: list[int], f: list[int], q: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _pdivmod(out, f, q)[1]


def _ppowmod(base: list[int], e: int, f: list[int], q: int) -> list[int]:
    result = [1]
    base = _pdivmod(base, f, q)[1]
    while e:
        if e & 1:
            result = _pmulmod(result, base, f, q)
        base = _pmulmod(base, base, f, q)
        e >>= 1
    return result


def _pgcd(a: list[int], b: list[int], q: int) -> list[int]:
    a, b = _pmod(a, q), _pmod(b, q)
    while b:
        a, b = b, _pdivmod(a, b, q)[1]
    if a:
        inv = pow(a[-1], -1, q)
        a = [(c * inv) % q for c in a]
    return a


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _is_prime(n: int) -> bool:
    return n > 1 and all(n % d for d in range(2, isqrt(n) + 1))


def rabin_irreducible(f: Sequence[int], q: int) -> tuple[bool, list[str]]:
    """Rabin's test for irreducibility of a monic integer polynomial over F_q (q prime)."""
    f = _pmod(list(f), q)
    d = len(f) - 1
    log = [f"reduce mod {q}: {f}"]
    if d <= 1:
        log.append("degree <= 1: irreducible")
        return True, log
    x = [0, 1]
    for r in _prime_factors(d):
        xp = _ppowmod(x, q ** (d // r), f, q)
        g = _pgcd(f, _poly_sub_mod(xp, x, q), q)
        log.append(f"gcd(f, x^(q^{d // r}) - x) has degree {len(g) - 1}")
        if len(g) - 1 != 0:
            return False, log
    xq = _ppowmod(x, q**d, f, q)
    ok = _pmod(_poly_sub_mod(xq, x, q), q) == []
    log.append(f"x^(q^{d}) == x mod f: {ok}")
    return ok, log


def _poly_sub_mod(a: list[int], b: list[int], q: int) -> list[int]:
    m = max(len(a), len(b))
    a = list(a) + [0] * (m - len(a))
    b = list(b) + [0] * (m - len(b))
    return _pmod([x - y for x, y in zip(a, b)], q)


# tower operations -------------------------------------------------------------


def minimal_polynomial(spec: TowerSpec) -> tuple[int, ...]:
    """Minimal polynomial of theta over K (integer coefficients, low to high)."""
    n = spec.conductor
    poly = [CyclotomicElement.one(n)]
    for k in range(spec.degree):
        root = spec.sigma(spec.theta, k)
        new = [CyclotomicElement.zero(n)] * (len(poly) + 1)
        for i, c in enumerate(poly):
            new[i + 1] = new[i + 1] + c
            new[i] = new[i] - c * root
        poly = new
    out = []
    for c in poly:
        val = c.rational_value()
        if val.denominator != 1:
            raise TowerError("minimal polynomial of theta is not integral")
        out.append(int(val))
    return tuple(out)


def _residue_data(spec: TowerSpec) -> tuple[int, int, int]:
    """(q, char, ext) for the residue field O_K/(p); raises if p is not prime."""
    norm = (spec.p * spec.p.conjugate()).rational_value()
    if norm.denominator != 1 or not spec.p.is_integral() or not spec.in_K(spec.p):
        raise TowerError("p must be a nonzero element of O_K")
    norm = int(norm)
    if _is_prime(norm):
        return norm, norm, 1
    r = isqrt(norm)
    if r * r == norm and _is_prime(r):
        # p must be an associate of a rational prime r that is inert in K
        quotient = spec.p * CyclotomicElement.from_rational(spec.conductor, Fraction(1, r))
        is_unit = quotient.is_integral() and quotient * quotient.conjugate() == 1
        inert_in_k = r % 4 == 3 if spec.K_kind == "gaussian" else r % 3 == 2
        if is_unit and inert_in_k:
            return norm, r, 2
    raise TowerError(f"p with norm {norm} is not a prime element of O_K")


def verify_inert(spec: TowerSpec) -> InertCertificate:
    """Decide whether p stays prime in L/K by testing the minimal polynomial of theta.

    The polynomial has rational integer coefficients; it is irreducible over the
    residue field F_q (q = char^ext) iff it is irreducible over F_char and its
    degree is coprime to ext.
    """
    q, char, ext = _residue_data(spec)
    f = minimal_polynomial(spec)
    deg = len(f) - 1
    ok, log = rabin_irreducible(f, char)
    log = list(log)
    if ok and ext > 1:
        coprime = gcd(deg, ext) == 1
        log.append(f"residue field F_{q} = F_{char}^{ext}; gcd(deg={deg}, {ext}) == 1: {coprime}")
        ok = coprime
    return InertCertificate(ok, q, char, ext, deg, f, tuple(log))


def _validated(spec: TowerSpec, check_inert: bool = True) -> TowerSpec:
    if spec.U < 1 or spec.nt < 1:
        raise TowerError("U and nt must be positive")
    if spec.theta.conjugate() != spec.theta:
        raise TowerError("theta is not real")
    if spec.m <= Fraction(spec.U * (spec.nt - 1), 2):
        raise TowerError(f"m={spec.m} must exceed U(nt-1)/2 = {Fraction(spec.U * (spec.nt - 1), 2)}")
    d = spec.degree
    if spec.sigma(spec.beta, 1) != spec.beta:
        raise TowerError("sigma does not fix K")
    orbit = [spec.theta]
    e = spec.ambient_sigma
    cur = spec.theta
    for k in range(1, d + 1):
        cur = apply_automorphism(cur, e)
        orbit.append(cur)
    if orbit[d] != spec.theta or any(orbit[k] == spec.theta for k in range(1, d)):
        raise TowerError(f"sigma restricted to L does not have order {d}")
    if check_inert:
        cert = verify_inert(spec)
        if not cert.inert:
            raise TowerError(f"p is not inert in L/K: {cert.transcript[-1]}")
        object.__setattr__(spec, "certificate", cert)
    return spec


def _theta_from_exponents(h: int, exponents: Sequence[int], n: int) -> CyclotomicElement:
    if h == 1:
        return CyclotomicElement.one(n)
    z = CyclotomicElement.zero(n)
    step = n // h
    for k in exponents:
        z = z + CyclotomicElement.zeta(n, k * step)
    return z


def _unit_order(g: int, h: int) -> int:
    if h == 1:
        return 1
    k, x = 1, g % h
    while x != 1:
        x = (x * g) % h
        k += 1
    return k


def build_tower(
    U: int,
    nt: int,
    K_kind: str = "gaussian",
    table_row: TableRow | dict | None = None,
    *,
    p: tuple[int, int] | CyclotomicElement | None = None,
    sigma_exp: int | None = None,
    m: int | None = None,
    check_inert: bool = True,
) -> TowerSpec:
    """Instantiate and validate a tower of relative degree U*nt.

    ``table_row`` defaults to the catalog row of that degree; a dict with keys
    ``h``, ``exponents`` (and optionally ``p``) supplies a custom row.  When
    ``sigma_exp`` is omitted the smallest exponent of order U*nt on L is used.
    """
    d = U * nt
    if table_row is None:
        if d not in TABLE_ROWS:
            raise TowerError(f"no catalog row for degree {d}; supply table_row")
        table_row = TABLE_ROWS[d]
    if isinstance(table_row, dict):
        h = int(table_row["h"])
        exponents = tuple(int(e) for e in table_row["exponents"])
        row_p = table_row.get("p")
    else:
        h, exponents = table_row.h, table_row.exponents
        row_p = table_row.p_gaussian if K_kind == "gaussian" else table_row.p_eisenstein
    n = _ambient(K_kind, h)
    theta = _theta_from_exponents(h, exponents, n)
    if p is None:
        p = row_p
    if p is None:
        raise TowerError("no prime p supplied")
    if not isinstance(p, CyclotomicElement):
        p = k_element(K_kind, n, *p)
    elif p.conductor != n:
        p = lift_conductor(p, n)
    if m is None:
        m = default_m(U, nt)
    if sigma_exp is not None:
        candidates = [sigma_exp]
    else:
        units = [g for g in range(1, max(h, 2)) if gcd(g, h) == 1]
        # primitive roots mod h first, so sigma acts on zeta_h as a generator
        candidates = sorted(units, key=lambda g: (_unit_order(g, h) != len(units), g))
    last_err: Exception | None = None
    for g in candidates:
        spec = TowerSpec(U, nt, K_kind, h, theta, g, p, m, tuple(exponents))
        try:
            return _validated(spec, check_inert=check_inert)
        except TowerError as err:
            last_err = err
            if "order" not in str(err):
                raise
    raise TowerError(f"no sigma exponent of order {d} found: {last_err}")


def relative_norm(x, spec: TowerSpec, sub: str = "L/K") -> CyclotomicElement:
    """Product of Galois conjugates over K (``L/K``) or over F (``L/F``)."""
    x = _as_element(x, spec)
    if not spec.in_L(x):
        raise TowerError("element is not in L")
    if sub == "L/K":
        count, step = spec.degree, 1
    elif sub == "L/F":
        count, step = spec.nt, spec.U
    else:
        raise ValueError(f"unknown extension {sub!r}")
    out = x
    for k in range(1, count):
        out = out * spec.sigma(x, k * step)
    return out


def _count_p(a: CyclotomicElement, spec: TowerSpec) -> int:
    # a is a nonzero algebraic integer of K
    k = 0
    pinv = spec.p_inverse
    while True:
        b = a * pinv
        if not b.is_integral():
            return k
        a = b
        k += 1


def valuation_in_K(a: CyclotomicElement, spec: TowerSpec) -> int:
    """p-adic valuation of a nonzero element of K."""
    if a.is_zero():
        raise TowerError("valuation of zero")
    numer = a * a.den
    den = CyclotomicElement.from_rational(spec.conductor, a.den)
    return _count_p(numer, spec) - _count_p(den, spec)


def valuation(x, spec: TowerSpec) -> float | int:
    """Valuation at the unique prime of L above p; +inf for zero."""
    x = _as_element(x, spec)
    if x.is_zero():
        return INF
    v = valuation_in_K(relative_norm(x, spec, "L/K"), spec)
    if v % spec.degree:
        raise TowerError(f"norm valuation {v} not divisible by [L:K]={spec.degree}; p not inert?")
    return v // spec.degree


def sigma_apply(x, spec: TowerSpec, power: int = 1) -> CyclotomicElement:
    x = _as_element(x, spec)
    if not spec.in_L(x):
        raise TowerError("element is not in L")
    return spec.sigma(x, power)

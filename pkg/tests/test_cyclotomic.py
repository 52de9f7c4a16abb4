import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from macdecay.cyclotomic import (
    CyclotomicElement as CE,
    CyclotomicError,
    apply_automorphism,
    cyc_arith,
    cyclotomic_polynomial,
    embed_numeric,
    euler_phi,
    lift_conductor,
)

CONDUCTORS = [4, 12, 28, 20, 51]


def test_i_squared():
    i = CE.zeta(4)
    assert i * i == CE.from_rational(4, -1)


def test_division_gives_i():
    i = CE.zeta(4)
    one = CE.one(4)
    q = cyc_arith(one + i, one - i, "div")
    assert q == i
    assert abs(embed_numeric(q) - 1j) < 1e-12


def test_division_by_zero():
    with pytest.raises(CyclotomicError):
        cyc_arith(CE.one(4), CE.zero(4), "div")


def test_automorphism_examples():
    assert apply_automorphism(CE.zeta(4), 3) == -CE.zeta(4)
    a = CE.from_exponents(7, {1: 2, 3: -1})
    assert apply_automorphism(a, 1) == a
    z = CE.zeta(7)
    w = z
    for _ in range(6):
        w = apply_automorphism(w, 3)
    assert w == z
    with pytest.raises(CyclotomicError):
        apply_automorphism(z, 7)


def test_embedding_examples():
    assert embed_numeric(CE.one(4)) == 1
    assert abs(embed_numeric(CE.zeta(4)) - 1j) < 1e-15
    theta = CE.zeta(7) + CE.zeta(7, -1)
    assert abs(embed_numeric(theta) - 2 * np.cos(2 * np.pi / 7)) < 1e-14
    assert abs(embed_numeric(theta) - 1.2469796037174670) < 1e-14


def test_lift():
    assert lift_conductor(CE.one(4), 28) == CE.one(28)
    assert lift_conductor(CE.zeta(4), 28) == CE.zeta(28, 7)
    with pytest.raises(CyclotomicError):
        lift_conductor(CE.zeta(4), 30)


def test_cyclotomic_polynomial_against_sympy():
    sympy = pytest.importorskip("sympy")
    x = sympy.symbols("x")
    for n in [1, 2, 3, 4, 7, 12, 17, 28, 51, 116]:
        ref = sympy.Poly(sympy.cyclotomic_poly(n, x), x).all_coeffs()[::-1]
        assert list(cyclotomic_polynomial(n)) == [int(c) for c in ref]
        assert euler_phi(n) == len(ref) - 1


def test_json_roundtrip():
    a = CE.from_exponents(28, {0: Fraction(1, 3), 5: -2, 11: 7})
    assert CE.from_json(a.to_json()) == a


@st.composite
def elements(draw, n=None, nonzero=False):
    n = n if n is not None else draw(st.sampled_from(CONDUCTORS))
    terms = draw(st.dictionaries(st.integers(0, n - 1), st.integers(-5, 5), max_size=5))
    den = draw(st.integers(1, 4))
    a = CE.from_exponents(n, {k: Fraction(v, den) for k, v in terms.items()})
    if nonzero and a.is_zero():
        a = CE.one(n)
    return a


@st.composite
def pairs(draw, count=2):
    n = draw(st.sampled_from(CONDUCTORS))
    return [draw(elements(n)) for _ in range(count)]


@given(pairs(3))
def test_field_axioms(t):
    a, b, c = t
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == CE.zero(a.conductor)
    if not a.is_zero():
        assert a * a.inverse() == CE.one(a.conductor)


@given(pairs(2))
def test_embedding_is_ring_homomorphism(t):
    a, b = t
    tol = 1e-9 * (1 + abs(embed_numeric(a)) * abs(embed_numeric(b)))
    assert abs(embed_numeric(a * b) - embed_numeric(a) * embed_numeric(b)) < tol
    assert abs(embed_numeric(a + b) - embed_numeric(a) - embed_numeric(b)) < tol


@given(pairs(2), st.data())
def test_automorphism_is_homomorphism(t, data):
    a, b = t
    n = a.conductor
    e = data.draw(st.sampled_from([k for k in range(1, n) if np.gcd(k, n) == 1]))
    assert apply_automorphism(a * b, e) == apply_automorphism(a, e) * apply_automorphism(b, e)
    assert apply_automorphism(a + b, e) == apply_automorphism(a, e) + apply_automorphism(b, e)


@given(elements())
def test_conjugation(a):
    assert abs(embed_numeric(a.conjugate()) - embed_numeric(a).conjugate()) < 1e-9 * (1 + abs(embed_numeric(a)))
    assert a.conjugate().conjugate() == a


@given(elements(), st.sampled_from([2, 3, 5]))
def test_lift_preserves_value(a, f):
    b = lift_conductor(a, a.conductor * f)
    assert abs(embed_numeric(b) - embed_numeric(a)) < 1e-9 * (1 + abs(embed_numeric(a)))
    assert b.conductor == a.conductor * f

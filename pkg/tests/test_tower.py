import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from macdecay.cyclotomic import CyclotomicElement as CE, embed_numeric
from macdecay.tower import (
    IntegralElement,
    TowerError,
    TowerSpec,
    build_tower,
    catalog_rows,
    k_element,
    minimal_polynomial,
    relative_norm,
    sigma_apply,
    valuation,
    verify_inert,
)

sympy = pytest.importorskip("sympy")
X = sympy.symbols("x")

SHAPES = [(3, 1, "gaussian"), (2, 2, "eisenstein"), (2, 1, "gaussian"), (2, 1, "eisenstein"), (5, 1, "gaussian")]
TOWERS = {s: build_tower(*s) for s in SHAPES}


def _numeric_minpoly(h, exponents):
    # conjugates of the Gaussian period under all of (Z/h)^*, rounded to integers
    vals = {round(sum(cmath.exp(2j * math.pi * g * k / h) for k in exponents).real, 9) for g in range(1, h) if math.gcd(g, h) == 1}
    coeffs = np.poly(sorted(vals))
    return [int(round(c)) for c in coeffs[::-1]]


@pytest.mark.parametrize("degree", [3, 4, 5, 6, 7])
@pytest.mark.parametrize("kind", ["gaussian", "eisenstein"])
def test_catalog_towers_build_and_are_inert(degree, kind):
    spec = build_tower(degree, 1, kind)
    cert = verify_inert(spec)
    assert cert.inert
    f = list(minimal_polynomial(spec))
    assert f == _numeric_minpoly(spec.h, spec.theta_exponents)
    # independent irreducibility oracle over the residue field
    poly = sympy.Poly(f[::-1], X, modulus=cert.char)
    assert poly.is_irreducible and math.gcd(len(f) - 1, cert.residue_ext) == 1


def test_catalog_rows():
    rows = [r for r in catalog_rows() if r["standard"]]
    assert [r["degree"] for r in rows] == [3, 4, 5, 6, 7]
    assert [r["h"] for r in rows] == [7, 17, 11, 13, 29]
    assert [r["p_gaussian"] for r in rows] == ["2+i", "2+i", "1+i", "1+i", "1+i"]
    assert [r["p_eisenstein"] for r in rows] == ["sqrt(-3)", "sqrt(-3)", "2+sqrt(-3)", "2+sqrt(-3)", "sqrt(-3)"]


def test_minpoly_theta7_against_sympy():
    spec = TOWERS[(3, 1, "gaussian")]
    ref = sympy.Poly(sympy.minimal_polynomial(2 * sympy.cos(2 * sympy.pi / 7), X), X).all_coeffs()[::-1]
    assert list(minimal_polynomial(spec)) == [int(c) for c in ref] == [-1, -2, 1, 1]


def test_three_user_tower():
    spec = TOWERS[(3, 1, "gaussian")]
    assert spec.h == 7 and spec.degree == 3 and spec.conductor == 28
    assert spec.p == k_element("gaussian", 28, 2, 1)
    assert abs(embed_numeric(spec.theta) - 2 * math.cos(2 * math.pi / 7)) < 1e-14
    assert spec.m == 1


def test_two_by_two_eisenstein_tower():
    spec = TOWERS[(2, 2, "eisenstein")]
    assert spec.h == 17 and spec.degree == 4 and spec.m == 2
    assert abs(embed_numeric(spec.p) - 1j * math.sqrt(3)) < 1e-14
    expected = sum(2 * math.cos(2 * math.pi * k / 17) for k in (1, 4))
    assert abs(embed_numeric(spec.theta) - expected) < 1e-13


def test_degenerate_tower():
    spec = build_tower(1, 1, "gaussian")
    x = spec.element([3, -2])
    assert spec.sigma(x) == x
    assert verify_inert(spec).inert


def test_one_plus_i_is_inert_over_theta7():
    # x^3 + x^2 - 2x - 1 = x^3 + x^2 + 1 over F_2, which has no root, so 1+i stays prime
    spec = build_tower(3, 1, "gaussian", p=(1, 1))
    assert verify_inert(spec).inert
    assert sympy.Poly([1, 1, 0, 1], X, modulus=2).is_irreducible


def test_split_prime_rejected():
    # 13 = (3+2i)(3-2i) and 13 = -1 mod 7, so the cubic factors completely mod 13
    with pytest.raises(TowerError):
        build_tower(3, 1, "gaussian", p=(3, 2))
    spec = build_tower(3, 1, "gaussian", p=(3, 2), check_inert=False)
    assert not verify_inert(spec).inert
    roots = [r for r in range(13) if (r**3 + r**2 - 2 * r - 1) % 13 == 0]
    assert len(roots) == 3


def test_bad_parameters():
    with pytest.raises(TowerError):
        build_tower(2, 2, "gaussian", m=1)
    with pytest.raises(TowerError):
        build_tower(3, 1, "gaussian", sigma_exp=1)
    with pytest.raises(TowerError):
        build_tower(8, 1, "gaussian")


def test_norm_examples():
    spec = TOWERS[(3, 1, "gaussian")]
    n = spec.conductor
    assert relative_norm(CE.one(n), spec) == 1
    assert relative_norm(spec.p, spec) == spec.p**3
    assert relative_norm(spec.theta, spec) == 1
    emb = [embed_numeric(spec.sigma(spec.theta, k)) for k in range(3)]
    assert abs(np.prod(emb) - 1) < 1e-12
    with pytest.raises(TowerError):
        relative_norm(CE.zeta(n), spec)


def test_valuation_examples():
    spec = TOWERS[(3, 1, "gaussian")]
    n = spec.conductor
    assert valuation(spec.p, spec) == 1
    assert valuation(CE.one(n), spec) == 0
    assert valuation(CE.from_rational(n, 5), spec) == 1
    assert valuation(CE.from_rational(n, 25) * spec.theta, spec) == 2
    assert valuation(CE.zero(n), spec) == math.inf


def test_sigma_examples():
    spec = build_tower(3, 1, "gaussian", sigma_exp=3)
    z = CE.zeta(28, 4)  # zeta_7
    assert sigma_apply(spec.theta, spec) == z**3 + z**-3
    assert abs(embed_numeric(sigma_apply(spec.theta, spec)) - 2 * math.cos(6 * math.pi / 7)) < 1e-14
    assert sigma_apply(spec.p, spec) == spec.p
    assert sigma_apply(spec.theta, spec, 3) == spec.theta
    with pytest.raises(TowerError):
        sigma_apply(CE.zeta(28), spec)


@pytest.mark.parametrize("shape", SHAPES)
def test_tau_fixes_center_and_json(shape):
    spec = TOWERS[shape]
    assert TowerSpec.from_json(spec.to_json()) == spec
    x = spec.element(list(range(1, 2 * spec.degree + 1)))
    f = relative_norm(x, spec, "L/F")
    assert spec.in_F(f) and spec.tau(f) == f
    assert spec.in_K(relative_norm(x, spec, "L/K"))


@st.composite
def tower_elements(draw, count=2):
    shape = draw(st.sampled_from(SHAPES[:4]))
    spec = TOWERS[shape]
    out = []
    for _ in range(count):
        coords = draw(st.lists(st.integers(-4, 4), min_size=2 * spec.degree, max_size=2 * spec.degree))
        out.append(IntegralElement(coords).to_cyclotomic(spec))
    return spec, out


@given(tower_elements())
def test_norm_multiplicative(t):
    spec, (x, y) = t
    for sub in ("L/K", "L/F"):
        assert relative_norm(x * y, spec, sub) == relative_norm(x, spec, sub) * relative_norm(y, spec, sub)


@given(tower_elements())
def test_valuation_properties(t):
    spec, (x, y) = t
    if x.is_zero():
        return
    assert valuation(spec.p * x, spec) == valuation(x, spec) + 1
    assert valuation(x * y, spec) == valuation(x, spec) + valuation(y, spec)
    if not (x + y).is_zero():
        assert valuation(x + y, spec) >= min(valuation(x, spec), valuation(y, spec))


@given(tower_elements(1), st.integers(0, 10))
def test_sigma_group_order(t, k):
    spec, (x,) = t
    d = spec.degree
    assert spec.sigma(x, d) == x
    assert spec.sigma(spec.sigma(x, k), d - k % d) == x

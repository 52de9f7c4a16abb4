import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macdecay.codes import MacCode
from macdecay.decay import DecayError, DecayQuery, decay_exhaustive
from macdecay.pigeonhole import (
    corollary_bound,
    orthogonal_complement,
    orthonormal_basis,
    pigeonhole_witness,
    project,
    small_det_witness_pipeline,
)
from macdecay.tower import build_tower


def _cmat(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _brute_min(gens, A, M):
    # smallest projection norm over all nonzero points of L(M)
    g = gens.reshape(len(gens), -1)
    R = np.concatenate([g.real, g.imag], axis=1)
    span = [a.ravel() for a in A] + [1j * a.ravel() for a in A]
    if span:
        S = np.array([np.concatenate([v.real, v.imag]) for v in span])
        Q, _ = np.linalg.qr(S.T)
        R = R - (R @ Q) @ Q.T
    pts = np.array(list(itertools.product(range(-M, M + 1), repeat=len(gens))))
    pts = pts[np.any(pts != 0, axis=1)]
    return np.linalg.norm(pts @ R, axis=1).min()


def test_complement_is_orthonormal():
    rng = np.random.default_rng(0)
    A = np.concatenate([rng.standard_normal((2, 6)), np.zeros((1, 6))])
    B = orthonormal_basis(A, strict=False)
    C = orthogonal_complement(B, 6)
    full = np.concatenate([B, C])
    assert full.shape == (6, 6)
    assert np.allclose(full @ full.T, np.eye(6), atol=1e-12)
    with pytest.raises(DecayError):
        orthonormal_basis(A, strict=True)


def test_full_space_case():
    rng = np.random.default_rng(1)
    gens = _cmat(rng, 3, 1, 2)
    res = pigeonhole_witness(gens, (), M=4)
    assert res.h == 4 and res.l == 3
    assert np.linalg.norm(res.z) == pytest.approx(res.projection_norm)
    assert res.within_bound and any(res.coords)
    assert max(abs(c) for c in res.coords) <= 4


def test_full_dimensional_lattice_has_constant_bound():
    rng = np.random.default_rng(2)
    gens = _cmat(rng, 4, 1, 2)
    res = [pigeonhole_witness(gens, (), M=M) for M in (4, 8, 16)]
    assert res[0].bound == res[1].bound == res[2].bound
    assert res[0].bound == corollary_bound(4, 4, res[0].K, 4)


def test_errors():
    rng = np.random.default_rng(3)
    gens = _cmat(rng, 2, 1, 1)
    with pytest.raises(DecayError):
        pigeonhole_witness(gens, [np.ones((1, 1))], M=4)  # complement is zero dimensional
    with pytest.raises(DecayError):
        pigeonhole_witness(gens, (), M=2)
    assert pigeonhole_witness(gens, (), M=2, strict=False).projection_norm > 0
    with pytest.raises(DecayError):
        pigeonhole_witness(gens, (), M=1, strict=False)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.sampled_from([4, 5, 6]))
def test_random_subspace_instances(seed, M):
    rng = np.random.default_rng(seed)
    gens = _cmat(rng, 4, 1, 3)
    A = [_cmat(rng, 1, 3)]
    res = pigeonhole_witness(gens, A, M=M)
    assert res.h == 4
    assert any(res.coords) and max(abs(c) for c in res.coords) <= M
    assert np.allclose(res.z, np.tensordot(np.array(res.coords, float), gens, axes=(0, 0)))
    assert res.projection_norm <= res.guarantee * (1 + 1e-9)
    assert res.within_bound
    assert _brute_min(gens, A, M) <= res.projection_norm + 1e-9
    # the projection really is orthogonal to A
    comp = orthogonal_complement(orthonormal_basis(np.array([np.concatenate([v.real, v.imag]) for v in (A[0].ravel(), 1j * A[0].ravel())])), 6)
    assert abs(np.linalg.norm(project(res.z, comp)) - res.projection_norm) < 1e-9


def test_pipeline_single_user():
    code = MacCode(build_tower(3, 1, "gaussian"))
    r = small_det_witness_pipeline(code, (2,), (4,))
    assert r.exponents == (0.0,) and r.sqrt_det <= r.constant + 1e-12


def test_pipeline_three_users():
    code = MacCode(build_tower(3, 1, "gaussian"))
    runs = [small_det_witness_pipeline(code, (1, 2, 3), (n, n, n)) for n in (2, 4)]
    assert runs[0].constant == pytest.approx(runs[1].constant)
    assert np.allclose(runs[0].exponents, (2.0, 0.5, 0.0))
    for r in runs:
        assert r.sqrt_det <= r.bound * (1 + 1e-9)
        assert all(len(w) == code.lattice_dim for w in r.witness)


def test_pipeline_above_exhaustive_minimum():
    code = MacCode(build_tower(2, 1, "gaussian"))
    for n in (2, 3):
        pipe = small_det_witness_pipeline(code, (1, 2), (n, n))
        ex = decay_exhaustive(DecayQuery(code, (1, 2), (n, n)))
        assert pipe.sqrt_det >= ex.value * (1 - 1e-9)

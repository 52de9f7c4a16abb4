import itertools
from fractions import Fraction

import numpy as np
import pytest

from macdecay.codes import MacCode, exact_gram_determinant, joint_matrix
from macdecay.cyclotomic import embed_numeric
from macdecay.decay import (
    DecayBudgetError,
    DecayError,
    DecayQuery,
    decay_exhaustive,
    enumerate_words,
    fit_decay_slope,
    lower_bound_exponents,
    upper_bound_exponents,
    word_count,
)
from macdecay.tower import build_tower

C21 = MacCode(build_tower(2, 1, "gaussian"))
C31 = MacCode(build_tower(3, 1, "gaussian"))

D11 = 0.22451398828978983  # frozen from the brute-force oracle below


def _nonzero_words(D, N):
    grid = np.array(list(itertools.product(range(-N, N + 1), repeat=D)))
    return grid[np.any(grid != 0, axis=1)]


def _brute_force(code, subset, N):
    # direct enumeration of every signed tuple, Gram determinants in batches
    words = _nonzero_words(code.lattice_dim, N)
    mats = [code.word_numeric(j, words) for j in subset]
    best = np.inf
    for combo in itertools.product(range(len(words)), repeat=len(subset) - 1):
        M = mats[0]
        if combo:
            rest = np.concatenate([mats[i + 1][c] for i, c in enumerate(combo)], axis=0)
            M = np.concatenate([M, np.broadcast_to(rest, (len(words),) + rest.shape)], axis=1)
        g = np.linalg.det(M @ np.conj(np.swapaxes(M, 1, 2))).real
        best = min(best, g.min())
    return float(np.sqrt(max(best, 0.0)))


def test_word_enumeration():
    assert word_count(4, 1) == 40
    rows = np.concatenate(list(enumerate_words(4, 1, max_rows=7)))
    assert len(rows) == 40
    lead = [r[np.nonzero(r)[0][0]] for r in rows]
    assert all(v > 0 for v in lead)
    assert [tuple(r) for r in rows] == sorted(tuple(r) for r in rows)
    full = {tuple(r) for r in rows} | {tuple(-r) for r in rows}
    assert len(full) == 80


def test_d11_against_brute_force():
    rec = decay_exhaustive(DecayQuery(C21, (1, 2), (1, 1)))
    assert abs(_brute_force(C21, (1, 2), 1) - D11) < 1e-12
    assert abs(rec.value - D11) < 1e-12
    words = rec.witness_words()
    assert not exact_gram_determinant(joint_matrix(words, C21)).is_zero()
    assert abs(abs(embed_numeric(exact_gram_determinant(joint_matrix(words, C21)))) - D11) < 1e-12


def test_non_square_subset_against_brute_force():
    rec = decay_exhaustive(DecayQuery(C31, (1, 2), (1, 1)))
    assert abs(rec.value - _brute_force(C31, (1, 2), 1)) < 1e-10


def test_single_user():
    rec = decay_exhaustive(DecayQuery(C21, (2,), (1,)))
    assert abs(rec.value - _brute_force(C21, (2,), 1)) < 1e-12


def test_monotone_and_frozen_values():
    vals = [decay_exhaustive(DecayQuery(C21, (1, 2), (n, 1))).value for n in (1, 2, 4)]
    assert vals[0] >= vals[1] >= vals[2]
    assert np.allclose(vals, [D11, D11, 0.10081306187583665], rtol=1e-9)


def test_worker_count_invariance():
    q = DecayQuery(C21, (1, 2), (2, 1))
    a = decay_exhaustive(q, jobs=1, inner_rows=97)
    b = decay_exhaustive(q, jobs=2, inner_rows=211)
    assert a.witness == b.witness and a.value == b.value


def test_budget(monkeypatch):
    q = DecayQuery(C21, (1, 2), (3, 3))
    with pytest.raises(DecayBudgetError) as err:
        decay_exhaustive(q, budget=1000)
    assert err.value.needed == word_count(4, 3) ** 2
    monkeypatch.setenv("MACDECAY_BUDGET", "10")
    with pytest.raises(DecayBudgetError):
        decay_exhaustive(q)


def test_query_validation():
    for subset, bounds in [((), ()), ((1, 1), (1, 1)), ((3,), (1,)), ((1,), (1, 2)), ((1,), (0,))]:
        with pytest.raises(DecayError):
            DecayQuery(C21, subset, bounds)


def test_upper_bound_exponents():
    p = upper_bound_exponents(3, 1, 3, 3)
    assert p.alpha == Fraction(5, 2) and p.exponents == (2, Fraction(1, 2), 0)
    assert upper_bound_exponents(3, 1, 3, 1).alpha == 0
    assert upper_bound_exponents(2, 2, 4, 2).alpha == 2
    with pytest.raises(DecayError):
        upper_bound_exponents(3, 1, 2, 3)


def test_lower_bound_exponents():
    assert lower_bound_exponents(3, 1, 3).equal_n == 6
    assert lower_bound_exponents(3, 1, 1).equal_n == 0
    assert lower_bound_exponents(2, 1, 2).single_varying == 1


def test_slope_fit():
    assert abs(fit_decay_slope([(n, 3.0) for n in (1, 2, 4)]).slope) < 1e-12
    fit = fit_decay_slope([(n, n**-2.0) for n in (1, 2, 3, 5, 8)])
    assert abs(fit.slope + 2) < 1e-9 and fit.residual < 1e-9

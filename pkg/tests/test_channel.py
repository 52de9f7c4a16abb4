import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macdecay.channel import SimConfig, SimError, codebook, empirical_dmin, simulate, trial_rng
from macdecay.codes import MacCode
from macdecay.tower import build_tower

C21 = MacCode(build_tower(2, 1, "gaussian"))
C11 = MacCode(build_tower(1, 1, "gaussian"))


def test_codebook_order():
    coords, words = codebook(C21, 1, 1)
    assert coords.shape == (81, 4) and words.shape == (81, 1, 2)
    assert [tuple(c) for c in coords] == sorted(tuple(c) for c in coords)
    assert not coords[40].any()


def test_config_validation():
    with pytest.raises(SimError):
        SimConfig(C21, (1, 1), 2, (10,), 0)
    with pytest.raises(SimError):
        SimConfig(C21, (1, 1, 1), 2, (10,), 10)
    with pytest.raises(SimError):
        SimConfig(C21, (2, 2), 2, (10,), 10)  # difference books exceed the cap
    SimConfig(C21, (2, 2), 2, (10,), 10, bounded_distance=False)
    with pytest.raises(SimError):
        SimConfig(C21, (3, 3), 2, (10,), 10, bounded_distance=False)


def test_noiseless_limit():
    res = simulate(SimConfig(C21, 1, 2, (60.0,), 300, seed=4))
    assert res.ml_errors[0] <= 1


def test_rates_and_json():
    res = simulate(SimConfig(C21, 1, 2, (5.0, 15.0), 150, seed=1))
    for p in res.ml_cer + res.bd_fail:
        assert 0 <= p <= 1
    for ml, bd in zip(res.ml_errors, res.bd_failures):
        assert bd >= ml
    obj = json.loads(res.to_json())
    assert obj["config"]["seed"] == 1 and list(obj) == sorted(obj)
    assert [r["snr_db"] for r in res.rows()] == [5.0, 15.0]


def test_job_count_invariance():
    cfg = SimConfig(C21, 1, 2, (10.0,), 120, seed=9)
    a, b = simulate(cfg, jobs=1), simulate(cfg, jobs=2)
    assert a.ml_errors == b.ml_errors and a.bd_failures == b.bd_failures
    assert a.dmin_median == b.dmin_median


@settings(max_examples=5)
@given(st.integers(0, 2**31 - 1))
def test_seed_determinism(seed):
    cfg = SimConfig(C21, 1, 1, (8.0,), 40, seed=seed)
    assert simulate(cfg).to_json() == simulate(cfg).to_json()
    a = trial_rng(seed, 0, 3).standard_normal(4)
    assert np.array_equal(a, trial_rng(seed, 0, 3).standard_normal(4))
    assert not np.array_equal(a, trial_rng(seed, 0, 4).standard_normal(4))


def test_dmin_zero_channel():
    cfg = SimConfig(C21, 1, 2, (10.0,), 1)
    s = empirical_dmin(cfg, draws=[[np.zeros((2, 1)), np.zeros((2, 1))]])
    assert s.values.tolist() == [0.0]


def test_dmin_identity_channel():
    cfg = SimConfig(C11, 1, 1, (10.0,), 1)
    s = empirical_dmin(cfg, draws=[[np.eye(1)]])
    # direct enumeration over every nonzero difference in L(2)
    D = C11.lattice_dim
    diffs = np.array([c for c in itertools.product(range(-2, 3), repeat=D) if any(c)])
    norms = np.linalg.norm(C11.word_numeric(1, diffs).reshape(len(diffs), -1), axis=1)
    assert s.values[0] == pytest.approx(s.kappas[0] * norms.min(), rel=1e-12)


def test_dmin_random_quantiles():
    cfg = SimConfig(C21, 1, 2, (10.0,), 1, seed=2)
    s = empirical_dmin(cfg, draws=30, quantiles=(0.1, 0.5))
    assert len(s.values) == 30 and s.quantiles[0.1] <= s.quantiles[0.5]
    assert (s.values > 0).all()

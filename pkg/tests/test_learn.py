import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import hqmm.learn as learn
from hqmm.data import SequenceDataset
from hqmm.givens import HRotation
from hqmm.learn import (
    InnerConfig,
    Phase,
    TrainConfig,
    apply_rotation,
    inner_optimize,
    load_checkpoint,
    stack,
    train,
    unstack,
)
from hqmm.model import KrausSet, hqmm_loglik, hqmm_sample, random_kraus
from hqmm.models import prob_clock

SMALL = TrainConfig(schedule=[Phase(2, 3, 4), Phase(4, 2, 2)], rng_seed=11)


def clock_data(m=6, length=120, seed=0):
    rng = np.random.default_rng(seed)
    return SequenceDataset([hqmm_sample(prob_clock(), length, 50, rng) for _ in range(m)], 2)


def test_stack_round_trip_is_bitwise():
    model = random_kraus(3, 2, 2, np.random.default_rng(0))
    sk = stack(model)
    assert sk.kappa.shape == (12, 3)
    np.testing.assert_array_equal(unstack(sk).ops, model.ops)
    clock = stack(prob_clock())
    assert clock.kappa.shape == (4, 2)
    assert clock.orthonormality_error() < 1e-12


def test_stack_block_order():
    model = random_kraus(2, 3, 2, np.random.default_rng(1))
    kappa = stack(model).kappa
    np.testing.assert_array_equal(kappa[2 * (1 * 2 + 1):2 * (1 * 2 + 2)], model.ops[1, 1])


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(1, 2), st.integers(0, 2**32 - 1))
def test_orthonormal_kappa_unstacks_to_complete_set(n, s, w, seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n * s * w, n)) + 1j * rng.standard_normal((n * s * w, n))
    q, _ = np.linalg.qr(g)
    assert unstack(learn.StackedKraus(q, n, s, w)).completeness_error() < 1e-12


def test_rotation_examples():
    sk = stack(random_kraus(2, 2, 1, np.random.default_rng(2)))
    np.testing.assert_array_equal(apply_rotation(sk, HRotation(0, 1)).kappa, sk.kappa)
    out = apply_rotation(sk, HRotation(0, 1, np.pi / 2)).kappa
    np.testing.assert_allclose(out[0], sk.kappa[1], atol=1e-15)
    np.testing.assert_allclose(out[1], -sk.kappa[0], atol=1e-15)
    np.testing.assert_array_equal(out[2:], sk.kappa[2:])


def test_many_rotations_keep_orthonormality():
    rng = np.random.default_rng(3)
    sk = stack(random_kraus(3, 2, 2, rng))
    for _ in range(100):
        i, j = sorted(rng.choice(12, 2, replace=False))
        sk = apply_rotation(sk, HRotation(int(i), int(j), *rng.uniform(-np.pi, np.pi, 4)))
    assert sk.orthonormality_error() < 1e-8
    assert unstack(sk).completeness_error() < 1e-8


def test_inner_optimize_degenerate_model():
    sk = stack(KrausSet(np.ones((1, 2, 1, 1)) / np.sqrt(2)))
    angles, ll = inner_optimize(sk, 0, 1, np.zeros((2, 10), dtype=int), rng=np.random.default_rng(0))
    assert angles == (0.0, 0.0, 0.0, 0.0)
    assert ll == pytest.approx(0.0, abs=1e-12)


def test_inner_optimize_recovers_planted_rotation():
    truth = stack(prob_clock())
    data = clock_data(m=20, length=200, seed=4).sequences
    target = learn.batch_loglik(truth.ops, data, np.eye(2) / 2)
    planted = apply_rotation(truth, HRotation(1, 2, 0.7, 0.4, -0.5, 1.2))
    start = learn.batch_loglik(planted.ops, data, np.eye(2) / 2)
    angles, ll = inner_optimize(planted, 1, 2, data, rng=np.random.default_rng(5))
    assert start < target - 1.0
    assert ll >= target - 1e-3


def test_inner_optimize_reports_exact_likelihood():
    rng = np.random.default_rng(6)
    sk = stack(random_kraus(2, 2, 2, rng))
    data = clock_data(m=3, length=60, seed=6).sequences
    base = learn.batch_loglik(sk.ops, data, np.eye(2) / 2)
    angles, ll = inner_optimize(sk, 0, 5, data, rng=rng)
    assert ll >= base
    rotated = unstack(apply_rotation(sk, HRotation(0, 5, *angles)))
    assert ll == pytest.approx(sum(hqmm_loglik(rotated, seq) for seq in data), abs=1e-9)


def test_train_is_monotone_and_complete():
    model, report = train(clock_data(), (2, 2, 1), SMALL)
    assert model.completeness_error() < 1e-8
    assert report.accepted + report.rejected == 4 * 3 + 2 * 2
    for record in report.batches:
        assert all(b >= a - 1e-9 for a, b in zip(record.logliks, record.logliks[1:]))
    assert -1 < report.train_da <= 1


def test_train_single_state_matches_frequency():
    rng = np.random.default_rng(7)
    seqs = (rng.random((5, 400)) < 0.3).astype(int)
    cfg = TrainConfig(schedule=[Phase(5, 1, 3)], rng_seed=0)
    model, _ = train(SequenceDataset(seqs, 2), (1, 2, 1), cfg)
    p1 = float(np.abs(model.ops[1, 0, 0, 0]) ** 2)
    assert p1 == pytest.approx(seqs.mean(), abs=0.01)


def test_train_trivial_alphabet():
    model, report = train(SequenceDataset(np.zeros((2, 5), dtype=int), 1), (1, 1, 1), SMALL)
    assert report.accepted == report.rejected == 0
    assert report.train_da == 1.0
    assert model.completeness_error() < 1e-12


def test_train_is_deterministic():
    data = clock_data()
    m1, r1 = train(data, (2, 2, 1), SMALL)
    m2, r2 = train(data, (2, 2, 1), SMALL)
    np.testing.assert_array_equal(m1.ops, m2.ops)
    assert r1 == r2


def test_resume_matches_uninterrupted_run(tmp_path, monkeypatch):
    data = clock_data()
    val = clock_data(m=2, seed=9)
    full_model, full_report = train(data, (2, 2, 1), SMALL, validation=val)

    original = learn.save_checkpoint

    def interrupt(path, sk, cfg, rng, position, report):
        original(path, sk, cfg, rng, position, report)
        if tuple(position) == (0, 2):
            raise KeyboardInterrupt

    ckpt = tmp_path / "ckpt.json"
    monkeypatch.setattr(learn, "save_checkpoint", interrupt)
    with pytest.raises(KeyboardInterrupt):
        train(data, (2, 2, 1), SMALL, checkpoint=ckpt)
    monkeypatch.setattr(learn, "save_checkpoint", original)
    assert load_checkpoint(ckpt)["position"] == [0, 2]
    model, report = train(data, (2, 2, 1), validation=val, checkpoint=ckpt, resume=ckpt)
    np.testing.assert_array_equal(model.ops, full_model.ops)
    assert report == full_report


def test_config_round_trip():
    cfg = TrainConfig(schedule=[Phase(1, 2, 3)], inner=InnerConfig(restarts=1), rng_seed=4)
    assert TrainConfig.from_dict(cfg.to_dict()) == cfg
    flat = TrainConfig(batch_size=3, num_iterations=2, num_batches=5, schedule=None)
    assert flat.phases() == [Phase(3, 2, 5)]
    with pytest.raises(ValueError):
        TrainConfig(schedule=[Phase(0, 1, 1)])


def test_train_errors():
    with pytest.raises(ValueError):
        train(np.zeros((0, 0), dtype=int), (2, 2, 1))
    with pytest.raises(ValueError):
        train(SequenceDataset([[0, 1, 2]], 3), (2, 2, 1))
    with pytest.raises(ValueError):
        train(clock_data(), (2, 2, 1), init=random_kraus(3, 2, 1, np.random.default_rng(0)))

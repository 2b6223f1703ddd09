import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hqmm.data import SequenceDataset
from hqmm.hmm import HmmParams
from hqmm.metrics import DA_FLOOR, da, description_accuracy, squash
from hqmm.models import prob_clock


def logistic_form(x):
    return (1 - np.exp(-0.25 * x)) / (1 + np.exp(-0.25 * x))


def test_da_anchor_values():
    assert description_accuracy(0.0, 50, 3) == 1.0
    assert description_accuracy(-50 * np.log(3), 50, 3) == pytest.approx(0.0, abs=1e-15)
    # log_s P / L = -5 gives x = -4
    assert description_accuracy(-5 * 10 * np.log(2), 10, 2) == pytest.approx(-0.46212, abs=1e-5)
    assert squash(-4.0) == pytest.approx((1 - np.e) / (1 + np.e), abs=1e-14)


def test_squash_continuous_at_zero():
    assert squash(0.0) == 0.0
    assert abs(squash(1e-13) - squash(-1e-13)) < 1e-12


def test_impossible_sequence_floors():
    assert description_accuracy(-np.inf, 10, 2) == DA_FLOOR
    assert squash(-1e6) == DA_FLOOR


def test_single_symbol_alphabet():
    assert description_accuracy(0.0, 5, 1) == 1.0


@given(st.floats(min_value=-200, max_value=-1e-6))
def test_squash_matches_logistic_form(x):
    assert squash(x) == pytest.approx(logistic_form(x), abs=1e-12)


@given(st.floats(min_value=-1e4, max_value=1.0), st.floats(min_value=-1e4, max_value=1.0))
def test_squash_monotone_and_bounded(a, b):
    lo, hi = sorted((a, b))
    assert -1 < squash(lo) <= squash(hi) <= 1


def test_da_score():
    data = SequenceDataset([[0, 0, 0], [0, 0, 0]], 2)
    score = da(HmmParams(np.eye(2), np.eye(2), [1.0, 0.0]), data)
    assert score.mean == 1.0 and score.std == 0.0
    assert str(score) == "1.0000 (0.0000)"
    clock = da(prob_clock(), SequenceDataset([[0, 1, 1, 0], [1, 1, 1, 1]], 2))
    assert clock.values.shape == (2,)
    assert clock.std == pytest.approx(np.std(clock.values))
    with pytest.raises(TypeError):
        da(object(), data)

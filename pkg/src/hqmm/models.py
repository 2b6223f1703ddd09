"""The four benchmark generators used in the experiments."""
from __future__ import annotations

import numpy as np

from hqmm.hmm import HmmParams
from hqmm.model import KrausSet


def prob_clock() -> KrausSet:
    """2-state, 2-output probability clock; output 1 is a scaled rotation by 0.6 rad."""
    c, s = np.cos(0.6), np.sin(0.6)
    K1 = np.array([[0.6 * c, -s], [0.6 * s, c]])
    K2 = np.array([[0.8, 0.0], [0.0, 0.0]])
    return KrausSet.from_list([K1, K2])


def monras_2x4() -> KrausSet:
    a = 1 / np.sqrt(2)
    b = 1 / (2 * np.sqrt(2))
    return KrausSet.from_list([
        [[a, 0], [0, 0]],
        [[0, 0], [0, a]],
        [[b, b], [b, b]],
        [[b, -b], [-b, b]],
    ])


def fully_quantum_2x6() -> KrausSet:
    """Spin measured along z, x or y at random; outputs are (+z, -z, +x, -x, +y, -y)."""
    a = 1 / np.sqrt(3)
    b = 1 / (2 * np.sqrt(3))
    return KrausSet.from_list([
        [[a, 0], [0, 0]],
        [[0, 0], [0, a]],
        [[b, b], [b, b]],
        [[b, -b], [-b, b]],
        [[b, -1j * b], [1j * b, b]],
        [[b, 1j * b], [-1j * b, b]],
    ])


def handwritten_hmm_6x6() -> HmmParams:
    A = np.array([
        [0.8, 0.01, 0, 0.1, 0.3, 0],
        [0.02, 0.02, 0.1, 0.15, 0.05, 0],
        [0.08, 0.03, 0.1, 0.4, 0.05, 0.5],
        [0.05, 0.04, 0.5, 0.35, 0, 0.5],
        [0.03, 0.5, 0.03, 0, 0.6, 0],
        [0.02, 0.4, 0.27, 0, 0, 0],
    ])
    C = np.array([
        [0.2, 0, 0.05, 0.95, 0.01, 0.05],
        [0.7, 0.1, 0.05, 0.01, 0.05, 0.05],
        [0.05, 0.8, 0.1, 0.02, 0.05, 0.04],
        [0.04, 0.04, 0.02, 0, 0.84, 0.11],
        [0.01, 0.03, 0.7, 0.01, 0.02, 0.2],
        [0, 0.03, 0.08, 0.01, 0.03, 0.55],
    ])
    return HmmParams(A, C)


BUILTIN = {
    "prob_clock": prob_clock,
    "monras_2x4": monras_2x4,
    "fully_quantum_2x6": fully_quantum_2x6,
    "handwritten_hmm_6x6": handwritten_hmm_6x6,
}


def builtin_model(name: str):
    try:
        return BUILTIN[name]()
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(BUILTIN)}") from None

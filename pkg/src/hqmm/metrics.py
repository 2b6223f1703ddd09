"""Description accuracy (DA) of a sequence model."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hqmm.hmm import HmmParams, hmm_loglik_batch
from hqmm.model import KrausSet, hqmm_loglik_batch

DA_FLOOR = -1.0 + 1e-12


def squash(x):
    """Map ``(-inf, 1]`` onto ``(-1, 1]``: identity for ``x >= 0``, ``tanh(x / 8)`` below.

    ``tanh(x / 8)`` equals ``(1 - exp(-x/4)) / (1 + exp(-x/4))`` and stays finite for huge ``|x|``.
    """
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 0, x, np.tanh(np.minimum(x, 0.0) / 8.0))
    out = np.maximum(out, DA_FLOOR)
    return out if out.ndim else float(out)


def description_accuracy(loglik, length: int, s: int):
    """DA of sequences with natural-log likelihood ``loglik``, length ``length`` over ``s`` symbols."""
    loglik = np.asarray(loglik, dtype=float)
    if s == 1:
        return squash(np.where(np.isfinite(loglik), 1.0, -np.inf))
    with np.errstate(invalid="ignore"):
        x = 1.0 + loglik / (length * np.log(s))
    return squash(np.where(np.isfinite(loglik), x, -np.inf))


@dataclass(frozen=True, eq=False)
class DaScore:
    mean: float
    std: float
    values: np.ndarray

    def __str__(self):
        return f"{self.mean:.4f} ({self.std:.4f})"


def sequence_logliks(model, sequences, rho0=None) -> np.ndarray:
    if isinstance(model, KrausSet):
        return hqmm_loglik_batch(model, sequences, rho0)
    if isinstance(model, HmmParams):
        return hmm_loglik_batch(model, sequences)
    raise TypeError(f"cannot score sequences with {type(model).__name__}")


def da(model, dataset, rho0=None) -> DaScore:
    """Per-sequence DA of ``model`` on ``dataset``, with mean and (population) std."""
    ll = sequence_logliks(model, dataset.sequences, rho0)
    values = np.atleast_1d(description_accuracy(ll, dataset.length, dataset.s))
    return DaScore(float(values.mean()), float(values.std()), values)

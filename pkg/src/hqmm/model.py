"""Hidden quantum Markov models parameterized by Kraus operators.

A model holds ``ops[y, k]``, the ``k``-th of ``w`` Kraus branches for output
``y``. Observing ``y`` maps ``rho -> sum_k K rho K^dagger`` and the trace of
the result is the probability of that observation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from hqmm import _kernels
from hqmm.quantum import MIN_PROBABILITY, ImpossibleObservation, hermitize, maximally_mixed

COMPLETENESS_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Immutable set of Kraus operators with shape ``(s, w, n, n)``."""

    ops: np.ndarray

    def __post_init__(self):
        ops = np.array(self.ops, dtype=np.complex128)
        if ops.ndim != 4 or ops.shape[2] != ops.shape[3]:
            raise ValueError(f"expected operators of shape (s, w, n, n), got {ops.shape}")
        if not np.all(np.isfinite(ops)):
            raise ValueError("Kraus operators contain non-finite entries")
        ops.setflags(write=False)
        object.__setattr__(self, "ops", ops)

    @classmethod
    def from_list(cls, ops) -> "KrausSet":
        """Build from ``ops[y][k]`` nested lists, or a flat list meaning ``w = 1``."""
        arr = np.asarray(ops, dtype=np.complex128)
        if arr.ndim == 3:
            arr = arr[:, None]
        return cls(arr)

    @property
    def s(self) -> int:
        return self.ops.shape[0]

    @property
    def w(self) -> int:
        return self.ops.shape[1]

    @property
    def n(self) -> int:
        return self.ops.shape[2]

    @property
    def num_params(self) -> int:
        return self.n ** 2 * self.s * self.w

    def completeness_error(self) -> float:
        flat = self.ops.reshape(-1, self.n, self.n)
        total = np.einsum("kji,kjl->il", flat.conj(), flat)
        return float(np.max(np.abs(total - np.eye(self.n))))

    def check_complete(self, tol: float = COMPLETENESS_TOL) -> "KrausSet":
        err = self.completeness_error()
        if err > tol:
            raise ValueError(f"Kraus operators are not complete (max deviation {err:.3g})")
        return self

    def to_dict(self) -> dict:
        ops = [[interleave(self.ops[y, k]) for k in range(self.w)] for y in range(self.s)]
        return {"format": "hqmm-kraus", "version": 1, "n": self.n, "s": self.s, "w": self.w, "ops": ops}

    @classmethod
    def from_dict(cls, d: dict) -> "KrausSet":
        if d.get("format", "hqmm-kraus") != "hqmm-kraus":
            raise ValueError(f"not a Kraus document: format={d.get('format')!r}")
        n, s, w = int(d["n"]), int(d["s"]), int(d["w"])
        ops = np.empty((s, w, n, n), dtype=np.complex128)
        if len(d["ops"]) != s or any(len(row) != w for row in d["ops"]):
            raise ValueError("operator list does not match (s, w)")
        for y in range(s):
            for k in range(w):
                ops[y, k] = deinterleave(d["ops"][y][k], n, n)
        return cls(ops)

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "KrausSet":
        return cls.from_dict(json.loads(text))


def interleave(m: np.ndarray) -> list[float]:
    flat = np.asarray(m, dtype=np.complex128).reshape(-1)
    out = np.empty(2 * flat.size)
    out[0::2] = flat.real
    out[1::2] = flat.imag
    return out.tolist()


def deinterleave(values, rows: int, cols: int) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.size != 2 * rows * cols:
        raise ValueError(f"expected {2 * rows * cols} numbers, got {v.size}")
    return (v[0::2] + 1j * v[1::2]).reshape(rows, cols)


def random_kraus(n: int, s: int, w: int, rng: np.random.Generator) -> KrausSet:
    """Random complete Kraus set: orthonormalized complex Gaussian ``(n*s*w, n)`` isometry."""
    g = rng.standard_normal((n * s * w, n)) + 1j * rng.standard_normal((n * s * w, n))
    q, r = np.linalg.qr(g)
    # fix the column phases so the draw is Haar-distributed
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))[None, :]
    return KrausSet(q.reshape(s, w, n, n))


@dataclass(frozen=True, eq=False)
class HqmmState:
    rho: np.ndarray
    log_scale: float = 0.0


def _branch_sum(kraus: KrausSet, rho: np.ndarray, y: int) -> np.ndarray:
    K = kraus.ops[y]
    return np.einsum("kij,jl,kml->im", K, rho, K.conj())


def hqmm_step(state: HqmmState, kraus: KrausSet, y: int) -> HqmmState:
    """Condition on observing ``y`` and return the renormalized state."""
    if not 0 <= y < kraus.s:
        raise ValueError(f"symbol {y} outside [0, {kraus.s})")
    num = _branch_sum(kraus, state.rho, y)
    p = float(np.trace(num).real)
    if p < MIN_PROBABILITY:
        raise ImpossibleObservation(f"symbol {y} has zero probability in this state")
    return HqmmState(hermitize(num) / p, state.log_scale + np.log(p))


def hqmm_output_probs(kraus: KrausSet, rho: np.ndarray) -> np.ndarray:
    """Probability of each next output given state ``rho``."""
    K = kraus.ops
    probs = np.einsum("ykij,jl,ykil->y", K, rho, K.conj()).real
    return np.clip(probs, 0.0, None)


def _check_symbols(seqs: np.ndarray, s: int):
    if seqs.size and (seqs.min() < 0 or seqs.max() >= s):
        raise ValueError(f"symbols must lie in [0, {s})")


def hqmm_loglik(kraus: KrausSet, seq, rho0=None, method: str = "auto") -> float:
    """Log-likelihood of one sequence by repeated filtering.

    ``method="product"`` multiplies the single Kraus operator per symbol and
    applies the product once (only valid for ``w == 1``); ``"generic"`` steps
    the density matrix; ``"auto"`` picks the product form when it applies.
    Raises ImpossibleObservation for a zero-probability sequence.
    """
    rho0 = maximally_mixed(kraus.n) if rho0 is None else np.asarray(rho0, dtype=complex)
    seq = np.asarray(seq, dtype=np.int64).reshape(-1)
    _check_symbols(seq, kraus.s)
    if method == "auto":
        method = "product" if kraus.w == 1 else "generic"
    if method == "generic":
        state = HqmmState(rho0)
        for y in seq:
            state = hqmm_step(state, kraus, int(y))
        return float(state.log_scale)
    if method != "product":
        raise ValueError(f"unknown method {method!r}")
    if kraus.w != 1:
        raise ValueError("the product form needs exactly one Kraus operator per output")
    prod = np.eye(kraus.n, dtype=complex)
    log_scale = 0.0
    for y in seq:
        prod = kraus.ops[y, 0] @ prod
        f = np.linalg.norm(prod)
        if f * f < MIN_PROBABILITY:
            raise ImpossibleObservation("sequence has zero probability")
        prod /= f
        log_scale += 2.0 * np.log(f)
    p = float(np.trace(prod @ rho0 @ prod.conj().T).real)
    if p < MIN_PROBABILITY:
        raise ImpossibleObservation("sequence has zero probability")
    return float(log_scale + np.log(p))


def hqmm_loglik_batch(kraus: KrausSet, seqs, rho0=None) -> np.ndarray:
    """Per-sequence log-likelihoods via the compiled filter; impossible gives ``-inf``."""
    rho0 = maximally_mixed(kraus.n) if rho0 is None else np.ascontiguousarray(rho0, dtype=np.complex128)
    seqs = np.ascontiguousarray(np.atleast_2d(np.asarray(seqs, dtype=np.int64)))
    _check_symbols(seqs, kraus.s)
    ops = np.ascontiguousarray(kraus.ops)
    if kraus.w == 1:
        return _kernels.hqmm_loglik_product(ops, rho0, seqs)
    return _kernels.hqmm_loglik_generic(ops, rho0, seqs)


def hqmm_sample(kraus: KrausSet, length: int, burn_in: int = 0, rng_seed=None, rho0=None) -> np.ndarray:
    """Draw each symbol from the current output distribution, then condition on it."""
    if length < 1:
        raise ValueError("length must be >= 1")
    rho0 = maximally_mixed(kraus.n) if rho0 is None else np.ascontiguousarray(rho0, dtype=np.complex128)
    rng = np.random.default_rng(rng_seed)
    uniforms = rng.random(burn_in + length)
    out = _kernels.hqmm_sample(np.ascontiguousarray(kraus.ops), rho0, uniforms)
    return out[burn_in:]

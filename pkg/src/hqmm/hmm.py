"""Classical hidden Markov models in column-stochastic form.

``A[i, j] = P(z_t = i | z_{t-1} = j)`` and ``C[y, i] = P(y_t = y | z_t = i)``.
The chain starts in ``z_0 ~ prior`` and every emission follows a transition,
so the belief recursion is ``x_t ∝ T_y x_{t-1}`` with ``T_y = diag(C[y]) A``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from hqmm import _kernels
from hqmm.quantum import ImpossibleObservation

logger = logging.getLogger(__name__)

STOCHASTIC_TOL = 1e-10


def check_column_stochastic(M, tol: float = STOCHASTIC_TOL, name: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D")
    if np.any(M < -tol) or not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has negative or non-finite entries")
    if np.max(np.abs(M.sum(axis=0) - 1.0)) > tol:
        raise ValueError(f"{name} columns do not sum to 1")
    return M


@dataclass(frozen=True, eq=False)
class HmmParams:
    A: np.ndarray
    C: np.ndarray
    prior: np.ndarray = None

    def __post_init__(self):
        A = check_column_stochastic(self.A, name="A")
        C = check_column_stochastic(self.C, name="C")
        if A.shape[0] != A.shape[1] or C.shape[1] != A.shape[0]:
            raise ValueError(f"incompatible shapes A{A.shape}, C{C.shape}")
        prior = np.full(A.shape[0], 1.0 / A.shape[0]) if self.prior is None else np.asarray(self.prior, float)
        if prior.shape != (A.shape[0],) or np.any(prior < 0) or abs(prior.sum() - 1.0) > STOCHASTIC_TOL:
            raise ValueError("prior must be a probability vector of length n")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "prior", prior)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def s(self) -> int:
        return self.C.shape[0]

    @property
    def num_params(self) -> int:
        return self.n ** 2 + self.n * self.s

    def to_dict(self) -> dict:
        return {"format": "hmm", "A": self.A.tolist(), "C": self.C.tolist(), "prior": self.prior.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "HmmParams":
        if d.get("format", "hmm") != "hmm":
            raise ValueError(f"not an HMM document: format={d.get('format')!r}")
        return cls(np.array(d["A"], float), np.array(d["C"], float), d.get("prior"))


def observable_operators(params: HmmParams) -> np.ndarray:
    """Stack of ``T_y = diag(C[y]) A`` with shape ``(s, n, n)``."""
    return params.C[:, :, None] * params.A[None, :, :]


def stationary_distribution(A: np.ndarray) -> np.ndarray:
    """Eigenvector of ``A`` for eigenvalue 1, normalized to sum to one."""
    vals, vecs = np.linalg.eig(A)
    k = np.argmin(np.abs(vals - 1.0))
    v = np.real(vecs[:, k])
    return v / v.sum()


def _as_sequence(seq) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(seq, dtype=np.int64).reshape(-1))


def hmm_forward(params: HmmParams, seq) -> tuple[float, np.ndarray]:
    """Scaled forward filter.

    Returns the sequence log-likelihood and the final belief vector.
    Raises ImpossibleObservation if some step has zero probability.
    """
    seq = _as_sequence(seq)
    if seq.size and (seq.min() < 0 or seq.max() >= params.s):
        raise ValueError(f"symbols must lie in [0, {params.s})")
    T = observable_operators(params)
    x = params.prior.copy()
    loglik = 0.0
    for t, y in enumerate(seq):
        x = T[y] @ x
        c = x.sum()
        if c < 1e-300:
            raise ImpossibleObservation(f"sequence impossible under model at step {t}")
        x /= c
        loglik += np.log(c)
    return float(loglik), x


def hmm_loglik_batch(params: HmmParams, seqs) -> np.ndarray:
    """Per-sequence log-likelihoods; impossible sequences give ``-inf``."""
    seqs = np.ascontiguousarray(np.atleast_2d(np.asarray(seqs, dtype=np.int64)))
    return _kernels.hmm_loglik_batch(params.A, params.C, params.prior, seqs)


def _cdf(P: np.ndarray) -> np.ndarray:
    c = np.cumsum(P, axis=0)
    return np.ascontiguousarray(c / c[-1])


def hmm_sample(params: HmmParams, length: int, burn_in: int = 0, rng_seed=None) -> np.ndarray:
    """Sample ``length`` symbols after discarding ``burn_in`` of them."""
    if length < 1:
        raise ValueError("length must be >= 1")
    rng = np.random.default_rng(rng_seed)
    u0 = rng.random()
    uniforms = rng.random((burn_in + length, 2))
    out = _kernels.hmm_sample(_cdf(params.A), _cdf(params.C), _cdf(params.prior), u0, uniforms)
    return out[burn_in:]


@dataclass
class EMResult:
    params: HmmParams
    loglik_trace: list = field(default_factory=list)
    traces: list = field(default_factory=list)
    seed: int | None = None


def _random_params(n: int, s: int, rng: np.random.Generator) -> HmmParams:
    A = rng.dirichlet(np.ones(n), size=n).T
    C = rng.dirichlet(np.ones(s), size=n).T
    prior = rng.dirichlet(np.ones(n))
    return HmmParams(A, C, prior)


def _normalize_columns(counts: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    tot = counts.sum(axis=0)
    out = fallback.copy()
    ok = tot > 0
    out[:, ok] = counts[:, ok] / tot[ok]
    return out


def _em_single(seqs, n, s, rng, max_iters, tol) -> EMResult:
    params = _random_params(n, s, rng)
    trace = []
    for _ in range(max_iters):
        ll, trans, emit, first = _kernels.hmm_em_stats(params.A, params.C, params.prior, seqs)
        trace.append(float(ll))
        A = _normalize_columns(trans, params.A)
        C = _normalize_columns(emit, params.C)
        prior = first / first.sum()
        params = HmmParams(A, C, prior)
        if len(trace) > 1 and abs(trace[-1] - trace[-2]) < tol * abs(trace[-2]):
            break
    final = float(np.sum(hmm_loglik_batch(params, seqs)))
    trace.append(final)
    return EMResult(params, trace)


def baum_welch(
    data,
    n: int,
    s: int | None = None,
    restarts: int = 10,
    max_iters: int = 500,
    tol: float = 1e-6,
    rng_seed=None,
) -> EMResult:
    """Fit an ``n``-state HMM by EM, returning the best of ``restarts`` runs.

    Parameters
    ----------
    data : SequenceDataset or array of shape (M, L)
        0-based symbol sequences of equal length.
    s : int, optional
        Alphabet size; taken from the dataset (or the largest symbol) if omitted.
    tol : float
        Stop once the relative change in training log-likelihood falls below this.

    Returns
    -------
    EMResult
        ``loglik_trace`` belongs to the winning restart and ends with the
        log-likelihood of the returned parameters; ``traces`` holds every restart.
    """
    seqs = getattr(data, "sequences", data)
    seqs = np.ascontiguousarray(np.atleast_2d(np.asarray(seqs, dtype=np.int64)))
    if seqs.size == 0:
        raise ValueError("empty dataset")
    if n < 1 or restarts < 1:
        raise ValueError("n and restarts must be >= 1")
    if s is None:
        s = getattr(data, "s", None) or int(seqs.max()) + 1
    if seqs.min() < 0 or seqs.max() >= s:
        raise ValueError(f"symbols must lie in [0, {s})")
    children = np.random.SeedSequence(rng_seed).spawn(restarts)
    best = None
    traces = []
    for k, child in enumerate(children):
        res = _em_single(seqs, n, s, np.random.default_rng(child), max_iters, tol)
        traces.append(res.loglik_trace)
        logger.debug("EM restart %d: loglik %.6f after %d iters", k, res.loglik_trace[-1], len(res.loglik_trace))
        if best is None or res.loglik_trace[-1] > best.loglik_trace[-1]:
            best = res
    best.traces = traces
    best.seed = rng_seed
    return best

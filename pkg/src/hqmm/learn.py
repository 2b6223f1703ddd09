"""Maximum-likelihood HQMM learning by two-row complex Givens rotations.

All Kraus operators are stacked into an ``(n*s*w, n)`` matrix ``kappa`` with
orthonormal columns (block ``y*w + k`` holds ``ops[y, k]``). Any other
complete Kraus set is ``U @ kappa`` for a unitary ``U``, and every unitary is
a product of two-row rotations, so training repeatedly picks a random row pair
and optimizes the four rotation angles for batch likelihood, keeping the
update only when it helps.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from hqmm import _kernels
from hqmm.data import SequenceDataset
from hqmm.givens import HRotation, rotate_rows
from hqmm.metrics import da
from hqmm.model import COMPLETENESS_TOL, KrausSet, random_kraus
from hqmm.quantum import maximally_mixed

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StackedKraus:
    kappa: np.ndarray
    n: int
    s: int
    w: int

    def __post_init__(self):
        if self.kappa.shape != (self.n * self.s * self.w, self.n):
            raise ValueError(f"kappa shape {self.kappa.shape} does not match (n, s, w) = {(self.n, self.s, self.w)}")

    def orthonormality_error(self) -> float:
        k = self.kappa
        return float(np.max(np.abs(k.conj().T @ k - np.eye(self.n))))

    @property
    def ops(self) -> np.ndarray:
        return self.kappa.reshape(self.s, self.w, self.n, self.n)


def stack(kraus: KrausSet) -> StackedKraus:
    return StackedKraus(kraus.ops.reshape(-1, kraus.n).copy(), kraus.n, kraus.s, kraus.w)


def unstack(sk: StackedKraus) -> KrausSet:
    return KrausSet(sk.ops)


def apply_rotation(sk: StackedKraus, rot: HRotation) -> StackedKraus:
    return StackedKraus(rotate_rows(sk.kappa, rot), sk.n, sk.s, sk.w)


def batch_loglik(ops: np.ndarray, seqs: np.ndarray, rho0: np.ndarray) -> float:
    """Summed log-likelihood of the batch; ``-inf`` if any sequence is impossible."""
    ops = np.ascontiguousarray(ops)
    if ops.shape[1] == 1:
        return float(np.sum(_kernels.hqmm_loglik_product(ops, rho0, seqs)))
    return float(np.sum(_kernels.hqmm_loglik_generic(ops, rho0, seqs)))


@dataclass
class InnerConfig:
    """Nelder-Mead over the four rotation angles."""

    restarts: int = 4
    max_evals: int = 200
    simplex_step: float = 0.5
    accept_tol: float = 1e-10
    xatol: float = 1e-6
    fatol: float = 1e-9


@dataclass
class Phase:
    batch_size: int
    num_iterations: int
    num_batches: int


DEFAULT_SCHEDULE = (Phase(1, 6, 40), Phase(4, 3, 40))


@dataclass
class TrainConfig:
    """Training settings.

    ``schedule`` lists phases of ``(batch_size, num_iterations, num_batches)``;
    when it is ``None`` a single phase is built from the flat fields.
    """

    batch_size: int = 1
    num_batches: int = 40
    num_iterations: int = 6
    rng_seed: int | None = 0
    inner: InnerConfig = field(default_factory=InnerConfig)
    schedule: list[Phase] | None = field(default_factory=lambda: list(DEFAULT_SCHEDULE))
    debug: bool = False

    def __post_init__(self):
        if isinstance(self.inner, dict):
            self.inner = InnerConfig(**self.inner)
        if self.schedule is not None:
            self.schedule = [p if isinstance(p, Phase) else Phase(**p) if isinstance(p, dict) else Phase(*p)
                             for p in self.schedule]
        for p in self.phases():
            if min(p.batch_size, p.num_iterations, p.num_batches) < 1:
                raise ValueError(f"phase counts must be >= 1: {p}")

    def phases(self) -> list[Phase]:
        if self.schedule is None:
            return [Phase(self.batch_size, self.num_iterations, self.num_batches)]
        return list(self.schedule)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass
class BatchRecord:
    phase: int
    batch: int
    indices: list
    logliks: list  # batch log-likelihood before the batch and after each accepted rotation


@dataclass
class TrainReport:
    batches: list = field(default_factory=list)
    accepted: int = 0
    rejected: int = 0
    train_da: float | None = None
    val_da: float | None = None
    wall_time: float = field(default=0.0, compare=False)

    @property
    def loglik_trace(self) -> list[float]:
        return [b.logliks[-1] for b in self.batches]

    def to_dict(self) -> dict:
        return asdict(self)


def inner_optimize(
    sk: StackedKraus,
    i: int,
    j: int,
    batch,
    cfg: InnerConfig | None = None,
    rng: np.random.Generator | None = None,
    rho0=None,
) -> tuple[tuple[float, float, float, float], float]:
    """Best angles ``(theta, phi, psi, delta)`` for rotating rows ``(i, j)``.

    Returns the zero rotation and the current log-likelihood unless some
    rotation improves the batch log-likelihood by more than ``cfg.accept_tol``.
    The reported log-likelihood is recomputed from the rotated model.
    """
    cfg = cfg or InnerConfig()
    rng = rng or np.random.default_rng()
    rho0 = maximally_mixed(sk.n) if rho0 is None else np.ascontiguousarray(rho0, dtype=complex)
    seqs = np.ascontiguousarray(getattr(batch, "sequences", batch), dtype=np.int64)

    def loglik_at(x) -> float:
        rotated = apply_rotation(sk, HRotation(i, j, *x))
        return batch_loglik(rotated.ops, seqs, rho0)

    def objective(x):
        ll = loglik_at(x)
        return -ll if np.isfinite(ll) else 1e300

    base = batch_loglik(sk.ops, seqs, rho0)
    best_x, best_ll = np.zeros(4), base
    starts = [np.zeros(4)] + [rng.uniform(-np.pi, np.pi, 4) for _ in range(cfg.restarts)]
    for x0 in starts:
        simplex = np.vstack([x0, x0 + cfg.simplex_step * np.eye(4)])
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"maxfev": cfg.max_evals, "initial_simplex": simplex,
                                "xatol": cfg.xatol, "fatol": cfg.fatol})
        if -res.fun > best_ll:
            best_x, best_ll = res.x, -res.fun
    if not best_ll > base + cfg.accept_tol:
        return (0.0, 0.0, 0.0, 0.0), base
    angles = tuple(float(v) for v in best_x)
    return angles, loglik_at(angles)


def _row_pairs(rows: int, count: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """``count`` independent uniform pairs ``i < j``."""
    out = []
    for _ in range(count):
        i, j = rng.choice(rows, size=2, replace=False)
        out.append((int(min(i, j)), int(max(i, j))))
    return out


def save_checkpoint(path, sk: StackedKraus, cfg: TrainConfig, rng: np.random.Generator,
                    position: tuple[int, int], report: TrainReport) -> None:
    """Write model, config, RNG state and progress so training can resume after ``position``."""
    doc = {
        "model": unstack(sk).to_dict(),
        "config": cfg.to_dict(),
        "rng_state": rng.bit_generator.state,
        "position": list(position),
        "report": report.to_dict(),
    }
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(doc))
    tmp.replace(path)


def load_checkpoint(path) -> dict:
    doc = json.loads(Path(path).read_text())
    doc["model"] = KrausSet.from_dict(doc["model"])
    doc["config"] = TrainConfig.from_dict(doc["config"])
    rep = doc["report"]
    rep["batches"] = [BatchRecord(**b) for b in rep["batches"]]
    doc["report"] = TrainReport(**rep)
    return doc


def train(
    data: SequenceDataset,
    dims: tuple[int, int, int],
    cfg: TrainConfig | None = None,
    validation: SequenceDataset | None = None,
    init: KrausSet | None = None,
    rho0=None,
    checkpoint=None,
    resume=None,
) -> tuple[KrausSet, TrainReport]:
    """Learn an ``(n, s, w)`` HQMM from ``data``.

    ``checkpoint`` is a path rewritten after every batch; ``resume`` is a path
    to such a file (its config replaces ``cfg``) and training continues from
    the next batch with the saved RNG state, giving the same result as an
    uninterrupted run.
    """
    n, s, w = dims
    seqs = np.ascontiguousarray(getattr(data, "sequences", data), dtype=np.int64)
    if seqs.ndim != 2 or seqs.size == 0:
        raise ValueError("empty dataset")
    if seqs.min() < 0 or seqs.max() >= s or getattr(data, "s", s) != s:
        raise ValueError(f"data alphabet does not match s={s}")
    rho0 = maximally_mixed(n) if rho0 is None else np.ascontiguousarray(rho0, dtype=complex)
    done = (-1, -1)
    if resume is not None:
        state = load_checkpoint(resume)
        cfg = state["config"]
        rng = np.random.default_rng()
        rng.bit_generator.state = state["rng_state"]
        init = state["model"]
        report = state["report"]
        done = tuple(state["position"])
    else:
        cfg = cfg or TrainConfig()
        rng = np.random.default_rng(cfg.rng_seed)
        report = TrainReport()
        if init is None:
            init = random_kraus(n, s, w, rng)
    if (init.n, init.s, init.w) != (n, s, w):
        raise ValueError("initial model does not match dims")
    sk = stack(init)
    start = time.perf_counter()
    rows = n * s * w
    for p_idx, phase in enumerate(cfg.phases()):
        b = min(phase.batch_size, seqs.shape[0])
        for batch_idx in range(phase.num_batches):
            if (p_idx, batch_idx) <= done:
                continue
            idx = np.sort(rng.choice(seqs.shape[0], size=b, replace=False))
            batch = seqs[idx]
            record = BatchRecord(p_idx, batch_idx, idx.tolist(), [batch_loglik(sk.ops, batch, rho0)])
            pairs = _row_pairs(rows, phase.num_iterations, rng) if rows >= 2 else []
            for i, j in pairs:
                angles, ll = inner_optimize(sk, i, j, batch, cfg.inner, rng, rho0)
                if any(angles):
                    sk = apply_rotation(sk, HRotation(i, j, *angles))
                    record.logliks.append(ll)
                    report.accepted += 1
                    if cfg.debug and sk.orthonormality_error() > COMPLETENESS_TOL:
                        raise RuntimeError(f"kappa lost orthonormality after rotation ({i}, {j})")
                else:
                    report.rejected += 1
            report.batches.append(record)
            logger.debug("phase %d batch %d: loglik %.4f -> %.4f", p_idx, batch_idx,
                         record.logliks[0], record.logliks[-1])
            if checkpoint is not None:
                save_checkpoint(checkpoint, sk, cfg, rng, (p_idx, batch_idx), report)
    model = unstack(sk)
    report.wall_time += time.perf_counter() - start
    report.train_da = da(model, _as_dataset(data, s), rho0).mean
    if validation is not None:
        report.val_da = da(model, validation, rho0).mean
    return model, report


def _as_dataset(data, s: int) -> SequenceDataset:
    return data if isinstance(data, SequenceDataset) else SequenceDataset(data, s)

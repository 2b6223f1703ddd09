"""Dataset generation and the benchmark tables (true model vs learned HQMMs vs EM-trained HMMs)."""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from hqmm.data import SequenceDataset, save_dataset
from hqmm.hmm import HmmParams, baum_welch, hmm_sample
from hqmm.learn import TrainConfig, train
from hqmm.metrics import da
from hqmm.model import KrausSet, hqmm_sample
from hqmm.models import BUILTIN, builtin_model

logger = logging.getLogger(__name__)

WORKERS_ENV = "HQMM_WORKERS"

SCALES = {
    "desk": {"m_train": 10, "m_val": 5, "length": 500, "burn_in": 200},
    "full": {"m_train": 20, "m_val": 10, "length": 3000, "burn_in": 1000},
}

# recorded in every results file
ASSUMPTIONS = {
    "hqmm_initial_state": "maximally mixed I/n",
    "hmm_generator_prior": "uniform",
    "da_aggregation": "per-sequence DA, then mean and population std",
    "train_da": "final model evaluated on the training split",
    "hmm_selection": "best training log-likelihood over EM restarts",
}


@dataclass
class ModelCell:
    kind: str  # "true", "hqmm" or "hmm"
    dims: tuple = ()

    def __post_init__(self):
        if self.kind not in ("true", "hqmm", "hmm"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        self.dims = tuple(int(d) for d in self.dims)
        if self.kind == "hqmm" and len(self.dims) != 3:
            raise ValueError("HQMM cells need dims (n, s, w)")
        if self.kind == "hmm" and len(self.dims) != 2:
            raise ValueError("HMM cells need dims (n, s)")
        if any(d < 1 for d in self.dims):
            raise ValueError("model dims must be positive")


@dataclass
class ExperimentSpec:
    generator: str
    grid: list = field(default_factory=list)
    m_train: int = 10
    m_val: int = 5
    length: int = 500
    burn_in: int = 200
    seed: int = 0
    train: TrainConfig = field(default_factory=TrainConfig)
    em_restarts: int = 10
    em_max_iters: int = 500
    em_tol: float = 1e-6
    out: str | None = None
    name: str = "experiment"

    def __post_init__(self):
        self.grid = [c if isinstance(c, ModelCell) else ModelCell(**c) if isinstance(c, dict) else ModelCell(*c)
                     for c in self.grid]
        if isinstance(self.train, dict):
            self.train = TrainConfig.from_dict(self.train)
        if min(self.m_train, self.m_val, self.length) < 1 or self.burn_in < 0:
            raise ValueError("dataset sizes must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = [{"kind": c.kind, "dims": list(c.dims)} for c in self.grid]
        return d


def load_generator(generator: str):
    """A builtin model name, or a path to an HMM / Kraus JSON file."""
    if generator in BUILTIN:
        return builtin_model(generator)
    path = Path(generator)
    if not path.exists():
        raise ValueError(f"unknown generator {generator!r}")
    return load_model(path)


def load_model(path):
    doc = json.loads(Path(path).read_text())
    fmt = doc.get("format")
    if fmt == "hmm":
        return HmmParams.from_dict(doc)
    if fmt == "hqmm-kraus":
        return KrausSet.from_dict(doc)
    raise ValueError(f"{path}: unrecognized model format {fmt!r}")


def save_model(model, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model.to_dict()) + "\n")
    return path


def model_alphabet(model) -> int:
    return model.s


def sample_sequences(model, count: int, length: int, burn_in: int, seed_seq: np.random.SeedSequence) -> np.ndarray:
    """``count`` independent sequences, each with its own burn-in and child seed."""
    draw = hmm_sample if isinstance(model, HmmParams) else hqmm_sample
    return np.array([draw(model, length, burn_in, child) for child in seed_seq.spawn(count)], dtype=np.int64)


def make_datasets(spec: ExperimentSpec, model=None) -> tuple[SequenceDataset, SequenceDataset]:
    model = load_generator(spec.generator) if model is None else model
    train_ss, val_ss = np.random.SeedSequence([spec.seed, 0]).spawn(2)
    meta = {"generator": spec.generator, "seed": spec.seed, "burn_in": spec.burn_in,
            "initial_state": "uniform prior" if isinstance(model, HmmParams) else "maximally mixed"}
    tr = SequenceDataset(sample_sequences(model, spec.m_train, spec.length, spec.burn_in, train_ss),
                         model.s, dict(meta, split="train"))
    va = SequenceDataset(sample_sequences(model, spec.m_val, spec.length, spec.burn_in, val_ss),
                         model.s, dict(meta, split="validation"))
    return tr, va


def generate_dataset(spec: ExperimentSpec, out_dir=None) -> tuple[Path, Path]:
    """Write ``train.txt`` and ``val.txt`` (with metadata sidecars) under ``out_dir``."""
    out = Path(out_dir or spec.out or ".")
    tr, va = make_datasets(spec)
    return save_dataset(tr, out / "train.txt"), save_dataset(va, out / "val.txt")


def cell_label(cell: ModelCell, generator_model) -> str:
    if cell.kind == "true":
        if isinstance(generator_model, HmmParams):
            return f"{generator_model.n},{generator_model.s}-HMM (T)"
        g = generator_model
        return f"{g.n},{g.s},{g.w}-HQMM (T)"
    tag = "HQMM" if cell.kind == "hqmm" else "HMM"
    return ",".join(map(str, cell.dims)) + f"-{tag} (L)"


def parameter_count(cell: ModelCell, generator_model=None) -> int:
    """``n^2 s w`` for an HQMM, ``n^2 + n s`` for an HMM."""
    if cell.kind == "true":
        return generator_model.num_params
    if cell.kind == "hqmm":
        n, s, w = cell.dims
        return n * n * s * w
    n, s = cell.dims
    return n * n + n * s


def _cell_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, 1, index]).generate_state(1)[0])


def _run_cell(args) -> dict:
    spec, index, generator_model, tr, va = args
    cell = spec.grid[index]
    row = {"model": cell_label(cell, generator_model), "kind": cell.kind,
           "P": parameter_count(cell, generator_model), "status": "ok"}
    start = time.perf_counter()
    try:
        extra = {}
        if cell.kind == "true":
            model = generator_model
        elif cell.kind == "hqmm":
            cfg = TrainConfig.from_dict(dict(spec.train.to_dict(), rng_seed=_cell_seed(spec.seed, index)))
            model, report = train(tr, cell.dims, cfg)
            extra = {"accepted": report.accepted, "rejected": report.rejected,
                     "batch_logliks": [b.logliks for b in report.batches]}
        else:
            n, s = cell.dims
            res = baum_welch(tr, n, s, restarts=spec.em_restarts, max_iters=spec.em_max_iters,
                             tol=spec.em_tol, rng_seed=_cell_seed(spec.seed, index))
            model = res.params
            extra = {"em_traces": res.traces}
        d_tr, d_va = da(model, tr), da(model, va)
        row.update(train_da_mean=d_tr.mean, train_da_std=d_tr.std, test_da_mean=d_va.mean, test_da_std=d_va.std)
        row["model_params"] = model.to_dict()
        row.update(extra)
    except Exception as exc:  # one failed cell must not sink the table
        logger.error("cell %d (%s) failed: %s", index, row["model"], exc)
        row.update(status="error", error=f"{type(exc).__name__}: {exc}", traceback=traceback.format_exc())
    row["wall_time"] = time.perf_counter() - start
    return row


def worker_count(cells: int) -> int:
    try:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer") from None
    return max(1, min(workers, cells))


CSV_FIELDS = ["model", "P", "train_da_mean", "train_da_std", "test_da_mean", "test_da_std", "status"]


def results_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in rows:
        vals = []
        for f in CSV_FIELDS:
            v = r.get(f, "")
            vals.append(f"{v:.6f}" if isinstance(v, float) else v)
        writer.writerow(vals)
    return buf.getvalue()


def run_experiment(spec: ExperimentSpec) -> list[dict]:
    """Evaluate every grid cell; writes ``<name>.csv`` and ``<name>.json`` when ``spec.out`` is set."""
    generator_model = load_generator(spec.generator)
    tr, va = make_datasets(spec, generator_model)
    if tr.s != generator_model.s:
        raise ValueError("dataset alphabet does not match the generator")
    jobs = [(spec, k, generator_model, tr, va) for k in range(len(spec.grid))]
    workers = worker_count(len(jobs))
    if workers == 1:
        rows = [_run_cell(job) for job in jobs]
    else:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_run_cell, jobs))
    if spec.out:
        out = Path(spec.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{spec.name}.csv").write_text(results_csv(rows))
        doc = {"spec": spec.to_dict(), "assumptions": ASSUMPTIONS, "rows": rows}
        (out / f"{spec.name}.json").write_text(json.dumps(doc, indent=1, default=_json_default) + "\n")
    return rows


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


TABLES = {
    2: ("prob_clock", [("true",), ("hqmm", (2, 2, 1)), ("hmm", (2, 2)), ("hmm", (4, 2)), ("hmm", (8, 2))]),
    3: ("monras_2x4", [("true",), ("hqmm", (2, 4, 1)), ("hqmm", (2, 4, 2)),
                       ("hmm", (2, 4)), ("hmm", (3, 4)), ("hmm", (4, 4))]),
    4: ("fully_quantum_2x6", [("true",), ("hqmm", (2, 6, 1))] + [("hmm", (n, 6)) for n in range(2, 7)]),
    5: ("handwritten_hmm_6x6", [("true",)]
        + [("hqmm", d) for d in [(2, 6, 1), (3, 6, 1), (4, 6, 1), (5, 6, 1), (5, 6, 2),
                                 (5, 6, 3), (5, 6, 5), (6, 6, 1), (6, 6, 2)]]
        + [("hmm", (n, 6)) for n in range(2, 7)]),
}


def table_spec(table: int, scale: str = "desk", seed: int = 0, out=None, **overrides) -> ExperimentSpec:
    if table not in TABLES:
        raise ValueError(f"unknown table {table}; choose from {sorted(TABLES)}")
    if scale not in SCALES:
        raise ValueError(f"unknown scale {scale!r}; choose from {sorted(SCALES)}")
    generator, grid = TABLES[table]
    kwargs = dict(SCALES[scale], generator=generator, grid=[ModelCell(*c) for c in grid],
                  seed=seed, out=None if out is None else str(out), name=f"table{table}_{scale}")
    kwargs.update(overrides)
    return ExperimentSpec(**kwargs)

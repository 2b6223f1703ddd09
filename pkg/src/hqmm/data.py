"""Sequence datasets and their on-disk format.

A dataset file holds one sequence per line as space-separated 1-based
symbols; metadata lives in a JSON sidecar next to it (``<file>.meta.json``).
In memory, symbols are 0-based.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(eq=False)
class SequenceDataset:
    sequences: np.ndarray
    s: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        seqs = np.atleast_2d(np.asarray(self.sequences, dtype=np.int64))
        if seqs.ndim != 2:
            raise ValueError("sequences must form an (M, L) array")
        if seqs.size and (seqs.min() < 0 or seqs.max() >= self.s):
            raise ValueError(f"symbols must lie in [0, {self.s})")
        self.sequences = np.ascontiguousarray(seqs)

    @property
    def num_sequences(self) -> int:
        return self.sequences.shape[0]

    @property
    def length(self) -> int:
        return self.sequences.shape[1]

    def subset(self, idx) -> "SequenceDataset":
        return SequenceDataset(self.sequences[np.asarray(idx)], self.s, dict(self.metadata))

    def __len__(self):
        return self.num_sequences


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def save_dataset(ds: SequenceDataset, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [" ".join(str(int(v) + 1) for v in row) for row in ds.sequences]
    path.write_text("\n".join(lines) + "\n")
    meta = dict(ds.metadata, s=ds.s, num_sequences=ds.num_sequences, length=ds.length)
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def load_dataset(path, s: int | None = None) -> SequenceDataset:
    """Read a dataset file; ``s`` defaults to the sidecar value, then the largest symbol."""
    path = Path(path)
    rows = [line.split() for line in path.read_text().splitlines() if line.strip()]
    if not rows:
        raise ValueError(f"{path} holds no sequences")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: sequences have unequal lengths")
    try:
        seqs = np.array([[int(v) for v in r] for r in rows], dtype=np.int64) - 1
    except ValueError as exc:
        raise ValueError(f"{path}: non-integer symbol") from exc
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text())
    if s is None:
        s = int(meta.get("s", seqs.max() + 1))
    if seqs.min() < 0:
        raise ValueError(f"{path}: symbols are 1-based; found 0 or negative")
    return SequenceDataset(seqs, s, meta)

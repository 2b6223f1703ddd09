"""Density-matrix primitives: tensor product, partial traces, projections.

All joint systems use the Cartesian-product basis with the second factor
varying fastest, i.e. index ``a * s + b`` for ``|a>|b>``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
MIN_PROBABILITY = 1e-300
MAX_DIM = 1 << 14


class ImpossibleObservation(ValueError):
    """Raised when an observation has (numerically) zero probability."""


def check_density_matrix(rho, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``rho`` as a density matrix and return it as a complex array.

    Raises
    ------
    ValueError
        If ``rho`` is not square, not finite, not Hermitian, not unit trace
        or has an eigenvalue below ``-tol``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("density matrix has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix trace is {np.trace(rho).real:.3g}, expected 1")
    herm = 0.5 * (rho + rho.conj().T)
    if np.linalg.eigvalsh(herm).min() < -tol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def is_density_matrix(rho, tol: float = HERMITIAN_TOL) -> bool:
    try:
        check_density_matrix(rho, tol)
    except ValueError:
        return False
    return True


def maximally_mixed(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex) / n


def basis_state(index: int, n: int) -> np.ndarray:
    """Pure state ``|index><index|`` in an ``n``-dimensional space."""
    rho = np.zeros((n, n), dtype=complex)
    rho[index, index] = 1.0
    return rho


def random_density_matrix(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Draw a random density matrix as ``G G^dagger / tr`` for complex Gaussian ``G``."""
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def hermitize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + rho.conj().T)


def tensor(a: np.ndarray, b: np.ndarray, validate: bool = False) -> np.ndarray:
    """Joint state ``a (x) b`` with the second factor varying fastest."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if validate:
        check_density_matrix(a)
        check_density_matrix(b)
    if a.shape[0] * b.shape[0] > MAX_DIM:
        raise ValueError(f"joint dimension {a.shape[0] * b.shape[0]} exceeds {MAX_DIM}")
    return np.kron(a, b)


def _split(rho_ab: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    n, s = dims
    rho_ab = np.asarray(rho_ab, dtype=complex)
    if n < 1 or s < 1 or rho_ab.shape != (n * s, n * s):
        raise ValueError(f"dims {dims} do not factor a matrix of shape {rho_ab.shape}")
    # axes: (a, b, a', b')
    return rho_ab.reshape(n, s, n, s)


def partial_trace_second(rho_ab: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """Trace out the second subsystem, returning the ``n x n`` reduced state."""
    return np.einsum("ajbj->ab", _split(rho_ab, dims))


def partial_trace_first(rho_ab: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """Trace out the first subsystem, returning the ``s x s`` reduced state."""
    return np.einsum("iaib->ab", _split(rho_ab, dims))


@dataclass(frozen=True)
class Projection:
    """Diagonal 0/1 projector onto the basis states in ``observed``."""

    dim: int
    observed: tuple[int, ...]

    def __post_init__(self):
        if any(k < 0 or k >= self.dim for k in self.observed):
            raise ValueError("observed index out of range")

    @property
    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.dim)
        d[list(self.observed)] = 1.0
        return d

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal).astype(complex)

    @classmethod
    def on_second(cls, y: int, dims: tuple[int, int]) -> "Projection":
        """Projector ``I_n (x) |y><y|`` measuring outcome ``y`` on the second subsystem."""
        n, s = dims
        return cls(n * s, tuple(a * s + y for a in range(n)))


def apply_projection(rho: np.ndarray, p: Projection) -> tuple[np.ndarray, float]:
    """Return the unnormalized collapsed state ``P rho P^dagger`` and its trace."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (p.dim, p.dim):
        raise ValueError(f"projection of dim {p.dim} cannot act on shape {rho.shape}")
    d = p.diagonal
    out = d[:, None] * rho * d[None, :]
    prob = float(np.trace(out).real)
    if prob < MIN_PROBABILITY:
        raise ImpossibleObservation("projection has zero probability on this state")
    return out, prob


@dataclass(frozen=True)
class Embeddings:
    """Fixed matrices that tensor with / trace out an ancilla prepared in ``|0><0|``.

    Attributes
    ----------
    W : (n*s, n)
        ``W rho W^dagger == rho (x) |0><0|``.
    V : (s, n, n*s)
        ``V[y]`` traces out the ancilla after it was projected onto ``y``.
    V_trace : (n, s, n*s)
        ``sum_w V_trace[w] rho V_trace[w]^dagger`` traces out the first subsystem.
    """

    n: int
    s: int
    W: np.ndarray
    V: np.ndarray
    V_trace: np.ndarray


def build_embeddings(n: int, s: int) -> Embeddings:
    if n < 1 or s < 1:
        raise ValueError("n and s must be positive")
    W = np.zeros((n * s, n))
    W[np.arange(n) * s, np.arange(n)] = 1.0
    V = np.zeros((s, n, n * s))
    for y in range(s):
        V[y, np.arange(n), np.arange(n) * s + y] = 1.0
    V_trace = np.zeros((n, s, n * s))
    for w in range(n):
        V_trace[w, :, w * s:(w + 1) * s] = np.eye(s)
    return Embeddings(n, s, W, V, V_trace)

"""Two-row complex Givens rotations and factorization of unitaries into them.

The rotation ``H(i, j, theta, phi, psi, delta)`` is the identity except on
rows/columns ``i < j``, where it holds the U(2) block::

    e^{i phi/2} [[ e^{i psi} cos(theta),   e^{i delta} sin(theta)],
                 [-e^{-i delta} sin(theta), e^{-i psi} cos(theta)]]
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class HRotation:
    i: int
    j: int
    theta: float = 0.0
    phi: float = 0.0
    psi: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if not 0 <= self.i < self.j:
            raise ValueError(f"need 0 <= i < j, got i={self.i}, j={self.j}")

    @property
    def angles(self) -> tuple[float, float, float, float]:
        return (self.theta, self.phi, self.psi, self.delta)

    def core(self) -> np.ndarray:
        return rotation_core(self.theta, self.phi, self.psi, self.delta)

    def inverse(self) -> "HRotation":
        # H^dagger has the same form with (theta, phi, psi) negated
        return HRotation(self.i, self.j, -self.theta, -self.phi, -self.psi, self.delta)

    def is_identity(self, tol: float = 1e-15) -> bool:
        return bool(np.max(np.abs(self.core() - np.eye(2))) <= tol)

    def to_dict(self) -> dict:
        return {"i": self.i, "j": self.j, "theta": self.theta, "phi": self.phi, "psi": self.psi, "delta": self.delta}


def rotation_core(theta, phi, psi, delta) -> np.ndarray:
    g = np.exp(0.5j * phi)
    c, s = np.cos(theta), np.sin(theta)
    return g * np.array(
        [[np.exp(1j * psi) * c, np.exp(1j * delta) * s],
         [-np.exp(-1j * delta) * s, np.exp(-1j * psi) * c]]
    )


def h_matrix(rot: HRotation, dim: int) -> np.ndarray:
    if rot.j >= dim:
        raise ValueError(f"rotation rows ({rot.i}, {rot.j}) out of range for dim {dim}")
    H = np.eye(dim, dtype=complex)
    H[np.ix_([rot.i, rot.j], [rot.i, rot.j])] = rot.core()
    return H


def rotate_rows(M: np.ndarray, rot: HRotation) -> np.ndarray:
    """Return ``H @ M`` without forming ``H``; only rows ``i`` and ``j`` change."""
    if rot.j >= M.shape[0]:
        raise IndexError(f"rotation rows ({rot.i}, {rot.j}) out of range for {M.shape[0]} rows")
    out = np.array(M, dtype=complex, copy=True)
    core = rot.core()
    ri, rj = M[rot.i], M[rot.j]
    out[rot.i] = core[0, 0] * ri + core[0, 1] * rj
    out[rot.j] = core[1, 0] * ri + core[1, 1] * rj
    return out


def product(rotations, dim: int) -> np.ndarray:
    """``H(r_0) @ H(r_1) @ ... @ H(r_{m-1})``."""
    U = np.eye(dim, dtype=complex)
    for rot in reversed(rotations):
        U = rotate_rows(U, rot)
    return U


def check_unitary(U, tol: float = UNITARY_TOL) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"unitary must be square, got shape {U.shape}")
    if np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) > tol:
        raise ValueError("matrix is not unitary")
    return U


def _zeroing_rotation(i: int, j: int, a: complex, b: complex) -> HRotation:
    """Rotation on rows ``(i, j)`` sending ``(a, b)`` to ``(sqrt(|a|^2 + |b|^2), 0)``."""
    if a == 0 and b == 0:
        return HRotation(i, j)
    return HRotation(i, j, np.arctan2(abs(b), abs(a)), 0.0, -np.angle(a), -np.angle(b))


def _two_by_two(i: int, j: int, B: np.ndarray) -> HRotation:
    """Exact angles for an arbitrary 2x2 unitary ``B``."""
    phi = float(np.angle(np.linalg.det(B)))
    S = B * np.exp(-0.5j * phi)
    return HRotation(i, j, np.arctan2(abs(S[0, 1]), abs(S[0, 0])), phi, np.angle(S[0, 0]), np.angle(S[0, 1]))


def factor_unitary(U, tol: float = UNITARY_TOL) -> list[HRotation]:
    """Write a unitary as a product of H matrices.

    Column ``k`` is mapped to ``e_k`` by rotations on row pairs ``(k, r)``,
    ``r > k``; the unitary left in the last two rows is a single rotation.
    Rotations equal to the identity are dropped.

    Returns
    -------
    list of HRotation
        ``rots`` with ``U == product(rots, dim)``.
    """
    U = check_unitary(U, tol)
    dim = U.shape[0]
    if dim == 1:
        if abs(U[0, 0] - 1.0) > tol:
            raise ValueError("a 1x1 phase cannot be written with two-row rotations")
        return []
    work = U.copy()
    left = []
    for k in range(dim - 2):
        for r in range(k + 1, dim):
            rot = _zeroing_rotation(k, r, work[k, k], work[r, k])
            work = rotate_rows(work, rot)
            left.append(rot)
    last = _two_by_two(dim - 2, dim - 1, work[dim - 2:, dim - 2:])
    rots = [rot.inverse() for rot in left] + [last]
    return [rot for rot in rots if not rot.is_identity()]

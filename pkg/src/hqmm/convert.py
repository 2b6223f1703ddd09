"""Turn classical HMMs into equivalent HQMMs."""
from __future__ import annotations

import numpy as np

from hqmm.hmm import HmmParams, check_column_stochastic, observable_operators
from hqmm.model import KrausSet
from hqmm.quantum import Projection, build_embeddings

_GS_TOL = 1e-8


def complete_orthonormal(v: np.ndarray) -> np.ndarray:
    """Square orthonormal matrix whose first column is the unit vector ``v``.

    The other columns come from modified Gram-Schmidt over the standard basis
    in order, so the result is deterministic.
    """
    s = v.shape[0]
    basis = [np.asarray(v, dtype=complex) / np.linalg.norm(v)]
    for k in range(s):
        if len(basis) == s:
            break
        u = np.zeros(s, dtype=complex)
        u[k] = 1.0
        for _ in range(2):
            for b in basis:
                u = u - np.vdot(b, u) * b
        norm = np.linalg.norm(u)
        if norm > _GS_TOL:
            basis.append(u / norm)
    return np.column_stack(basis)


def col_stochastic_to_unitary(A) -> np.ndarray:
    """Block-diagonal ``(n*s, n*s)`` unitary whose ``i``-th ``s x s`` block starts with ``sqrt(A[:, i])``."""
    A = check_column_stochastic(A, name="A")
    s, n = A.shape
    U = np.zeros((n * s, n * s), dtype=complex)
    for i in range(n):
        U[i * s:(i + 1) * s, i * s:(i + 1) * s] = complete_orthonormal(np.sqrt(A[:, i]))
    return U


def hmm_to_hqmm_circuit(params: HmmParams) -> KrausSet:
    """Kraus operators read off the two-ancilla circuit.

    The transition unitary gives ``K_w = V_w U1 W`` (tracing out the previous
    state), the emission unitary plus projection gives ``K_y = V_y P_y U2 W``,
    and the model uses the ``n`` branches ``K_y K_w`` for each output ``y``.
    """
    n, s = params.n, params.s
    U1 = col_stochastic_to_unitary(params.A)
    U2 = col_stochastic_to_unitary(params.C)
    trans = build_embeddings(n, n)
    emis = build_embeddings(n, s)
    K_w = [trans.V_trace[w] @ U1 @ trans.W for w in range(n)]
    K_y = [emis.V[y] @ (Projection.on_second(y, (n, s)).diagonal[:, None] * (U2 @ emis.W)) for y in range(s)]
    ops = np.array([[K_y[y] @ K_w[w] for w in range(n)] for y in range(s)])
    return KrausSet(ops)


def hmm_to_hqmm_sqrt(params: HmmParams) -> KrausSet:
    """Kraus branch ``w`` for output ``y`` holds ``sqrt(T_y[:, w])`` in column ``w`` and zeros elsewhere."""
    T = observable_operators(params)
    n, s = params.n, params.s
    ops = np.zeros((s, n, n, n), dtype=complex)
    for w in range(n):
        ops[:, w, :, w] = np.sqrt(T[:, :, w])
    return KrausSet(ops)


def prior_state(params: HmmParams) -> np.ndarray:
    """Density matrix ``diag(prior)`` matching the HMM's initial belief."""
    return np.diag(params.prior).astype(complex)

"""Sparse direct linear algebra for the per-step systems.

All systems are factored with SuperLU (fill-reducing COLAMD ordering),
which is deterministic and comfortably fast at the few-thousand-unknown
scale of these meshes.  The saddle-point builder appends one Lagrange
multiplier row/column that pins the pressure mean to zero exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class SingularMatrixError(RuntimeError):
    """The matrix handed to `factorize` is structurally or numerically singular."""


@dataclass
class LinearSystem:
    """Square sparse system A x = b."""

    A: sp.csr_matrix
    b: np.ndarray

    def __post_init__(self):
        if self.A.shape[0] != self.A.shape[1]:
            raise ValueError(f"matrix is not square: {self.A.shape}")
        if self.A.shape[0] != self.b.shape[0]:
            raise ValueError(f"dimension mismatch: A {self.A.shape}, b {self.b.shape}")


class Factorization:
    """Opaque handle to a sparse LU factorization; reusable for many solves."""

    def __init__(self, lu, shape):
        self._lu = lu
        self.shape = shape

    def solve(self, b: np.ndarray) -> np.ndarray:
        if b.shape[0] != self.shape[0]:
            raise ValueError(f"dimension mismatch: matrix {self.shape}, b {b.shape}")
        return self._lu.solve(b)


def factorize(A: sp.spmatrix) -> Factorization:
    """LU-factor a square sparse matrix; raises SingularMatrixError if singular."""
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix is not square: {A.shape}")
    Acsc = sp.csc_matrix(A)
    try:
        lu = spla.splu(Acsc, permc_spec="COLAMD")
    except RuntimeError as exc:  # SuperLU reports the failing pivot in its message
        raise SingularMatrixError(str(exc)) from exc
    # SuperLU can return a factorization with non-finite entries instead of
    # raising on some exactly singular inputs; probe once.
    probe = lu.solve(np.ones(A.shape[0]))
    if not np.all(np.isfinite(probe)):
        raise SingularMatrixError("factorization produced non-finite solve results")
    return Factorization(lu, A.shape)


def solve(fact: Factorization, b: np.ndarray) -> np.ndarray:
    return fact.solve(np.asarray(b, dtype=float))


def build_saddle_system(
    Auu: sp.spmatrix,
    B: sp.spmatrix,
    f_u: np.ndarray,
    pressure_weights: np.ndarray,
) -> LinearSystem:
    """Assemble the velocity/pressure block system with a zero-mean multiplier.

        [ Auu  B^T  0 ] [u]   [f_u]
        [ B    0    m ] [p] = [0  ]
        [ 0    m^T  0 ] [l]   [0  ]

    where m holds the integrals of the pressure basis functions, so the
    multiplier row enforces a zero pressure mean exactly.  Note the solved
    `p` is the negative of the physical pressure: the momentum form carries
    the pressure with a minus sign while the block uses +B^T.
    """
    n_u = Auu.shape[0]
    n_p = B.shape[0]
    if Auu.shape != (n_u, n_u):
        raise ValueError(f"Auu is not square: {Auu.shape}")
    if B.shape[1] != n_u:
        raise ValueError(f"divergence block has {B.shape[1]} columns, expected {n_u}")
    if f_u.shape[0] != n_u:
        raise ValueError(f"load has length {f_u.shape[0]}, expected {n_u}")
    if pressure_weights.shape[0] != n_p:
        raise ValueError(
            f"pressure weights have length {pressure_weights.shape[0]}, expected {n_p}"
        )
    m = sp.csr_matrix(pressure_weights.reshape(-1, 1))
    A = sp.bmat(
        [
            [Auu, B.T, None],
            [B, None, m],
            [None, m.T, None],
        ],
        format="csr",
    )
    b = np.concatenate([f_u, np.zeros(n_p + 1)])
    return LinearSystem(A, b)


def split_saddle(x: np.ndarray, n_u: int, n_p: int):
    """Split a saddle solution vector into (velocity, pressure, multiplier)."""
    return x[:n_u], x[n_u : n_u + n_p], float(x[n_u + n_p])

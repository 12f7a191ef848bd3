"""Discretized memory term of the projected dynamics.

For a transition operator ``A`` the memory seed ``n`` evolves into the columns

    F_j = e^{j(A - I)} (M(A)^j - I) n,      M(A) = I - 2 (A - I)(A + I)^{-1},

and enters each step through ``(A - I)^{-1} F_j``.  Both matrix functions are
functions of ``A`` and commute, so ``F_j = a_j - b_j`` with ``a_j = (E M) a_{j-1}``,
``b_j = E b_{j-1}``, ``E = e^{A - I}`` and ``a_0 = b_0 = n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParameterError, SingularityError
from .expm import matrix_exponential

# Reciprocal condition numbers below this are treated as singular.
SINGULAR_RCOND = 1e-13


def _inverse(S, what):
    try:
        if 1.0 / np.linalg.cond(S) < SINGULAR_RCOND:
            raise SingularityError(f"{what} is singular")
        return np.linalg.inv(S)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(f"{what} is singular") from exc


def memory_transfer(A) -> np.ndarray:
    """``M(A) = I - 2 (A - I)(A + I)^{-1}``; A must not have eigenvalue -1."""
    A = np.asarray(A, dtype=float)
    I = np.eye(A.shape[0])
    return I - 2.0 * (A - I) @ _inverse(A + I, "A + I (A has eigenvalue -1)")


@dataclass
class MemoryPieces:
    """Intermediates of one memory evaluation, kept for the gradient."""

    P: np.ndarray          # A - I
    S_inv: np.ndarray      # (A + I)^{-1}
    M: np.ndarray          # memory transfer M(A)
    E: np.ndarray          # e^{A - I}
    K: np.ndarray          # E @ M
    a: np.ndarray          # columns a_0 .. a_{m-2}
    b: np.ndarray          # columns b_0 .. b_{m-2}

    @property
    def F(self):
        F = self.a - self.b
        F[:, 0] = 0.0
        return F


def memory_operators(A):
    """``(P, S_inv, M, E, K)`` for a transition operator ``A``."""
    A = np.asarray(A, dtype=float)
    I = np.eye(A.shape[0])
    P = A - I
    S_inv = _inverse(A + I, "A + I (A has eigenvalue -1)")
    M = I - 2.0 * P @ S_inv
    E = matrix_exponential(P)
    return P, S_inv, M, E, E @ M


def memory_pieces(A, n_vec, m: int) -> MemoryPieces:
    n_vec = np.asarray(n_vec, dtype=float)
    if m < 2:
        raise InvalidParameterError(f"m must be >= 2, got {m}")
    P, S_inv, M, E, K = memory_operators(A)
    d = P.shape[0]
    a = np.empty((d, m - 1))
    b = np.empty((d, m - 1))
    a[:, 0] = n_vec
    b[:, 0] = n_vec
    for j in range(1, m - 1):
        a[:, j] = K @ a[:, j - 1]
        b[:, j] = E @ b[:, j - 1]
    return MemoryPieces(P=P, S_inv=S_inv, M=M, E=E, K=K, a=a, b=b)


def memory_columns(A, n_vec, m: int) -> np.ndarray:
    """``F = [0, F_1, ..., F_{m-2}]``, shape ``(d_r, m - 1)``."""
    return memory_pieces(A, n_vec, m).F


def memory_correction(A, n_vec, m: int) -> np.ndarray:
    """``(A - I)^{-1} F``; zero without inverting anything when ``n = 0``."""
    A = np.asarray(A, dtype=float)
    n_vec = np.asarray(n_vec, dtype=float)
    if not np.any(n_vec):
        if m < 2:
            raise InvalidParameterError(f"m must be >= 2, got {m}")
        return np.zeros((A.shape[0], m - 1))
    pieces = memory_pieces(A, n_vec, m)
    P_inv = _inverse(pieces.P, "A - I (A has eigenvalue 1)")
    return P_inv @ pieces.F

"""Memory-corrected least-squares objectives and their exact gradients.

Known control operator:

    J(A) = || Y_plus - A X_minus + dt^2 (A - I)^{-1} F(A, n) ||_F^2

Unknown control operator (inputs ``V_c``):

    J(A, B) = || X_plus - A X_minus + dt^2 (A - I)^{-1} F(A, n) - B V_c ||_F^2

Gradients are hand-written reverse mode through the memory recurrence and
through the exponential via its Frechet derivative.
"""

from __future__ import annotations

import numpy as np

from ..errors import ModeError
from ..snapshots import SnapshotSet, corrected_targets
from .expm import expm_vjp
from .memory import _inverse, memory_pieces


def _residual(A, target, X_minus, n_vec, dt, with_grad):
    """Residual of the memory-corrected fit plus the cache the gradient needs.

    The cache is None when the seed is zero (no memory term) or no gradient
    was requested.
    """
    A = np.asarray(A, dtype=float)
    n_vec = np.asarray(n_vec, dtype=float)
    R = target - A @ X_minus
    if not np.any(n_vec):
        return R, None
    m = X_minus.shape[1] + 1
    pc = memory_pieces(A, n_vec, m)
    P_inv = _inverse(pc.P, "A - I (A has eigenvalue 1)")
    Mt = P_inv @ pc.F
    R = R + dt * dt * Mt
    if not with_grad:
        return R, None
    return R, (pc, P_inv, Mt)


def _memory_grad(cache, G_R, dt):
    """Pull ``G_R = dJ/dR`` back through ``dt^2 (A - I)^{-1} F(A, n)``."""
    pc, P_inv, Mt = cache
    G_Mt = (dt * dt) * G_R
    # Mt = P^{-1} F
    G_A = -P_inv.T @ G_Mt @ Mt.T
    G_F = P_inv.T @ G_Mt
    G_F[:, 0] = 0.0
    # a_j = K a_{j-1}, b_j = E b_{j-1}; adjoints run backwards in j
    cols = G_F.shape[1]
    ga = np.zeros_like(G_F)
    gb = np.zeros_like(G_F)
    ga_next = np.zeros(G_F.shape[0])
    gb_next = np.zeros(G_F.shape[0])
    KT, ET = pc.K.T, pc.E.T
    for j in range(cols - 1, 0, -1):
        ga_next = G_F[:, j] + KT @ ga_next
        gb_next = -G_F[:, j] + ET @ gb_next
        ga[:, j] = ga_next
        gb[:, j] = gb_next
    G_K = ga[:, 1:] @ pc.a[:, :-1].T
    G_E = gb[:, 1:] @ pc.b[:, :-1].T
    # K = E M
    G_E = G_E + G_K @ pc.M.T
    G_M = pc.E.T @ G_K
    # M = I - 2 P S^{-1}, S = A + I
    PS = pc.P @ pc.S_inv
    G_A += -2.0 * G_M @ pc.S_inv.T + 2.0 * PS.T @ G_M @ pc.S_inv.T
    # E = expm(P)
    G_A += expm_vjp(pc.P, G_E)
    return G_A


def objective_known_b(A, s: SnapshotSet, n_vec) -> float:
    if s.W is None:
        raise ModeError("the known-B objective needs projected control snapshots W")
    R, _ = _residual(A, corrected_targets(s), s.X_minus, n_vec, s.dt, False)
    return float(np.sum(R * R))


def gradient_known_b(A, s: SnapshotSet, n_vec) -> np.ndarray:
    return value_and_grad_known_b(A, s, n_vec)[1]


def value_and_grad_known_b(A, s: SnapshotSet, n_vec):
    if s.W is None:
        raise ModeError("the known-B objective needs projected control snapshots W")
    R, cache = _residual(A, corrected_targets(s), s.X_minus, n_vec, s.dt, True)
    G_R = 2.0 * R
    G_A = -G_R @ s.X_minus.T
    if cache is not None:
        G_A += _memory_grad(cache, G_R, s.dt)
    return float(np.sum(R * R)), G_A


def objective_unknown_b(A, B, s: SnapshotSet, n_vec) -> float:
    if s.V_c is None:
        raise ModeError("the unknown-B objective needs input snapshots V_c")
    R, _ = _residual(A, s.X_plus, s.X_minus, n_vec, s.dt, False)
    R = R - np.asarray(B, dtype=float) @ s.V_c
    return float(np.sum(R * R))


def gradient_unknown_b(A, B, s: SnapshotSet, n_vec):
    _, G_A, G_B = value_and_grad_unknown_b(A, B, s, n_vec)
    return G_A, G_B


def value_and_grad_unknown_b(A, B, s: SnapshotSet, n_vec):
    if s.V_c is None:
        raise ModeError("the unknown-B objective needs input snapshots V_c")
    R, cache = _residual(A, s.X_plus, s.X_minus, n_vec, s.dt, True)
    R = R - np.asarray(B, dtype=float) @ s.V_c
    G_R = 2.0 * R
    G_A = -G_R @ s.X_minus.T
    G_B = -G_R @ s.V_c.T
    if cache is not None:
        G_A += _memory_grad(cache, G_R, s.dt)
    return float(np.sum(R * R)), G_A, G_B

"""Closed-form DMD / DMDc operators and linear rollouts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import ModeError, ShapeError
from .snapshots import SnapshotSet, corrected_targets

RCOND = 1e-12


@dataclass
class LinearModel:
    A: np.ndarray
    B: Optional[np.ndarray] = None
    dt: float = 0.1

    def __post_init__(self):
        if self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise ShapeError(f"A must be square, got shape {self.A.shape}")
        if self.B is not None and self.B.shape[0] != self.A.shape[0]:
            raise ShapeError(f"B must have {self.A.shape[0]} rows, got shape {self.B.shape}")


def pinv(M: np.ndarray, rcond: float = RCOND) -> np.ndarray:
    """SVD pseudoinverse, dropping singular values below ``rcond * s_max``."""
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((M.shape[1], M.shape[0]))
    keep = s > rcond * s[0]
    return (Vt[keep].T / s[keep]) @ U[:, keep].T


def least_squares(target, regressor) -> np.ndarray:
    """Minimum-norm ``M`` minimizing ``||target - M @ regressor||_F``."""
    target = np.asarray(target, dtype=float)
    regressor = np.asarray(regressor, dtype=float)
    if target.size == 0 or regressor.size == 0:
        raise ShapeError("least_squares needs non-empty matrices")
    if target.shape[1] != regressor.shape[1]:
        raise ShapeError(
            f"target has {target.shape[1]} columns, regressor {regressor.shape[1]}"
        )
    return target @ pinv(regressor)


def dmd_fit(X_minus, X_plus, dt: float = 0.1) -> LinearModel:
    return LinearModel(A=least_squares(X_plus, X_minus), dt=dt)


def dmdc_fit_known_b(s: SnapshotSet) -> LinearModel:
    if s.W is None:
        raise ModeError("known-B DMDc needs projected control snapshots W")
    return LinearModel(A=least_squares(corrected_targets(s), s.X_minus), dt=s.dt)


def dmdc_fit_unknown_b(s: SnapshotSet) -> LinearModel:
    if s.V_c is None:
        raise ModeError("unknown-B DMDc needs input snapshots V_c")
    d_r = s.d_r
    AB = least_squares(s.X_plus, np.vstack([s.X_minus, s.V_c]))
    return LinearModel(A=AB[:, :d_r], B=AB[:, d_r:], dt=s.dt)


# Controls for a rollout: a (q, >= m-1) matrix of precomputed columns, or a
# feedback callable ``policy(x, k) -> column`` evaluated on the generated state.
Controls = Union[np.ndarray, Callable[[np.ndarray, int], np.ndarray], None]


def control_term(model, controls: Controls, x, k: int):
    """Additive control contribution at step ``k`` (``w dt`` or ``B v``)."""
    if controls is None:
        return 0.0
    u = controls(x, k) if callable(controls) else controls[:, k]
    if u.ndim == 1 and x.ndim == 2:
        u = u[:, None]
    elif u.ndim == 2 and x.ndim == 2 and u.shape[1] != x.shape[1]:
        u = np.broadcast_to(u, (u.shape[0], x.shape[1]))
    if model.B is not None:
        return model.B @ u
    return u * model.dt


def _check_controls(model, controls: Controls, m: int):
    if controls is None or callable(controls):
        return
    q = model.B.shape[1] if model.B is not None else model.A.shape[0]
    if controls.ndim != 2 or controls.shape[0] != q or controls.shape[1] < m - 1:
        raise ShapeError(f"controls must be ({q}, >= {m - 1}), got shape {controls.shape}")


def linear_rollout(model: LinearModel, x0, controls: Controls, m: int) -> np.ndarray:
    """``x_{k+1} = A x_k + w_k dt`` (known B) or ``A x_k + B v_k`` (unknown B)."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.A.shape[0],):
        raise ShapeError(f"x0 must have length {model.A.shape[0]}")
    if controls is not None and not callable(controls):
        controls = np.asarray(controls, dtype=float)
    _check_controls(model, controls, m)
    out = np.empty((x0.size, m))
    out[:, 0] = x0
    for k in range(m - 1):
        out[:, k + 1] = model.A @ out[:, k] + control_term(model, controls, out[:, k], k)
    return out


def residual_norm2(target, M, regressor) -> float:
    R = target - M @ regressor
    return float(np.sum(R * R))

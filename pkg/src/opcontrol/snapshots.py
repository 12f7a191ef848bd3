"""Stacked snapshot matrices built from one measured trajectory.

Columns use forward time order everywhere: column ``j`` of ``X_minus`` is the
resolved state at ``t_j`` and column ``j`` of ``X_plus`` the state at
``t_{j+1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import ControlLaw, Trajectory, TrajectoryGrid
from .errors import ModeError, ShapeError


@dataclass
class SnapshotSet:
    dt: float
    X_minus: np.ndarray
    X_plus: np.ndarray
    W: Optional[np.ndarray] = None
    V_c: Optional[np.ndarray] = None

    def __post_init__(self):
        if (self.W is None) == (self.V_c is None):
            raise ModeError("exactly one of W (known B) or V_c (unknown B) must be given")
        cols = {self.X_minus.shape[1], self.X_plus.shape[1]}
        cols.add((self.W if self.W is not None else self.V_c).shape[1])
        if len(cols) != 1:
            raise ShapeError(f"snapshot matrices disagree on column count: {sorted(cols)}")
        if self.X_minus.shape != self.X_plus.shape:
            raise ShapeError("X_minus and X_plus must have the same shape")
        if self.W is not None and self.W.shape[0] != self.X_minus.shape[0]:
            raise ShapeError("W must have one row per resolved variable")

    @property
    def mode(self) -> str:
        return "known_b" if self.W is not None else "unknown_b"

    @property
    def d_r(self) -> int:
        return self.X_minus.shape[0]

    @property
    def m(self) -> int:
        """Number of trajectory samples the set was built from."""
        return self.X_minus.shape[1] + 1


def extract_resolved(traj: Trajectory, d_r: int) -> np.ndarray:
    if d_r > traj.states.shape[0]:
        raise ShapeError(f"d_r={d_r} exceeds state dimension {traj.states.shape[0]}")
    return traj.states[:d_r].copy()


def _pairs(resolved):
    resolved = np.asarray(resolved, dtype=float)
    if resolved.ndim != 2 or resolved.shape[1] < 2:
        raise ShapeError(f"need a (d_r, m) matrix with m >= 2, got shape {resolved.shape}")
    return resolved[:, :-1].copy(), resolved[:, 1:].copy()


def build_known_b(resolved, ctrl: ControlLaw, traj: Trajectory, grid: TrajectoryGrid) -> SnapshotSet:
    """Snapshots with projected control vectors ``w_k`` taken along ``traj``."""
    resolved = np.asarray(resolved, dtype=float)
    if resolved.shape[1] != traj.states.shape[1] or resolved.shape[1] != grid.steps:
        raise ShapeError(
            f"resolved has {resolved.shape[1]} columns, trajectory {traj.states.shape[1]},"
            f" grid {grid.steps}"
        )
    X_minus, X_plus = _pairs(resolved)
    d_r = resolved.shape[0]
    g = ctrl(traj.states[:, :-1], 0.0)
    W = np.asarray(g, dtype=float)[:d_r]
    return SnapshotSet(dt=grid.dt, X_minus=X_minus, X_plus=X_plus, W=W)


def build_unknown_b(resolved, inputs, dt: float) -> SnapshotSet:
    """Snapshots with raw input vectors; the control operator is fitted later."""
    resolved = np.asarray(resolved, dtype=float)
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2 or inputs.shape[1] != resolved.shape[1]:
        raise ShapeError(
            f"inputs must have {resolved.shape[1]} columns, got shape {inputs.shape}"
        )
    X_minus, X_plus = _pairs(resolved)
    return SnapshotSet(dt=dt, X_minus=X_minus, X_plus=X_plus, V_c=inputs[:, :-1].copy())


def corrected_targets(s: SnapshotSet) -> np.ndarray:
    """``Y_plus = X_plus - W * dt``."""
    if s.W is None:
        raise ModeError("corrected targets need projected control snapshots W")
    return s.X_plus - s.W * s.dt

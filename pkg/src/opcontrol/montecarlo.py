"""Brute-force Monte Carlo estimate of the averaged resolved trajectory."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import ControlLaw, InitDistribution, SystemSpec, TrajectoryGrid, integrate_many
from .errors import IntegrationError, InvalidParameterError, ShapeError

# Stream identifiers for SeedSequence spawn keys.  Every random quantity in the
# package is drawn from its own (master seed, stream, index) generator.
STREAM_MEASUREMENT = 0
STREAM_MC_MEMBER = 1
STREAM_MEMORY_FIT = 2
STREAM_MEMORY_GEN = 3


def derived_rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Counter-based generator: independent of how many others were created."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(stream, index)))


@dataclass
class EnsembleAverage:
    mean: np.ndarray
    count: int
    master_seed: int
    grid: TrajectoryGrid
    source: str = "MC"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.count < 1:
            raise InvalidParameterError("an ensemble needs at least one member")
        if not np.all(np.isfinite(self.mean)):
            raise InvalidParameterError("ensemble mean contains non-finite entries")

    @property
    def times(self):
        return self.grid.times


def member_inits(sys: SystemSpec, init: InitDistribution, K: int, seed: int) -> np.ndarray:
    return np.stack(
        [init.draw(sys.d_total, derived_rng(seed, STREAM_MC_MEMBER, i)) for i in range(K)], axis=1
    )


def mc_projection(
    sys: SystemSpec,
    ctrl: ControlLaw | None,
    init: InitDistribution,
    grid: TrajectoryGrid,
    K: int = 100,
    seed: int = 0,
    batch: int = 100,
) -> EnsembleAverage:
    """Average ``K`` trajectories started from ``(x0, y_random)``.

    Member ``i`` draws its unresolved start from ``derived_rng(seed, 1, i)``.
    Members are integrated in batches of ``batch`` columns and summed in member
    order.
    """
    if K < 1:
        raise InvalidParameterError(f"K must be >= 1, got {K}")
    inits = member_inits(sys, init, K, seed)
    d_r = sys.d_resolved
    total = np.zeros((d_r, grid.steps))
    for start in range(0, K, batch):
        try:
            states = integrate_many(sys, ctrl, inits[:, start:start + batch], grid)
        except IntegrationError as exc:
            member = start + (exc.member or 0)
            raise IntegrationError(f"ensemble member {member} failed: {exc}", t=exc.t, member=member) from exc
        for j in range(states.shape[2]):
            total += states[:d_r, :, j]
    return EnsembleAverage(mean=total / K, count=K, master_seed=seed, grid=grid, source="MC")


def resample_check(avg1: EnsembleAverage, avg2: EnsembleAverage) -> float:
    """Max-abs difference of two ensemble means on the same grid."""
    if avg1.mean.shape != avg2.mean.shape or avg1.grid.steps != avg2.grid.steps:
        raise ShapeError(f"cannot compare means of shape {avg1.mean.shape} and {avg2.mean.shape}")
    return float(np.max(np.abs(avg1.mean - avg2.mean)))

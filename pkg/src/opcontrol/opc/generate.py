"""Averaged resolved trajectories from a fitted operator.

Each memory seed ``n`` gives the rollout

    x_{k+1} = A x_k - dt^2 (A - I)^{-1} F_k(A, n) + control_k

with ``control_k = w_k dt`` (known B) or ``B v_k`` (unknown B).  The memory
correction is linear in ``n``, so the per-step correction matrices
``C_k = -dt^2 (A - I)^{-1} (K^k - E^k)`` are formed once; each step applies
``C_k`` to the whole block of draws.
"""

from __future__ import annotations

import numpy as np

from ..baselines import Controls, _check_controls, control_term
from ..dynamics import TrajectoryGrid
from ..errors import InvalidParameterError, ShapeError
from ..montecarlo import STREAM_MEMORY_GEN, EnsembleAverage, derived_rng
from .memory import _inverse, memory_operators
from .fit import OpcModel


def correction_operators(A, dt: float, m: int) -> np.ndarray:
    """Stack of ``C_k`` for ``k = 0 .. m-2``, shape ``(m-1, d, d)``."""
    d = A.shape[0]
    P, _, _, E, K = memory_operators(A)
    P_inv = _inverse(P, "A - I (A has eigenvalue 1)")
    C = np.empty((m - 1, d, d))
    Kp = np.eye(d)
    Ep = np.eye(d)
    for k in range(m - 1):
        C[k] = Kp - Ep
        Kp = K @ Kp
        Ep = E @ Ep
    return (-(dt * dt) * P_inv) @ C


def memory_draws(model: OpcModel, count: int | None = None) -> np.ndarray:
    """Generation seeds, shape ``(d_r, count)``."""
    cfg = model.seed_cfg
    count = cfg.n_gen_count if count is None else count
    d = model.A.shape[0]
    return cfg.sigma_n * derived_rng(cfg.seed, STREAM_MEMORY_GEN).standard_normal((d, count)) + 0.0


def generate_averaged(
    model: OpcModel,
    x0,
    controls: Controls,
    m: int,
    analytic: bool = False,
    return_members: bool = False,
):
    """Mean of the memory-corrected rollouts over ``n_gen_count`` seed draws.

    With ``analytic=True`` the draws are replaced by their mean (zero), which
    is exact in expectation because the rollout is linear in the seed.
    ``controls`` is a column matrix or a feedback policy ``policy(x, k)``;
    a policy receives the ``(d_r, N)`` block of all draws at step ``k``.
    """
    if m < 2:
        raise InvalidParameterError(f"m must be >= 2, got {m}")
    A = model.A
    d = A.shape[0]
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (d,):
        raise ShapeError(f"x0 must have length {d}")
    if controls is not None and not callable(controls):
        controls = np.asarray(controls, dtype=float)
    _check_controls(model, controls, m)

    seeds = np.zeros((d, 1)) if analytic else memory_draws(model)
    N = seeds.shape[1]
    C = correction_operators(A, model.dt, m) if np.any(seeds) else None
    x = np.empty((m, d, N))
    x[0] = x0[:, None]
    for k in range(m - 1):
        nxt = x[k + 1]
        np.matmul(A, x[k], out=nxt)
        if controls is not None:
            nxt += control_term(model, controls, x[k], k)
        if C is not None:
            nxt += C[k] @ seeds
    mean = x.mean(axis=2).T
    avg = EnsembleAverage(
        mean=mean,
        count=N,
        master_seed=model.seed_cfg.seed,
        grid=TrajectoryGrid(dt=model.dt, steps=m),
        source="OPC",
        meta={"analytic": analytic, "sigma_n": model.seed_cfg.sigma_n},
    )
    if return_members:
        return avg, np.transpose(x, (1, 0, 2))
    return avg

"""End-to-end experiment pipeline shared by the CLI and the benchmarks.

measure one realization -> build snapshots -> fit DMDc and OPc -> roll both
out -> compare against the Monte Carlo mean.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .baselines import LinearModel, dmdc_fit_known_b, dmdc_fit_unknown_b, linear_rollout
from .config import ExperimentConfig
from .dynamics import LinearState, Trajectory, integrate
from .montecarlo import STREAM_MEASUREMENT, EnsembleAverage, derived_rng, mc_projection
from .opc import FitReport, MemorySeedConfig, OpcModel, OptimizerConfig, fit_known_b, fit_unknown_b
from .opc import generate_averaged
from .snapshots import SnapshotSet, build_known_b, build_unknown_b, extract_resolved


def measure(cfg: ExperimentConfig) -> Trajectory:
    """The single measured realization the operators are fitted to."""
    sys = cfg.system_spec()
    y0 = cfg.init_distribution().draw(sys.d_total, derived_rng(cfg.measure_seed, STREAM_MEASUREMENT))
    return integrate(sys, cfg.control_law(), y0, cfg.grid())


def monte_carlo(cfg: ExperimentConfig, K: Optional[int] = None) -> EnsembleAverage:
    return mc_projection(cfg.system_spec(), cfg.control_law(), cfg.init_distribution(),
                         cfg.grid(), K=cfg.mc_K if K is None else K, seed=cfg.mc_seed)


def snapshots(cfg: ExperimentConfig, traj: Trajectory) -> SnapshotSet:
    sys = cfg.system_spec()
    resolved = extract_resolved(traj, sys.d_resolved)
    ctrl = cfg.control_law()
    if cfg.mode == "known_b":
        return build_known_b(resolved, ctrl, traj, traj.grid)
    return build_unknown_b(resolved, ctrl.inputs(traj.states), traj.grid.dt)


def feedback_policy(cfg: ExperimentConfig):
    """Control columns for rollouts of the resolved mean.

    The unresolved coordinates enter as zero, their ensemble mean under the
    symmetric initial distribution.  Known B returns ``w`` (the resolved block
    of ``g``); unknown B returns the raw inputs ``v``.
    """
    sys = cfg.system_spec()
    ctrl = cfg.control_law()
    d_r, d = sys.d_resolved, sys.d_total

    buffers = {}

    def pad(x):
        full = buffers.get(x.shape)
        if full is None:
            full = buffers[x.shape] = np.zeros((d,) + x.shape[1:])
        full[:d_r] = x
        return full

    if cfg.mode == "known_b":
        def policy(x, k):
            return ctrl(pad(x), k * cfg.dt)[:d_r]
    else:
        assert isinstance(ctrl, LinearState)

        def policy(x, k):
            return ctrl.inputs(pad(x))
    return policy


def fit_models(cfg: ExperimentConfig, s: SnapshotSet):
    """Closed-form DMDc baseline and the memory-corrected fit."""
    seed_cfg = MemorySeedConfig.drawn(s.d_r, sigma_n=cfg.memory_sigma(), seed=cfg.opc_seed,
                                      n_gen_count=cfg.n_gen_count)
    opt = OptimizerConfig(iterations=cfg.iterations, learning_rate=cfg.lr)
    if cfg.mode == "known_b":
        dmdc = dmdc_fit_known_b(s)
        model, report = fit_known_b(s, seed_cfg, opt)
    else:
        dmdc = dmdc_fit_unknown_b(s)
        model, report = fit_unknown_b(s, seed_cfg, opt)
    return dmdc, model, report


def opc_average(cfg: ExperimentConfig, model: OpcModel) -> EnsembleAverage:
    return generate_averaged(model, np.asarray(cfg.x0, dtype=float), feedback_policy(cfg),
                             cfg.steps, analytic=cfg.analytic)


def dmdc_rollout(cfg: ExperimentConfig, dmdc: LinearModel) -> np.ndarray:
    return linear_rollout(dmdc, np.asarray(cfg.x0, dtype=float), feedback_policy(cfg), cfg.steps)


def rmse(a, b) -> np.ndarray:
    """Per-coordinate root-mean-square difference over time."""
    return np.sqrt(np.mean((np.asarray(a) - np.asarray(b)) ** 2, axis=1))


def envelope_ratio(x, times, late=(35.0, 50.0), early=(0.0, 5.0)) -> float:
    """``max |x| on the late window / max |x| on the early window`` (1-D ``x``)."""
    x = np.abs(np.asarray(x))
    lo = (times >= late[0]) & (times <= late[1] + 1e-9)
    hi = (times >= early[0]) & (times <= early[1] + 1e-9)
    return float(x[lo].max() / x[hi].max())


@dataclass
class ExperimentResult:
    cfg: ExperimentConfig
    measured: Trajectory
    mc: EnsembleAverage
    dmdc: LinearModel
    model: OpcModel
    report: FitReport
    opc: EnsembleAverage
    dmdc_traj: np.ndarray
    timings: dict = field(default_factory=dict)

    @property
    def times(self):
        return self.mc.times

    @property
    def rmse_opc(self):
        return rmse(self.opc.mean, self.mc.mean)

    @property
    def rmse_dmdc(self):
        return rmse(self.dmdc_traj, self.mc.mean)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    timings = {}
    t0 = time.perf_counter()
    measured = measure(cfg)
    s = snapshots(cfg, measured)
    t1 = time.perf_counter()
    mc = monte_carlo(cfg)
    t2 = time.perf_counter()
    dmdc, model, report = fit_models(cfg, s)
    t3 = time.perf_counter()
    opc = opc_average(cfg, model)
    t4 = time.perf_counter()
    timings.update(measure=t1 - t0, mc=t2 - t1, fit=t3 - t2, generate=t4 - t3)
    return ExperimentResult(cfg, measured, mc, dmdc, model, report, opc,
                            dmdc_rollout(cfg, dmdc), timings)

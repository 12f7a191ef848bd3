"""Adam fitting of the memory-corrected transition operator."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..baselines import dmdc_fit_known_b, dmdc_fit_unknown_b
from ..errors import InvalidParameterError, ModeError, NumericalError, SingularityError
from ..montecarlo import STREAM_MEMORY_FIT, derived_rng
from ..snapshots import SnapshotSet
from .objective import value_and_grad_known_b, value_and_grad_unknown_b


@dataclass
class MemorySeedConfig:
    """How memory seeds are chosen.

    ``n_fit`` is the single seed held fixed while fitting; generation draws
    ``n_gen_count`` seeds from ``N(0, sigma_n^2 I)``.
    """

    sigma_n: float = 1.0
    n_fit: Optional[np.ndarray] = None
    n_gen_count: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.sigma_n < 0:
            raise InvalidParameterError("sigma_n must be non-negative")
        if self.n_gen_count < 1:
            raise InvalidParameterError("n_gen_count must be >= 1")
        if self.n_fit is not None:
            self.n_fit = np.asarray(self.n_fit, dtype=float)

    @classmethod
    def drawn(cls, d_r: int, sigma_n: float = 1.0, seed: int = 0, n_gen_count: int = 1000):
        """Config whose fitting seed is one draw from the generation distribution."""
        n_fit = sigma_n * derived_rng(seed, STREAM_MEMORY_FIT).standard_normal(d_r)
        return cls(sigma_n=sigma_n, n_fit=n_fit, n_gen_count=n_gen_count, seed=seed)

    def fit_seed(self, d_r: int) -> np.ndarray:
        if self.n_fit is None:
            return np.zeros(d_r)
        if self.n_fit.shape != (d_r,):
            raise InvalidParameterError(f"n_fit must have length {d_r}")
        return self.n_fit


@dataclass
class OptimizerConfig:
    iterations: int = 150
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    warm_start: bool = True

    def __post_init__(self):
        if self.iterations < 1:
            raise InvalidParameterError("iterations must be >= 1")
        if not self.learning_rate > 0:
            raise InvalidParameterError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise InvalidParameterError("Adam betas must lie in [0, 1)")


@dataclass
class OpcModel:
    A: np.ndarray
    dt: float
    seed_cfg: MemorySeedConfig = field(default_factory=MemorySeedConfig)
    B: Optional[np.ndarray] = None

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        if self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise InvalidParameterError(f"A must be square, got {self.A.shape}")
        if not self.dt > 0:
            raise InvalidParameterError("dt must be positive")
        if self.B is not None:
            self.B = np.asarray(self.B, dtype=float)

    @property
    def mode(self):
        return "known_b" if self.B is None else "unknown_b"


@dataclass
class FitReport:
    final_objective: float
    history: list
    wall_time: float
    spectrum: list


class Adam:
    """Adam over a dict of arrays; updates them in place."""

    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {}
        self.v = {}
        self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for k, g in grads.items():
            if k not in self.m:
                self.m[k] = np.zeros_like(g)
                self.v[k] = np.zeros_like(g)
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * (g * g)
            params[k] -= self.lr * (self.m[k] / bc1) / (np.sqrt(self.v[k] / bc2) + self.eps)


def spectrum(A) -> list:
    """Eigenvalues of ``A`` sorted by decreasing modulus."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidParameterError(f"spectrum needs a square matrix, got {A.shape}")
    try:
        ev = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue solver failed: {exc}") from exc
    order = np.lexsort((-ev.imag, -np.abs(ev)))
    return [complex(z) for z in ev[order]]


def _run_adam(params, value_and_grad, opt: OptimizerConfig):
    adam = Adam(opt.learning_rate, opt.beta1, opt.beta2, opt.eps_adam)
    history = []
    t0 = time.perf_counter()
    for it in range(opt.iterations + 1):
        try:
            J, grads = value_and_grad(params)
        except SingularityError as exc:
            raise SingularityError(f"iteration {it}: {exc}", iteration=it) from exc
        history.append(J)
        if it == opt.iterations:
            break
        adam.step(params, grads)
    return history, time.perf_counter() - t0


def fit_known_b(
    s: SnapshotSet,
    seed_cfg: MemorySeedConfig,
    opt: OptimizerConfig,
    A_init=None,
):
    """Minimize the known-B objective over ``A`` with the seed held fixed.

    ``A`` starts at ``A_init`` when given, else at the DMDc solution
    (``warm_start``) or at zero.
    """
    if s.W is None:
        raise ModeError("fit_known_b needs projected control snapshots W")
    n_vec = seed_cfg.fit_seed(s.d_r)
    if A_init is not None:
        A0 = np.array(A_init, dtype=float)
    elif opt.warm_start:
        A0 = dmdc_fit_known_b(s).A
    else:
        A0 = np.zeros((s.d_r, s.d_r))
    params = {"A": A0}

    def vg(p):
        J, G = value_and_grad_known_b(p["A"], s, n_vec)
        return J, {"A": G}

    history, wall = _run_adam(params, vg, opt)
    model = OpcModel(A=params["A"], dt=s.dt, seed_cfg=seed_cfg)
    return model, FitReport(history[-1], history, wall, spectrum(model.A))


def fit_unknown_b(
    s: SnapshotSet,
    seed_cfg: MemorySeedConfig,
    opt: OptimizerConfig,
    A_init=None,
    B_init=None,
):
    """Joint Adam over ``(A, B)``; both start at the unknown-B DMDc solution."""
    if s.V_c is None:
        raise ModeError("fit_unknown_b needs input snapshots V_c")
    n_vec = seed_cfg.fit_seed(s.d_r)
    if opt.warm_start:
        base = dmdc_fit_unknown_b(s)
        A0, B0 = base.A, base.B
    else:
        A0 = np.zeros((s.d_r, s.d_r))
        B0 = np.zeros((s.d_r, s.V_c.shape[0]))
    if A_init is not None:
        A0 = np.array(A_init, dtype=float)
    if B_init is not None:
        B0 = np.array(B_init, dtype=float)
    params = {"A": A0.copy(), "B": B0.copy()}

    def vg(p):
        J, GA, GB = value_and_grad_unknown_b(p["A"], p["B"], s, n_vec)
        return J, {"A": GA, "B": GB}

    history, wall = _run_adam(params, vg, opt)
    model = OpcModel(A=params["A"], B=params["B"], dt=s.dt, seed_cfg=seed_cfg)
    return model, FitReport(history[-1], history, wall, spectrum(model.A))

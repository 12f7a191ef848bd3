"""Controlled test systems and a fixed-step RK4 integrator.

States are column vectors of length ``d_total`` with the resolved coordinates
first.  Every drift and control law also accepts a ``(d_total, K)`` array and
acts column-wise, which lets ensembles be stepped as one batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import IntegrationError, InvalidParameterError, ShapeError

__all__ = [
    "SystemSpec",
    "Constant",
    "Damped",
    "LinearState",
    "ControlLaw",
    "InitDistribution",
    "TrajectoryGrid",
    "Trajectory",
    "rk4_step",
    "integrate",
    "integrate_many",
    "evaluate_control",
    "test_problem_1",
    "test_problem_2",
    "coupled_oscillator_energy",
    "B1",
    "B2",
    "CONSTANT_C",
]

Field = Callable[[np.ndarray, float], np.ndarray]

# Control matrices of the unknown-operator experiments.
B1 = np.diag([-1e-2, -1e-2, -1e-2, -5e-2])
B2 = np.array([[-0.1, 1.0], [-1.0, 0.0], [-1.0, 0.1], [-0.1, -0.1]])
CONSTANT_C = np.array([0.1, 0.1, -0.01, 0.01])


@dataclass(frozen=True)
class SystemSpec:
    d_total: int
    d_resolved: int
    drift: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    def __post_init__(self):
        if not 1 <= self.d_resolved <= self.d_total:
            raise InvalidParameterError(
                f"need 1 <= d_resolved <= d_total, got {self.d_resolved}, {self.d_total}"
            )


@dataclass(frozen=True)
class Constant:
    c: np.ndarray

    def __call__(self, state, t=0.0):
        c = np.asarray(self.c, dtype=float)
        if state.ndim == 2:
            return np.broadcast_to(c[:, None], state.shape).copy()
        return c.copy()


@dataclass(frozen=True)
class Damped:
    k: float

    def __call__(self, state, t=0.0):
        return -self.k * state


@dataclass(frozen=True)
class LinearState:
    """``g = G @ state[selector]``."""

    G: np.ndarray
    selector: tuple

    def __call__(self, state, t=0.0):
        G = np.asarray(self.G, dtype=float)
        sel = list(self.selector)
        if G.shape[1] != len(sel):
            raise InvalidParameterError(
                f"G has {G.shape[1]} columns but selector picks {len(sel)} components"
            )
        if any(i < 0 or i >= state.shape[0] for i in sel):
            raise InvalidParameterError(
                f"selector {self.selector} out of range for state of length {state.shape[0]}"
            )
        return G @ state[sel]

    @property
    def input_dim(self):
        return len(self.selector)

    def inputs(self, state):
        """Raw input vector(s) ``v = state[selector]``."""
        return state[list(self.selector)]


ControlLaw = Union[Constant, Damped, LinearState]


def evaluate_control(ctrl: ControlLaw, state, t: float = 0.0) -> np.ndarray:
    return ctrl(np.asarray(state, dtype=float), t)


@dataclass(frozen=True)
class InitDistribution:
    """Deterministic resolved start plus zero-mean Gaussian unresolved part."""

    x0: np.ndarray
    sigma: Union[float, np.ndarray] = 1.0

    def __post_init__(self):
        if np.any(np.asarray(self.sigma) < 0):
            raise InvalidParameterError("sigma must be non-negative")

    def draw(self, d_total: int, rng: np.random.Generator) -> np.ndarray:
        x0 = np.asarray(self.x0, dtype=float)
        d_u = d_total - x0.size
        sigma = np.broadcast_to(np.asarray(self.sigma, dtype=float), (d_u,))
        # + 0.0 turns the -0.0 of a zero sigma times a negative draw into 0.0
        return np.concatenate([x0, sigma * rng.standard_normal(d_u) + 0.0])


@dataclass(frozen=True)
class TrajectoryGrid:
    """Uniform sample grid ``t_k = k * dt``.

    ``substeps`` RK4 steps of size ``dt / substeps`` are taken between samples;
    the default of 1 means one RK4 step per sample.
    """

    dt: float = 0.1
    steps: int = 500
    substeps: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidParameterError(f"dt must be positive, got {self.dt}")
        if self.steps < 2:
            raise InvalidParameterError(f"steps must be >= 2, got {self.steps}")
        if self.substeps < 1:
            raise InvalidParameterError(f"substeps must be >= 1, got {self.substeps}")

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps) * self.dt


@dataclass
class Trajectory:
    states: np.ndarray
    grid: TrajectoryGrid = field(default_factory=TrajectoryGrid)

    def __post_init__(self):
        if self.states.shape[1] != self.grid.steps:
            raise ShapeError(
                f"{self.states.shape[1]} columns for a grid of {self.grid.steps} steps"
            )

    @property
    def times(self):
        return self.grid.times


def rk4_step(f: Field, state, t: float, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of ``y' = f(y, t)``."""
    if not dt > 0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    y = np.asarray(state, dtype=float)
    k1 = f(y, t)
    _check_finite(k1, t)
    k2 = f(y + 0.5 * dt * k1, t + 0.5 * dt)
    _check_finite(k2, t)
    k3 = f(y + 0.5 * dt * k2, t + 0.5 * dt)
    _check_finite(k3, t)
    k4 = f(y + dt * k3, t + dt)
    _check_finite(k4, t)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_finite(v, t):
    if not np.all(np.isfinite(v)):
        raise IntegrationError(f"non-finite stage value at t={t:g}", t=t)


def controlled_field(sys: SystemSpec, ctrl: ControlLaw | None) -> Field:
    if ctrl is None:
        return lambda y, t: sys.drift(y)
    return lambda y, t: sys.drift(y) + ctrl(y, t)


def integrate_many(sys: SystemSpec, ctrl: ControlLaw | None, inits, grid: TrajectoryGrid) -> np.ndarray:
    """Integrate every column of ``inits`` (shape ``(d_total, K)``).

    Returns an array of shape ``(d_total, steps, K)``.  Each column evolves
    with exactly the arithmetic of a single-trajectory run.
    """
    y = np.array(inits, dtype=float)
    if y.ndim != 2 or y.shape[0] != sys.d_total:
        raise ShapeError(f"inits must have shape ({sys.d_total}, K), got {y.shape}")
    f = controlled_field(sys, ctrl)
    out = np.empty((sys.d_total, grid.steps, y.shape[1]))
    out[:, 0] = y
    h = grid.dt / grid.substeps
    for k in range(grid.steps - 1):
        t = k * grid.dt
        for s in range(grid.substeps):
            ts = t + s * h
            k1 = f(y, ts)
            k2 = f(y + 0.5 * h * k1, ts + 0.5 * h)
            k3 = f(y + 0.5 * h * k2, ts + 0.5 * h)
            k4 = f(y + h * k3, ts + h)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            bad = np.flatnonzero(~np.all(np.isfinite(y), axis=0))
            raise IntegrationError(
                f"non-finite state after t={t:g} (member {int(bad[0])})", t=t, member=int(bad[0])
            )
        out[:, k + 1] = y
    return out


def integrate(sys: SystemSpec, ctrl: ControlLaw | None, init, grid: TrajectoryGrid) -> Trajectory:
    init = np.asarray(init, dtype=float)
    if init.shape != (sys.d_total,):
        raise ShapeError(f"init must have length {sys.d_total}, got shape {init.shape}")
    states = integrate_many(sys, ctrl, init[:, None], grid)[:, :, 0]
    return Trajectory(states=states, grid=grid)


def _tp1_drift(y):
    y1, y2, y3, y4 = y[0], y[1], y[2], y[3]
    return np.stack([y2, -y1 * (1.0 + y3 * y3), y4, -y3 * (1.0 + y1 * y1)])


def test_problem_1() -> SystemSpec:
    """Two coupled nonlinear oscillators; (y1, y2) resolved, (y3, y4) not."""
    return SystemSpec(d_total=4, d_resolved=2, drift=_tp1_drift, name="tp1")


def test_problem_2(eps: float = 10.0) -> SystemSpec:
    """Coupled oscillators with the unresolved pair running ``eps`` times faster."""
    if not eps > 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    eps = float(eps)

    def drift(y):
        y1, y2, y3, y4 = y[0], y[1], y[2], y[3]
        return np.stack(
            [y2, -y1 * (1.0 + eps * (y3 * y3)), eps * y4, -eps * y3 * (1.0 + y1 * y1)]
        )

    return SystemSpec(d_total=4, d_resolved=2, drift=drift, name=f"tp2(eps={eps:g})")


def coupled_oscillator_energy(y) -> np.ndarray:
    """Conserved energy of the uncontrolled first test problem."""
    y1, y2, y3, y4 = y[0], y[1], y[2], y[3]
    return 0.5 * (y2**2 + y4**2) + 0.5 * (y1**2 + y3**2 + y1**2 * y3**2)


def unresolved_sigma(eps: float) -> float:
    """Standard deviation of the unresolved start for the scale-separated problem."""
    return 1.0 / np.sqrt(eps)


# Keep pytest from collecting the factories when they are imported into tests.
test_problem_1.__test__ = False
test_problem_2.__test__ = False

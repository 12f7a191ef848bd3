"""Experiment configuration: dataclass, INI reader/writer and the benchmark presets.

Example file::

    [system]
    name = tp2
    eps = 10

    [control]
    kind = damped
    k = 0.01

    [grid]
    dt = 0.1
    steps = 500
    substeps = 10

    [opc]
    iterations = 300
    lr = 0.02
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .dynamics import (
    B1,
    B2,
    CONSTANT_C,
    Constant,
    Damped,
    InitDistribution,
    LinearState,
    SystemSpec,
    TrajectoryGrid,
    test_problem_1,
    test_problem_2,
)
from .errors import ConfigError

SYSTEMS = ("tp1", "tp2")
CONTROLS = ("constant", "damped", "linear", "zero")
MODES = ("known_b", "unknown_b")


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    system: str = "tp1"
    eps: float = 10.0
    control: str = "constant"
    c: tuple = tuple(CONSTANT_C)
    k: float = 0.01
    matrix: Optional[np.ndarray] = None
    selector: Optional[tuple] = None
    dt: float = 0.1
    steps: int = 500
    substeps: int = 1
    x0: tuple = (1.0, 0.0)
    sigma: Optional[float] = None
    measure_seed: int = 0
    mc_K: int = 100
    mc_seed: int = 0
    mode: str = "known_b"
    iterations: int = 150
    lr: float = 1e-3
    sigma_n: Optional[float] = None
    n_gen_count: int = 1000
    opc_seed: int = 0
    analytic: bool = False
    out: Optional[str] = None
    extra: dict = field(default_factory=dict)

    # -- derived objects -------------------------------------------------

    def system_spec(self) -> SystemSpec:
        return test_problem_1() if self.system == "tp1" else test_problem_2(self.eps)

    def control_law(self):
        if self.control == "constant":
            return Constant(np.asarray(self.c, dtype=float))
        if self.control == "damped":
            return Damped(float(self.k))
        if self.control == "linear":
            return LinearState(np.asarray(self.matrix, dtype=float), tuple(self.selector))
        return Constant(np.zeros(self.system_spec().d_total))

    def grid(self) -> TrajectoryGrid:
        return TrajectoryGrid(dt=self.dt, steps=self.steps, substeps=self.substeps)

    def unresolved_sigma(self) -> float:
        if self.sigma is not None:
            return self.sigma
        return 1.0 if self.system == "tp1" else 1.0 / np.sqrt(self.eps)

    def memory_sigma(self) -> float:
        if self.sigma_n is not None:
            return self.sigma_n
        return 1.0 if self.system == "tp1" else 1.0 / np.sqrt(self.eps)

    def init_distribution(self) -> InitDistribution:
        return InitDistribution(x0=np.asarray(self.x0, dtype=float), sigma=self.unresolved_sigma())

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, measure_seed=seed, mc_seed=seed, opc_seed=seed)

    def validate(self) -> "ExperimentConfig":
        def bad(where, msg):
            raise ConfigError(f"{where}: {msg}")

        if self.system not in SYSTEMS:
            bad("[system] name", f"expected one of {SYSTEMS}, got {self.system!r}")
        if self.system == "tp2" and not self.eps > 0:
            bad("[system] eps", "must be positive")
        sys = self.system_spec()
        if self.control not in CONTROLS:
            bad("[control] kind", f"expected one of {CONTROLS}, got {self.control!r}")
        if self.control == "constant" and len(self.c) != sys.d_total:
            bad("[control] c", f"expected {sys.d_total} values, got {len(self.c)}")
        if self.control == "linear":
            if self.matrix is None or self.selector is None:
                bad("[control] matrix", "linear control needs both matrix and selector")
            G = np.asarray(self.matrix)
            if G.ndim != 2 or G.shape[0] != sys.d_total:
                bad("[control] matrix", f"expected {sys.d_total} rows, got shape {G.shape}")
            if G.shape[1] != len(self.selector):
                bad("[control] selector", f"expected {G.shape[1]} indices, got {len(self.selector)}")
            if any(i < 0 or i >= sys.d_total for i in self.selector):
                bad("[control] selector", f"indices must lie in [0, {sys.d_total})")
        if self.mode not in MODES:
            bad("[opc] mode", f"expected one of {MODES}, got {self.mode!r}")
        if self.mode == "unknown_b" and self.control != "linear":
            bad("[opc] mode", "unknown_b needs a linear control whose selector defines the inputs")
        if len(self.x0) != sys.d_resolved:
            bad("[init] x0", f"expected {sys.d_resolved} values, got {len(self.x0)}")
        if self.sigma is not None and self.sigma < 0:
            bad("[init] sigma", "must be non-negative")
        if not self.dt > 0:
            bad("[grid] dt", "must be positive")
        if self.steps < 2:
            bad("[grid] steps", "must be >= 2")
        if self.substeps < 1:
            bad("[grid] substeps", "must be >= 1")
        if self.mc_K < 1:
            bad("[mc] K", "must be >= 1")
        if self.iterations < 1:
            bad("[opc] iterations", "must be >= 1")
        if not self.lr > 0:
            bad("[opc] lr", "must be positive")
        if self.sigma_n is not None and self.sigma_n < 0:
            bad("[opc] sigma_n", "must be non-negative")
        if self.n_gen_count < 1:
            bad("[opc] n_gen_count", "must be >= 1")
        return self


# -- INI serialization -------------------------------------------------------

def _floats(text, where):
    try:
        return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{where}: expected comma-separated numbers, got {text!r}") from None


def _matrix(text, where):
    rows = [r for r in text.replace("\n", ";").split(";") if r.strip()]
    vals = [_floats(r, where) for r in rows]
    if len({len(r) for r in vals}) != 1:
        raise ConfigError(f"{where}: rows have unequal lengths")
    return np.array(vals)


def _get(cp, section, key, conv, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    where = f"[{section}] {key}"
    try:
        return conv(raw)
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r}") from None


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}".replace("\n", " ")) from None
    d = ExperimentConfig()
    cfg = ExperimentConfig(
        name=_get(cp, "experiment", "name", str.strip, d.name),
        system=_get(cp, "system", "name", str.strip, d.system),
        eps=_get(cp, "system", "eps", float, d.eps),
        control=_get(cp, "control", "kind", str.strip, d.control),
        c=_get(cp, "control", "c", lambda t: _floats(t, "[control] c"), d.c),
        k=_get(cp, "control", "k", float, d.k),
        matrix=_get(cp, "control", "matrix", lambda t: _matrix(t, "[control] matrix"), None),
        selector=_get(cp, "control", "selector",
                      lambda t: tuple(int(v) for v in t.split(",") if v.strip()), None),
        dt=_get(cp, "grid", "dt", float, d.dt),
        steps=_get(cp, "grid", "steps", int, d.steps),
        substeps=_get(cp, "grid", "substeps", int, d.substeps),
        x0=_get(cp, "init", "x0", lambda t: _floats(t, "[init] x0"), d.x0),
        sigma=_get(cp, "init", "sigma", float, None),
        measure_seed=_get(cp, "init", "seed", int, d.measure_seed),
        mc_K=_get(cp, "mc", "K", int, d.mc_K),
        mc_seed=_get(cp, "mc", "seed", int, d.mc_seed),
        mode=_get(cp, "opc", "mode", str.strip, d.mode),
        iterations=_get(cp, "opc", "iterations", int, d.iterations),
        lr=_get(cp, "opc", "lr", float, d.lr),
        sigma_n=_get(cp, "opc", "sigma_n", float, None),
        n_gen_count=_get(cp, "opc", "n_gen_count", int, d.n_gen_count),
        opc_seed=_get(cp, "opc", "seed", int, d.opc_seed),
        analytic=_get(cp, "opc", "analytic", _bool, d.analytic),
        out=_get(cp, "output", "dir", str.strip, None),
    )
    return cfg.validate()


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return parse_config(text, source=str(path))


def _fmt(values):
    return ", ".join(repr(float(v)) for v in values)


def dump_config(cfg: ExperimentConfig) -> str:
    lines = ["[experiment]", f"name = {cfg.name}", "", "[system]", f"name = {cfg.system}"]
    if cfg.system == "tp2":
        lines.append(f"eps = {cfg.eps!r}")
    lines += ["", "[control]", f"kind = {cfg.control}"]
    if cfg.control == "constant":
        lines.append(f"c = {_fmt(cfg.c)}")
    elif cfg.control == "damped":
        lines.append(f"k = {cfg.k!r}")
    elif cfg.control == "linear":
        rows = "; ".join(_fmt(r) for r in np.asarray(cfg.matrix))
        lines.append(f"matrix = {rows}")
        lines.append("selector = " + ", ".join(str(i) for i in cfg.selector))
    lines += ["", "[grid]", f"dt = {cfg.dt!r}", f"steps = {cfg.steps}", f"substeps = {cfg.substeps}"]
    lines += ["", "[init]", f"x0 = {_fmt(cfg.x0)}"]
    if cfg.sigma is not None:
        lines.append(f"sigma = {cfg.sigma!r}")
    lines.append(f"seed = {cfg.measure_seed}")
    lines += ["", "[mc]", f"K = {cfg.mc_K}", f"seed = {cfg.mc_seed}"]
    lines += ["", "[opc]", f"mode = {cfg.mode}", f"iterations = {cfg.iterations}", f"lr = {cfg.lr!r}"]
    if cfg.sigma_n is not None:
        lines.append(f"sigma_n = {cfg.sigma_n!r}")
    lines += [f"n_gen_count = {cfg.n_gen_count}", f"seed = {cfg.opc_seed}",
              f"analytic = {str(cfg.analytic).lower()}"]
    return "\n".join(lines) + "\n"


# -- presets for the benchmark experiments -----------------------------------

def _preset(name, **kw):
    return ExperimentConfig(name=name, **kw).validate()


PRESETS = {
    "tp1_constant": lambda: _preset("tp1_constant", system="tp1", control="constant",
                                    iterations=150, lr=1e-3),
    "tp1_damped": lambda: _preset("tp1_damped", system="tp1", control="damped", k=0.01,
                                  iterations=200, lr=2e-2),
    "tp2_constant": lambda: _preset("tp2_constant", system="tp2", eps=10.0, control="constant",
                                    substeps=10, iterations=150, lr=1e-3),
    "tp2_damped": lambda: _preset("tp2_damped", system="tp2", eps=10.0, control="damped", k=0.01,
                                  substeps=10, iterations=300, lr=2e-2),
    "unknown_b1": lambda: _preset("unknown_b1", system="tp1", control="linear", matrix=B1.copy(),
                                  selector=(0, 1, 2, 3), mode="unknown_b", iterations=300, lr=1e-3),
    "unknown_b2": lambda: _preset("unknown_b2", system="tp1", control="linear", matrix=B2.copy(),
                                  selector=(0, 1), mode="unknown_b", iterations=400, lr=1e-3),
}

KNOWN_B_PRESETS = ("tp1_damped", "tp1_constant", "tp2_damped", "tp2_constant")


def preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None

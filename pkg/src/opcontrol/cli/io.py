"""Text artifacts: CSV tables, key-value sidecars and model files.

Floats are written with ``repr`` (shortest round-trip form), so reading a file
back reproduces every value exactly.
"""

from __future__ import annotations

import subprocess
from pathlib import Path

import numpy as np

from ..errors import ConfigError, DependencyError
from ..opc import MemorySeedConfig, OpcModel
from ..baselines import LinearModel


def fmt(x) -> str:
    return repr(float(x))


def write_csv(path, header, columns) -> None:
    """Write equal-length columns under ``header``."""
    cols = [np.asarray(c) for c in columns]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_rows(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Return ``(header, float matrix with one row per line)``."""
    path = Path(path)
    if not path.exists():
        raise DependencyError(f"missing {path.name} in {path.parent}")
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return header, data.reshape(len(lines) - 1, len(header))


def git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True, text=True, timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def write_meta(path, **items) -> None:
    items.setdefault("git_describe", git_describe())
    Path(path).write_text("".join(f"{k} = {v}\n" for k, v in items.items()))


def read_meta(path) -> dict:
    out = {}
    for ln in Path(path).read_text().splitlines():
        if "=" in ln:
            k, v = ln.split("=", 1)
            out[k.strip()] = v.strip()
    return out


# -- model files -------------------------------------------------------------

def _matrix_lines(M):
    return [",".join(fmt(v) for v in row) for row in np.atleast_2d(M)]


def save_model(path, model) -> None:
    """Write an ``OpcModel`` or ``LinearModel``.

    Layout: ``key = value`` header lines (dimensions first), then ``[A]``,
    optional ``[B]`` and, for OPc models, ``[seed]`` blocks.
    """
    is_opc = isinstance(model, OpcModel)
    d = model.A.shape[0]
    p = 0 if model.B is None else model.B.shape[1]
    lines = [
        "# opcontrol model file",
        f"kind = {'opc' if is_opc else 'dmdc'}",
        f"d_r = {d}",
        f"p = {p}",
        f"mode = {'known_b' if model.B is None else 'unknown_b'}",
        f"dt = {fmt(model.dt)}",
        "[A]",
        *_matrix_lines(model.A),
    ]
    if model.B is not None:
        lines += ["[B]", *_matrix_lines(model.B)]
    if is_opc:
        cfg = model.seed_cfg
        n_fit = cfg.n_fit if cfg.n_fit is not None else np.zeros(d)
        lines += [
            "[seed]",
            f"sigma_n = {fmt(cfg.sigma_n)}",
            f"n_gen_count = {cfg.n_gen_count}",
            f"seed = {cfg.seed}",
            "n_fit = " + ",".join(fmt(v) for v in n_fit),
        ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path):
    path = Path(path)
    if not path.exists():
        raise DependencyError(f"missing model file {path.name} in {path.parent}")
    header, blocks, current = {}, {}, None
    for ln in path.read_text().splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if ln.startswith("[") and ln.endswith("]"):
            current = ln[1:-1]
            blocks[current] = []
        elif current is None:
            k, v = (s.strip() for s in ln.split("=", 1))
            header[k] = v
        else:
            blocks[current].append(ln)
    try:
        d, p = int(header["d_r"]), int(header["p"])
        dt = float(header["dt"])
        A = np.array([[float(v) for v in r.split(",")] for r in blocks["A"]]).reshape(d, d)
        B = None
        if p:
            B = np.array([[float(v) for v in r.split(",")] for r in blocks["B"]]).reshape(d, p)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed model file ({exc})") from None
    if header.get("kind") != "opc":
        return LinearModel(A=A, B=B, dt=dt)
    seed = dict(s.split("=", 1) for s in blocks.get("seed", []))
    seed = {k.strip(): v.strip() for k, v in seed.items()}
    cfg = MemorySeedConfig(
        sigma_n=float(seed.get("sigma_n", 0.0)),
        n_fit=np.array([float(v) for v in seed["n_fit"].split(",")]) if "n_fit" in seed else None,
        n_gen_count=int(seed.get("n_gen_count", 1000)),
        seed=int(seed.get("seed", 0)),
    )
    return OpcModel(A=A, B=B, dt=dt, seed_cfg=cfg)

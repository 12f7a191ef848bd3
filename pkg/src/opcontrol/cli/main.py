"""``opcontrol`` command-line entry point.

Each subcommand reads an experiment config, does one stage of the pipeline and
writes its artifacts into ``--out``::

    simulate  -> measured.csv (+ measured.svg)
    mc        -> mc.csv
    fit       -> model_opc.txt, model_dmdc.txt, model_dmd.txt, history.csv, spectrum.csv
    generate  -> opc.csv, dmdc.csv
    compare   -> compare_x{i}.csv, compare_x{i}.svg, rmse.csv
    bench     -> bench.csv

Every CSV has a ``.meta`` sidecar with wall time, seed and build id.  Failures
print one ``opcontrol: error: <Kind>: <message>`` line to stderr and exit 1.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .. import experiments as ex
from ..baselines import dmd_fit, linear_rollout
from ..config import KNOWN_B_PRESETS, PRESETS, ExperimentConfig, load_config, preset
from ..dynamics import Trajectory
from ..errors import ConfigError, DependencyError, OpcError, SingularityError
from ..opc import generate_averaged, spectrum
from . import io, plots

log = logging.getLogger("opcontrol")

COMMANDS = ("simulate", "mc", "fit", "generate", "compare", "bench")

# Which command writes each artifact another command reads.
PRODUCER = {"measured.csv": "simulate", "mc.csv": "mc", "model_opc.txt": "fit",
            "model_dmdc.txt": "fit", "opc.csv": "generate", "dmdc.csv": "generate"}


# -- helpers -----------------------------------------------------------------

def _resolved_header(prefix, d):
    return ["t"] + [f"{prefix}{i + 1}" for i in range(d)]


def _read_series(out: Path, name: str, cfg: ExperimentConfig) -> np.ndarray:
    """Columns 1.. of ``name`` as a ``(d, m)`` array, checked against the grid."""
    if not (out / name).exists():
        _missing(out, name)
    _, data = io.read_csv(out / name)
    if data.shape[0] != cfg.steps:
        raise DependencyError(
            f"{name} has {data.shape[0]} rows but the config asks for {cfg.steps} steps; "
            "re-run the command that produces it with this config")
    return data[:, 1:].T


def _missing(out: Path, name: str):
    raise DependencyError(f"missing {name} in {out}; run `opcontrol {PRODUCER[name]}` "
                          "with the same config and --out first")


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


# -- commands ----------------------------------------------------------------

def cmd_simulate(cfg: ExperimentConfig, out: Path):
    traj, wall = _timed(ex.measure, cfg)
    t = traj.grid.times
    d = traj.states.shape[0]
    io.write_csv(out / "measured.csv", _resolved_header("y", d), [t, *traj.states])
    io.write_meta(out / "measured.meta", wall_time_s=wall, seed=cfg.measure_seed,
                  experiment=cfg.name)
    plots.measured_figure(out / "measured.svg", t, traj.states, cfg.system_spec().d_resolved)
    return ["measured.csv", "measured.svg"]


def cmd_mc(cfg: ExperimentConfig, out: Path):
    avg, wall = _timed(ex.monte_carlo, cfg)
    io.write_csv(out / "mc.csv", _resolved_header("x", avg.mean.shape[0]), [avg.times, *avg.mean])
    io.write_meta(out / "mc.meta", wall_time_s=wall, seed=cfg.mc_seed, K=avg.count,
                  experiment=cfg.name)
    return ["mc.csv"]


def cmd_fit(cfg: ExperimentConfig, out: Path):
    states = _read_series(out, "measured.csv", cfg)
    traj = Trajectory(states=states, grid=cfg.grid())
    s = ex.snapshots(cfg, traj)
    t0 = time.perf_counter()
    try:
        dmdc, model, report = ex.fit_models(cfg, s)
    except SingularityError as exc:
        raise SingularityError(
            f"{exc}; remediation: perturb dt or the measured data (e.g. another --seed)",
            iteration=exc.iteration) from None
    wall = time.perf_counter() - t0
    dmd = dmd_fit(s.X_minus, s.X_plus, dt=s.dt)

    io.save_model(out / "model_opc.txt", model)
    io.save_model(out / "model_dmdc.txt", dmdc)
    io.save_model(out / "model_dmd.txt", dmd)
    io.write_csv(out / "history.csv", ["iteration", "objective"],
                 [[str(i) for i in range(len(report.history))], report.history])
    rows = []
    for name, A in (("opc", model.A), ("dmdc", dmdc.A), ("dmd", dmd.A)):
        for i, lam in enumerate(spectrum(A)):
            rows.append([name, str(i), lam.real, lam.imag, abs(lam)])
    io.write_rows(out / "spectrum.csv", ["model", "index", "real", "imag", "modulus"], rows)
    io.write_meta(out / "fit.meta", wall_time_s=wall, seed=cfg.opc_seed, mode=cfg.mode,
                  iterations=cfg.iterations, learning_rate=cfg.lr,
                  final_objective=io.fmt(report.final_objective), experiment=cfg.name)
    return ["model_opc.txt", "model_dmdc.txt", "model_dmd.txt", "history.csv", "spectrum.csv"]


def cmd_generate(cfg: ExperimentConfig, out: Path):
    for name in ("model_opc.txt", "model_dmdc.txt"):
        if not (out / name).exists():
            _missing(out, name)
    model = io.load_model(out / "model_opc.txt")
    dmdc = io.load_model(out / "model_dmdc.txt")
    x0 = np.asarray(cfg.x0, dtype=float)
    d_r = model.A.shape[0]
    if x0.shape[0] != d_r:
        raise ConfigError(f"[init] x0: expected {d_r} resolved values, got {x0.shape[0]}")
    avg, wall = _timed(generate_averaged, model, x0, ex.feedback_policy(cfg), cfg.steps,
                       analytic=cfg.analytic)
    base = linear_rollout(dmdc, x0, ex.feedback_policy(cfg), cfg.steps)
    t = cfg.grid().times
    io.write_csv(out / "opc.csv", _resolved_header("x", d_r), [t, *avg.mean])
    io.write_csv(out / "dmdc.csv", _resolved_header("x", d_r), [t, *base])
    io.write_meta(out / "opc.meta", wall_time_s=wall, seed=model.seed_cfg.seed,
                  n_gen_count=model.seed_cfg.n_gen_count, analytic=cfg.analytic,
                  experiment=cfg.name)
    return ["opc.csv", "dmdc.csv"]


def cmd_compare(cfg: ExperimentConfig, out: Path):
    mc = _read_series(out, "mc.csv", cfg)
    opc = _read_series(out, "opc.csv", cfg)
    dmdc = _read_series(out, "dmdc.csv", cfg)
    if not (mc.shape == opc.shape == dmdc.shape):
        raise DependencyError(
            f"inconsistent inputs: mc {mc.shape}, opc {opc.shape}, dmdc {dmdc.shape}")
    t = cfg.grid().times
    written = []
    for i in range(mc.shape[0]):
        stem = f"compare_x{i + 1}"
        io.write_csv(out / f"{stem}.csv", ["t", "mc", "opc", "dmdc"], [t, mc[i], opc[i], dmdc[i]])
        plots.comparison_figure(out / f"{stem}.svg", t,
                                {"mc": mc[i], "opc": opc[i], "dmdc": dmdc[i]}, f"x{i + 1}")
        written += [f"{stem}.csv", f"{stem}.svg"]
    d = mc.shape[0]
    rows = [["opc_vs_mc", *ex.rmse(opc, mc)], ["dmdc_vs_mc", *ex.rmse(dmdc, mc)]]
    io.write_rows(out / "rmse.csv", ["comparison"] + [f"x{i + 1}" for i in range(d)], rows)
    return written + ["rmse.csv"]


def bench_experiment(cfg: ExperimentConfig, repeats: int = 1) -> dict:
    """Best-of-``repeats`` wall time for MC projection and OPc generation.

    One warm-up call of each is made first and not counted.  The OPc model is
    fitted once beforehand; only trajectory generation is timed.
    """
    s = ex.snapshots(cfg, ex.measure(cfg))
    _, model, _ = ex.fit_models(cfg, s)
    x0 = np.asarray(cfg.x0, dtype=float)

    def mc():
        ex.monte_carlo(cfg)

    def gen():
        generate_averaged(model, x0, ex.feedback_policy(cfg), cfg.steps, analytic=cfg.analytic)

    times = {}
    for name, fn in (("mc_projection", mc), ("opc_generation", gen)):
        fn()
        times[name] = min(_timed(fn)[1] for _ in range(repeats))
    return times


def cmd_bench(cfgs, out: Path):
    rows = []
    t0 = time.perf_counter()
    for cfg in cfgs:
        log.info("bench %s", cfg.name)
        times = bench_experiment(cfg)
        rows.append([cfg.name, "mc_projection", str(cfg.mc_K), times["mc_projection"]])
        rows.append([cfg.name, "opc_generation", str(cfg.n_gen_count), times["opc_generation"]])
    io.write_rows(out / "bench.csv", ["experiment", "method", "ensemble_size", "seconds"], rows)
    io.write_meta(out / "bench.meta", wall_time_s=time.perf_counter() - t0,
                  seed=",".join(str(c.mc_seed) for c in cfgs),
                  experiments=",".join(c.name for c in cfgs))
    return ["bench.csv"]


# -- argument handling --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opcontrol",
        description="Fit memory-corrected linear models to controlled trajectories "
                    "and compare them with Monte Carlo averages.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        src = p.add_mutually_exclusive_group(required=name != "bench")
        if name == "bench":
            src.add_argument("--config", action="append", type=Path, metavar="PATH",
                             help="experiment config; repeat for several (default: the "
                                  "four known-B presets)")
            src.add_argument("--preset", action="append", choices=sorted(PRESETS))
        else:
            src.add_argument("--config", type=Path, metavar="PATH", help="experiment config file")
            src.add_argument("--preset", choices=sorted(PRESETS), help="built-in experiment")
        p.add_argument("--out", type=Path, help="output directory (default: [output] dir)")
        p.add_argument("--seed", type=int, help="override every seed in the config")
        p.add_argument("--quiet", action="store_true", help="suppress progress messages")
    return parser


def _load(args):
    if args.command == "bench":
        if args.config:
            cfgs = [load_config(p) for p in args.config]
        else:
            cfgs = [preset(n) for n in (args.preset or KNOWN_B_PRESETS)]
    else:
        cfgs = [load_config(args.config) if args.config else preset(args.preset)]
    if args.seed is not None:
        cfgs = [c.with_seed(args.seed) for c in cfgs]
    for c in cfgs:
        c.validate()
    return cfgs


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr, force=True)
    try:
        cfgs = _load(args)
        out = Path(args.out or cfgs[0].out or "out")
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise DependencyError(f"cannot create output directory {out}: {exc.strerror}") from None
        t0 = time.perf_counter()
        if args.command == "bench":
            written = cmd_bench(cfgs, out)
        else:
            written = globals()[f"cmd_{args.command}"](cfgs[0], out)
        log.info("%s: wrote %s to %s (%.2fs)", args.command, ", ".join(written), out,
                 time.perf_counter() - t0)
    except (OpcError, ValueError, OSError) as exc:
        kind = type(exc).__name__
        msg = " ".join(str(exc).split())
        print(f"opcontrol: error: {kind}: {msg}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

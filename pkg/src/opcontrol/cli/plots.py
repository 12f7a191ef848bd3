"""Figures written next to the CSV outputs (SVG via matplotlib)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# Fixed id salt and no date stamp, so re-running gives byte-identical files.
STYLE = {
    "svg.hashsalt": "opcontrol",
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.4,
    "figure.figsize": (5.0, 3.2),
}

COLORS = {"mc": "black", "opc": "tab:red", "dmdc": "tab:blue"}
LABELS = {"mc": "MC projection", "opc": "OPc", "dmdc": "DMDc"}


def save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def comparison_figure(path, t, series: dict, ylabel: str):
    """One panel of averaged trajectories (MC, OPc, DMDc) for a coordinate."""
    with matplotlib.rc_context(STYLE):
        fig, ax = plt.subplots()
        for key in ("mc", "dmdc", "opc"):
            if key in series:
                style = "--" if key == "dmdc" else "-"
                ax.plot(t, series[key], style, color=COLORS[key], label=LABELS[key])
        ax.set_xlabel("t")
        ax.set_ylabel(ylabel)
        ax.legend(loc="upper right", frameon=False)
        fig.tight_layout()
        save(fig, path)


def measured_figure(path, t, states, d_r: int):
    """Single realization: resolved coordinates solid, unresolved dotted."""
    with matplotlib.rc_context(STYLE):
        fig, ax = plt.subplots()
        for i, row in enumerate(states):
            ax.plot(t, row, "-" if i < d_r else ":", label=f"y{i + 1}")
        ax.set_xlabel("t")
        ax.legend(loc="upper right", frameon=False, ncol=2)
        fig.tight_layout()
        save(fig, path)

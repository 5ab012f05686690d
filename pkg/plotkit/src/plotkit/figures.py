"""The five figure kinds, rendered deterministically.

Every render pins the matplotlib style, never mutates its inputs, and
writes PNGs with fixed metadata, so repeated invocations on identical
inputs produce byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schema import axis_columns, is_nan, load_summary, load_table

FIGURE_KINDS = ("profiles", "psi_history", "decomposition",
                "bound_vs_observed", "sweep_heatmap")

_STYLE = {
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.prop_cycle": plt.cycler(color=[
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]),
}
_PNG_METADATA = {"Software": "plotkit"}


@dataclass
class FigureSpec:
    """What to draw: kind, inputs, output path, style options."""

    kind: str
    inputs: list
    output: Path
    title: str = ""
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(
                f"kind must be one of {FIGURE_KINDS} (got {self.kind!r})")
        self.inputs = [Path(p) for p in self.inputs]
        self.output = Path(self.output)


def _check_inputs(spec: FigureSpec, count: int | None = None):
    if count is not None and len(spec.inputs) != count:
        raise ValueError(
            f"{spec.kind} expects {count} input file(s), got {len(spec.inputs)}")
    for path in spec.inputs:
        if not path.is_file():
            raise FileNotFoundError(f"input not found: {path}")
        load_summary(path)   # version gate


def _save(fig, spec: FigureSpec):
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output, metadata=_PNG_METADATA)
    plt.close(fig)


def _render_profiles(spec: FigureSpec):
    _check_inputs(spec, 1)
    table = load_table(spec.inputs[0])
    t = np.asarray(table["t"])
    r = np.asarray(table["r"])
    u = np.asarray(table["u"])
    snapshots = sorted(set(t.tolist()))
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    cmap = plt.get_cmap("viridis")
    for i, tv in enumerate(snapshots):
        mask = t == tv
        color = cmap(i / max(len(snapshots) - 1, 1))
        ax.plot(r[mask], np.maximum(u[mask], 1e-300), color=color,
                lw=1.0, label=f"t={tv:.3e}" if len(snapshots) <= 6 else None)
    ax.set_yscale("log")
    ax.set_xlabel("r")
    ax.set_ylabel("u(r, t)")
    ax.set_title(spec.title or "density profiles")
    if len(snapshots) <= 6:
        ax.legend(fontsize=7)
    _save(fig, spec)


def _render_psi_history(spec: FigureSpec):
    if not spec.inputs:
        raise ValueError("psi_history expects at least one trajectory CSV")
    _check_inputs(spec)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.6, 3.2))
    for path in spec.inputs:
        table = load_table(path)
        t = np.asarray(table["t"])
        marker = "o" if len(t) == 1 else None
        ax1.plot(t, np.asarray(table["psi"]), marker=marker, ms=3,
                 label=path.name.replace(".csv", ""))
        ax2.plot(t, np.asarray(table["phi"]), marker=marker, ms=3)
    ax1.set_yscale("log")
    ax1.set_xlabel("t")
    ax1.set_ylabel("psi")
    ax2.set_xlabel("t")
    ax2.set_ylabel("phi")
    ax1.legend(fontsize=7)
    fig.suptitle(spec.title or "energy and moment histories")
    fig.tight_layout()
    _save(fig, spec)


def _render_decomposition(spec: FigureSpec):
    _check_inputs(spec, 1)
    table = load_table(spec.inputs[0])
    t = np.asarray(table["t"])
    terms = np.vstack([np.asarray(table[k]) for k in
                       ("I1", "I2", "I3", "I4", "I5")])
    labels = ["I1 diffusion", "I2 attraction", "I3 repulsion",
              "I4 growth", "I5 degradation"]
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    if len(t) == 1:
        for row, label in zip(terms, labels):
            ax.plot(t, row, marker="o", ms=4, label=label)
    else:
        # stack positive and negative parts separately so signs stay visible
        pos = np.clip(terms, 0.0, None)
        neg = np.clip(terms, None, 0.0)
        colors = [f"C{i}" for i in range(5)]
        ax.stackplot(t, pos, colors=colors, labels=labels)
        ax.stackplot(t, neg, colors=colors)
        rate = np.asarray(table["psi_rate_numeric"])
        ax.plot(t, rate, color="black", lw=1.2, ls="--", label="psi rate")
    ax.set_xlabel("t")
    ax.set_ylabel("rate contributions")
    ax.set_title(spec.title or "psi-rate decomposition")
    ax.legend(fontsize=6, ncol=2)
    fig.tight_layout()
    _save(fig, spec)


def _render_bound_vs_observed(spec: FigureSpec):
    _check_inputs(spec, 1)
    table = load_table(spec.inputs[0])
    names = [str(n) for n in table["name"]]
    lb_int = np.asarray(table["t_lb_integral"], dtype=float)
    lb_exp = np.asarray(table["t_lb_explicit"], dtype=float)
    t_num = np.asarray(table["t_num"], dtype=float)
    x = np.arange(len(names))
    width = 0.27
    fig, ax = plt.subplots(figsize=(max(5.0, 0.7 * len(names)), 3.6))
    ax.bar(x - width, lb_exp, width, label="T_LB explicit")
    ax.bar(x, lb_int, width, label="T_LB integral")
    observed = np.where(np.isfinite(t_num), t_num, 0.0)
    ax.bar(x + width, observed, width, label="T_num (observed)")
    ax.set_yscale("log")
    floor = np.nanmin([v for v in np.concatenate([lb_exp, lb_int, t_num])
                       if v > 0.0] or [1e-20])
    ax.set_ylim(bottom=floor * 0.5)
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=60, fontsize=6, ha="right")
    ax.set_ylabel("time")
    ax.set_title(spec.title or "lower bounds vs observed blow-up time")
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save(fig, spec)


def _render_sweep_heatmap(spec: FigureSpec):
    _check_inputs(spec, 1)
    table = load_table(spec.inputs[0])
    axes = axis_columns(table)
    if len(axes) != 2:
        raise ValueError(
            f"sweep_heatmap needs exactly 2 axis columns, found {axes}")
    ax_x = sorted(set(table[axes[0]]))
    ax_y = sorted(set(table[axes[1]]))
    grid = np.full((len(ax_y), len(ax_x)), np.nan)
    for xv, yv, tn, outcome in zip(table[axes[0]], table[axes[1]],
                                   table["t_num"], table["outcome"]):
        value = tn if outcome == "blow_up" and not is_nan(tn) else np.nan
        grid[ax_y.index(yv), ax_x.index(xv)] = value
    fig, ax = plt.subplots(figsize=(4.6, 3.8))
    masked = np.ma.masked_invalid(grid)
    cmap = plt.get_cmap("magma").copy()
    cmap.set_bad("#d0d0d0")
    im = ax.imshow(masked, origin="lower", aspect="auto", cmap=cmap)
    ax.set_xticks(range(len(ax_x)))
    ax.set_xticklabels([f"{v:g}" for v in ax_x], fontsize=7)
    ax.set_yticks(range(len(ax_y)))
    ax.set_yticklabels([f"{v:g}" for v in ax_y], fontsize=7)
    ax.set_xlabel(axes[0])
    ax.set_ylabel(axes[1])
    ax.set_title(spec.title or "T_num across the sweep (grey: no blow-up)")
    fig.colorbar(im, ax=ax, label="T_num")
    fig.tight_layout()
    _save(fig, spec)


_RENDERERS = {
    "profiles": _render_profiles,
    "psi_history": _render_psi_history,
    "decomposition": _render_decomposition,
    "bound_vs_observed": _render_bound_vs_observed,
    "sweep_heatmap": _render_sweep_heatmap,
}


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the output path."""
    with matplotlib.rc_context(_STYLE):
        _RENDERERS[spec.kind](spec)
    return spec.output

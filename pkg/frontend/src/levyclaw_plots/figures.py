"""Figure builders for the standard levyclaw artifacts.

Deterministic on purpose: Agg backend, pinned style, no timestamps in
the image metadata, fixed SVG hash salt.  Rendering the same inputs
twice produces byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .readers import load_convergence, load_distance, load_field, load_run

STYLE = {
    "figure.figsize": (7.0, 4.2),
    "figure.dpi": 130,
    "savefig.dpi": 130,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "levyclaw-plots",
    "image.cmap": "viridis",
}

FIGURE_KINDS = ("heatmap-u", "snapshots", "n-heatmap", "m-heatmap",
                "pair-distance", "convergence")

__all__ = ["FigureSpec", "FIGURE_KINDS", "render", "available_kinds"]


@dataclass(frozen=True)
class FigureSpec:
    """One figure: what to read, which kind to draw, where to write it."""

    kind: str
    inputs: dict
    output: Path
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"choose from {FIGURE_KINDS}")


def _save(fig, output: Path):
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    fmt = output.suffix.lstrip(".").lower() or "png"
    metadata = {"Date": None} if fmt == "svg" else {"Software": "levyclaw-plots"}
    fig.savefig(output, format=fmt, metadata=metadata)
    plt.close(fig)


def _heatmap(ax, x, y, values, xlabel, ylabel, title):
    mesh = ax.pcolormesh(x, y, values, shading="nearest")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(False)
    return mesh


def render(spec: FigureSpec) -> Path:
    """Draw one figure; returns the written path."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if spec.kind == "heatmap-u":
            run = load_run(spec.inputs["run_dir"])
            mesh = _heatmap(ax, run.x, run.times, run.u,
                            spec.xlabel or "x", spec.ylabel or "t",
                            spec.title or "u(t, x)")
            fig.colorbar(mesh, ax=ax, label="u")
        elif spec.kind == "snapshots":
            run = load_run(spec.inputs["run_dir"])
            stride = max(1, len(run.times) // 8)
            for idx in range(0, len(run.times), stride):
                ax.plot(run.x, run.u[idx], lw=1.4,
                        label=f"t = {run.times[idx]:.4g}")
            ax.plot(run.x, run.u[-1], lw=1.8, color="black",
                    label=f"t = {run.times[-1]:.4g}")
            ax.set_xlabel(spec.xlabel or "x")
            ax.set_ylabel(spec.ylabel or "u")
            ax.set_title(spec.title or "snapshots")
            ax.legend(fontsize=7, ncol=2)
        elif spec.kind in ("n-heatmap", "m-heatmap"):
            data = load_field(spec.inputs["field_csv"])
            mesh = _heatmap(ax, data.x, data.xi, data.values[-1].T,
                            spec.xlabel or "x", spec.ylabel or "xi",
                            spec.title or
                            f"{spec.kind[0]}(t={data.times[-1]:.4g}, x, xi)")
            fig.colorbar(mesh, ax=ax, label=spec.kind[0])
        elif spec.kind == "pair-distance":
            data = load_distance(spec.inputs["distance_csv"])
            ax.plot(data.times, data.distance, lw=1.8, label="|u - v| in L1")
            ax.plot(data.times, data.pos_part, lw=1.2, ls="--", label="(u-v)^+")
            ax.plot(data.times, data.neg_part, lw=1.2, ls=":", label="(u-v)^-")
            ax.set_xlabel(spec.xlabel or "t")
            ax.set_ylabel(spec.ylabel or "L1 distance")
            ax.set_title(spec.title or "contraction")
            ax.set_ylim(bottom=0.0)
            ax.legend(fontsize=8)
        elif spec.kind == "convergence":
            doc = load_convergence(spec.inputs["convergence_json"])
            grids = np.asarray(doc["grids"][:-1], dtype=float)
            errs = np.asarray(doc["l1_errors"], dtype=float)
            h = 1.0 / grids
            ax.loglog(h, errs, "o-", label="L1 self-error")
            slope = np.polyfit(np.log(h), np.log(errs), 1)[0]
            ref = errs[0] * (h / h[0]) ** 1.0
            ax.loglog(h, ref, "k--", lw=1.0, label="order 1")
            ax.set_xlabel(spec.xlabel or "h")
            ax.set_ylabel(spec.ylabel or "L1 error")
            ax.set_title(spec.title or f"self-convergence (slope {slope:.2f})")
            ax.legend(fontsize=8)
        _save(fig, spec.output)
    return Path(spec.output)


def available_kinds(run_dir: Path) -> list:
    """Figure kinds whose inputs exist under run_dir."""
    run_dir = Path(run_dir)
    kinds = []
    if (run_dir / "manifest.json").exists():
        kinds += ["heatmap-u", "snapshots"]
    if (run_dir / "n_field.csv").exists():
        kinds.append("n-heatmap")
    if (run_dir / "m_field.csv").exists():
        kinds.append("m-heatmap")
    if (run_dir / "pair_distance.csv").exists():
        kinds.append("pair-distance")
    if (run_dir / "convergence.json").exists():
        kinds.append("convergence")
    return kinds


def default_spec(kind: str, run_dir: Path, out_dir: Path, fmt: str) -> FigureSpec:
    run_dir = Path(run_dir)
    out = Path(out_dir) / f"{kind.replace('-', '_')}.{fmt}"
    inputs = {"run_dir": run_dir,
              "field_csv": run_dir / ("n_field.csv" if kind == "n-heatmap"
                                      else "m_field.csv"),
              "distance_csv": run_dir / "pair_distance.csv",
              "convergence_json": run_dir / "convergence.json"}
    return FigureSpec(kind=kind, inputs=inputs, output=out)

"""Render figures from emitted sweep data, next to the delimited output.

Reads the rows CSVs written by `emit_report` and produces PNG plots of
mean error versus graph size (with standard-error bars and, for bound
sweeps, the mean evaluated bound overlaid on a log axis).
"""

from __future__ import annotations

import glob
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import (TrainRow, TrainTransferReport, TransferReport,
                          TransferRow, load_rows_csv)

__all__ = ["render_report_figures"]


def _plot_transfer(rows, out_png: str, title: str) -> None:
    report = TransferReport(config={}, rows=rows)
    agg = report.aggregates()
    ns = sorted(agg)
    means = [agg[n]["mean_error"] for n in ns]
    errs = [agg[n]["stderr"] for n in ns]
    bound = [agg[n]["mean_bound"] for n in ns]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(ns, means, yerr=errs, marker="o", label="measured error")
    if all(b == b and b != float("inf") for b in bound):
        ax.plot(ns, bound, marker="s", linestyle="--", label="evaluated bound")
        ax.set_yscale("log")
    ax.set_xlabel("graph size n")
    ax.set_ylabel("L2 transfer error")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def _plot_train(rows, out_png: str, title: str) -> None:
    report = TrainTransferReport(config={}, rows=rows)
    agg = report.aggregates()
    ns = sorted(agg)
    fig, ax = plt.subplots(figsize=(6, 4))
    for model in sorted({r.model for r in rows}):
        means = [agg[n][model]["mean_relative_difference"] for n in ns]
        errs = [agg[n][model]["stderr"] for n in ns]
        ax.errorbar(ns, means, yerr=errs, marker="o", label=model)
    ax.set_xlabel("training graph size n")
    ax.set_ylabel("relative performance difference")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def render_report_figures(indir: str, outdir: str | None = None) -> list:
    """Render one PNG per *_rows.csv found in `indir`; returns the paths."""
    outdir = outdir or indir
    os.makedirs(outdir, exist_ok=True)
    written = []
    for csv_path in sorted(glob.glob(os.path.join(indir, "*_rows.csv"))):
        rows = load_rows_csv(csv_path)
        if not rows:
            continue
        stem = os.path.basename(csv_path)[: -len("_rows.csv")]
        out_png = os.path.join(outdir, f"{stem}.png")
        summary = os.path.join(indir, f"{stem}_summary.json")
        title = stem
        if os.path.exists(summary):
            with open(summary) as f:
                title = json.load(f).get("kind", stem)
        if isinstance(rows[0], TransferRow):
            _plot_transfer(rows, out_png, title)
        elif isinstance(rows[0], TrainRow):
            _plot_train(rows, out_png, title)
        else:
            continue
        written.append(out_png)
    return written

"""
Experiment output: metrics CSV, per-metric plot data with a gnuplot script,
and optional PNG renderings.
"""

import io
import logging
import os
import stat
from pathlib import Path as FilePath
from typing import List, Sequence

import matplotlib
import pandas as pd

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from core.errors import ConfigurationError, ModelValidationError
from logic.experiments.metrics import TIER_ORDER, MetricsRow, aggregate_rows, rows_frame

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
PLOT_SCRIPT = "plot.gp"


def _require_rows(rows: Sequence[MetricsRow]) -> None:
    if not rows:
        raise ModelValidationError("no metrics rows to write")


def _write_text(path: FilePath, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as e:
        raise ConfigurationError(f"cannot write '{path}': {e}")


def metrics_csv(rows: Sequence[MetricsRow]) -> str:
    _require_rows(rows)
    return rows_frame(rows).to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n", na_rep="nan")


def emit_csv(rows: Sequence[MetricsRow], file_path: str) -> None:
    _write_text(FilePath(file_path), metrics_csv(rows))
    logger.info("wrote %d metrics rows to %s", len(rows), file_path)


def _plot_block(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    frame[["path_count", "tier", "mean", "stddev"]].to_csv(
        buffer, sep=" ", index=False, header=False, float_format=FLOAT_FORMAT, lineterminator="\n",
    )
    return buffer.getvalue()


def _plot_script(metrics: List[str], tiers: List[str]) -> str:
    lines = [
        "#!/usr/bin/env gnuplot",
        "set terminal pngcairo size 800,500",
        "set xlabel 'usable paths per AS pair'",
        "set key outside right",
        "set grid",
        "set xtics 1",
    ]
    for metric in metrics:
        series = ", ".join(
            f"'{metric}.dat' index {i} using 1:3:4 with yerrorlines title '{tier}'"
            for i, tier in enumerate(tiers)
        )
        lines += [f"set output '{metric}.png'", f"set ylabel '{metric}'", f"plot {series}"]
    return "\n".join(lines) + "\n"


def emit_plot_data(rows: Sequence[MetricsRow], out_dir: str) -> List[str]:
    """One ``<metric>.dat`` per metric plus an executable plot script; returns the written paths.

    Each data file holds one block per tier (gnuplot ``index``), separated by
    two blank lines, with columns path_count, tier, mean and stddev.
    """
    _require_rows(rows)
    summary = aggregate_rows(rows)
    tiers = [t for t in TIER_ORDER if t in set(summary["tier"])]
    metrics = list(dict.fromkeys(summary["metric"]))
    directory = FilePath(out_dir)
    written = []
    for metric in metrics:
        selected = summary[summary["metric"] == metric]
        blocks = [_plot_block(selected[selected["tier"] == tier]) for tier in tiers]
        path = directory / f"{metric}.dat"
        _write_text(path, "# path_count tier mean stddev\n" + "\n\n".join(blocks))
        written.append(str(path))

    script = directory / PLOT_SCRIPT
    _write_text(script, _plot_script(metrics, tiers))
    os.chmod(script, os.stat(script).st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    written.append(str(script))
    logger.info("wrote plot data for %d metrics to %s", len(metrics), out_dir)
    return written


def render_plots(rows: Sequence[MetricsRow], out_dir: str) -> List[str]:
    """PNG per metric: mean with stddev error bars over path count, one series per tier."""
    _require_rows(rows)
    summary = aggregate_rows(rows)
    directory = FilePath(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for metric in dict.fromkeys(summary["metric"]):
        selected = summary[summary["metric"] == metric]
        fig, ax = plt.subplots(figsize=(8, 5))
        for tier in TIER_ORDER:
            series = selected[selected["tier"] == tier]
            if series.empty:
                continue
            ax.errorbar(series["path_count"], series["mean"], yerr=series["stddev"],
                        marker="o", capsize=3, label=tier)
        ax.set_xlabel("usable paths per AS pair")
        ax.set_ylabel(metric)
        ax.grid(True)
        ax.legend()
        path = directory / f"{metric}.png"
        fig.savefig(path, dpi=150, bbox_inches="tight")
        plt.close(fig)
        written.append(str(path))
    return written

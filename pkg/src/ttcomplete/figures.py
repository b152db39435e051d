"""Matplotlib renderings of solver histories and benchmark summaries.

Figures are built on explicit Figure objects with the Agg canvas, so nothing
here touches the global pyplot state or needs a display.
"""

from __future__ import annotations

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure


def _new_figure(width, height):
    fig = Figure(figsize=(width, height), dpi=110)
    FigureCanvasAgg(fig)
    return fig


def save_history_figure(report, path):
    """Objective and relative-change curves of one solve, side by side."""
    fig = _new_figure(8.0, 3.2)
    ax0 = fig.add_subplot(1, 2, 1)
    if report.objective_history:
        ax0.semilogy(range(len(report.objective_history)), report.objective_history)
    ax0.set_xlabel("iteration")
    ax0.set_ylabel("objective")
    ax0.grid(True, alpha=0.3)
    ax1 = fig.add_subplot(1, 2, 2)
    if report.stop_stat_history:
        ax1.semilogy(range(1, len(report.stop_stat_history) + 1), report.stop_stat_history)
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("relative change")
    ax1.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    return path


def save_band_metrics_figure(report, path):
    """Per-band PSNR bars and the SSIM curve for one quality report."""
    bands = range(1, report.band_count + 1)
    fig = _new_figure(7.0, 3.2)
    ax0 = fig.add_subplot(1, 2, 1)
    finite = [p if p != float("inf") else 0.0 for p in report.psnr_per_band]
    ax0.bar(bands, finite, color="tab:blue")
    ax0.set_xlabel("band")
    ax0.set_ylabel("PSNR (dB)")
    ax1 = fig.add_subplot(1, 2, 2)
    ax1.plot(bands, report.ssim_per_band, marker="o", color="tab:orange")
    ax1.set_xlabel("band")
    ax1.set_ylabel("SSIM")
    ax1.set_ylim(0.0, 1.05)
    ax1.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    return path


def save_bench_figure(points, path):
    """Mean PSNR against sampling rate, one line per dataset label.

    `points` is a list of (label, rate, mpsnr) triples; seeds at the same
    rate are averaged.
    """
    by_label = {}
    for label, rate, mpsnr in points:
        by_label.setdefault(label, {}).setdefault(rate, []).append(mpsnr)
    fig = _new_figure(5.5, 4.0)
    ax = fig.add_subplot(1, 1, 1)
    for label in sorted(by_label):
        rates = sorted(by_label[label])
        means = [sum(by_label[label][r]) / len(by_label[label][r]) for r in rates]
        ax.plot(rates, means, marker="o", label=label)
    ax.set_xlabel("sampling rate")
    ax.set_ylabel("mean PSNR (dB)")
    ax.grid(True, alpha=0.3)
    if by_label:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    return path

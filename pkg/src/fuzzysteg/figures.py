"""Matplotlib renderings of the benchmark outputs (written next to the CSVs)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_METHOD_STYLE = {
    "fixed1": dict(color="#1f77b4", marker="o", label="Fixed LSB-1"),
    "fixed2": dict(color="#d62728", marker="s", label="Fixed LSB-2"),
    "adaptive": dict(color="#2ca02c", marker="^", label="Adaptive"),
}


def _metric_series(aggregates, metric):
    series = {}
    for method, bpp, m, mean, sd, lo, hi in aggregates:
        if m == metric:
            series.setdefault(method, []).append((bpp, mean, sd))
    for rows in series.values():
        rows.sort()
    return series


def _line_figure(series, ylabel, title, path, logy=False):
    fig, ax = plt.subplots(figsize=(5.0, 3.4), constrained_layout=True)
    for method, rows in series.items():
        xs = [r[0] for r in rows]
        ys = [r[1] for r in rows]
        es = [r[2] for r in rows]
        style = _METHOD_STYLE.get(method, dict(marker="o", label=method))
        ax.errorbar(xs, ys, yerr=es, capsize=2, markersize=4, **style)
    ax.set_xlabel("payload (bpp)")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if logy:
        ax.set_yscale("log")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_quality(aggregates, out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for metric, ylabel, title, fname in (
        ("psnr", "PSNR (dB)", "Image quality vs payload", "psnr_vs_bpp.png"),
        ("ssim", "SSIM", "Structural similarity vs payload", "ssim_vs_bpp.png"),
        ("kl", "KL divergence (bits)", "Histogram divergence vs payload", "kl_vs_bpp.png"),
    ):
        path = out / fname
        _line_figure(_metric_series(aggregates, metric), ylabel, title, path)
        written.append(path)
    return written


def render_detection(detection_rates, out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.2), constrained_layout=True)
    for ax, det, title in zip(axes, ("rs", "chi2", "spa"), ("RS", "Chi-square", "SPA")):
        series = {}
        for method, bpp, d, rate in detection_rates:
            if d == det:
                series.setdefault(method, []).append((bpp, rate))
        for method, rows in series.items():
            rows.sort()
            style = _METHOD_STYLE.get(method, dict(marker="o", label=method))
            ax.plot([r[0] for r in rows], [100 * r[1] for r in rows], markersize=4, **style)
        ax.set_title(title)
        ax.set_xlabel("payload (bpp)")
        ax.set_ylim(-5, 105)
        ax.grid(alpha=0.3)
    axes[0].set_ylabel("detection rate (%)")
    axes[-1].legend(fontsize=8)
    path = out / "detection_rates.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def render_ablation(cells, out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5.0, 3.4), constrained_layout=True)
    variants = []
    for cell in cells:
        if cell.variant not in variants:
            variants.append(cell.variant)
    for variant in variants:
        rows = sorted((c.bpp, c.positive_rate) for c in cells if c.variant == variant)
        ax.plot([r[0] for r in rows], [100 * r[1] for r in rows], marker="o",
                markersize=4, label=variant)
    ax.set_xlabel("payload (bpp)")
    ax.set_ylabel("detector positive rate (%)")
    ax.set_title("Ablation: feature-detector positives")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    path = out / "ablation_positive_rate.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def render_timing(profile_rows, out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stages = ("feature", "fuzzy", "embed", "extract")
    methods = []
    for row in profile_rows:
        if row.method not in methods:
            methods.append(row.method)
    fig, ax = plt.subplots(figsize=(5.6, 3.4), constrained_layout=True)
    bottoms = [0.0] * len(methods)
    colors = plt.cm.viridis([0.15, 0.4, 0.65, 0.85])
    for stage, color in zip(stages, colors):
        heights = []
        for method in methods:
            val = next(
                (r.mean_s for r in profile_rows if r.method == method and r.stage == stage),
                0.0,
            )
            heights.append(val)
        ax.bar(methods, heights, bottom=bottoms, label=stage, color=color)
        bottoms = [b + h for b, h in zip(bottoms, heights)]
    ax.set_ylabel("seconds per image")
    ax.set_title("Per-stage timing")
    ax.legend(fontsize=8)
    path = out / "timing_stages.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]

"""CSV and Markdown emitters for benchmark results.

`records.csv`, `aggregates.csv`, `stats.csv`, and the Markdown tables are
fully deterministic given the config; wall-clock timings go to separate
files (`timings.csv`, `profile.*`) so reruns can be compared byte for byte.
Floats are written with repr (shortest round-trip form); infinite PSNR
serializes as the literal string "inf".
"""

from __future__ import annotations

import csv
from pathlib import Path

from . import figures
from .bench import BenchResult


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


RECORD_COLUMNS = [
    "image_id", "category", "method", "bpp", "payload_bytes", "wire_bytes",
    "embedded_bits", "psnr", "ssim", "mse", "kl", "rs_rate", "rs_detected",
    "chi2_p", "chi2_detected", "spa_rate", "spa_detected", "extraction_ok",
    "error",
]


def _record_row(r) -> list:
    if r.error is not None:
        metric = [""] * 10
    else:
        metric = [
            r.quality.psnr, r.quality.ssim, r.quality.mse, r.quality.kl,
            r.detections["rs"].statistic, int(r.detections["rs"].detected),
            r.detections["chi2"].statistic, int(r.detections["chi2"].detected),
            r.detections["spa"].statistic, int(r.detections["spa"].detected),
        ]
    return [
        r.image_id, r.category, r.method, r.bpp, r.payload_bytes, r.wire_bytes,
        r.embedded_bits, *metric, int(r.extraction_ok), r.error or "",
    ]


def write_bench_outputs(result: BenchResult, out_dir, render: bool = True) -> dict:
    """Write every benchmark artifact; returns {name: path}."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    paths["records"] = _write_csv(
        out / "records.csv", RECORD_COLUMNS, [_record_row(r) for r in result.records]
    )
    paths["timings"] = _write_csv(
        out / "timings.csv",
        ["image_id", "method", "bpp", "feature_s", "fuzzy_s", "embed_s", "extract_s"],
        [
            [r.image_id, r.method, r.bpp, r.timings["feature"], r.timings["fuzzy"],
             r.timings["embed"], r.timings["extract"]]
            for r in result.records
        ],
    )
    paths["aggregates"] = _write_csv(
        out / "aggregates.csv",
        ["method", "bpp", "metric", "mean", "sd", "ci_low", "ci_high"],
        result.aggregates,
    )
    paths["stats"] = _write_csv(
        out / "stats.csv",
        ["comparison", "metric", "bpp", "mean_diff", "t_stat", "p_value",
         "p_bonferroni", "cohens_d", "ci_low", "ci_high", "power", "n"],
        [
            [s["comparison"], s["metric"], s["bpp"], s["report"].mean_diff,
             s["report"].t_stat, s["report"].p_value, s["report"].p_bonferroni,
             s["report"].cohens_d, s["report"].ci95[0], s["report"].ci95[1],
             s["report"].power, s["report"].n]
            for s in result.stats
        ],
    )
    paths["detection"] = _write_csv(
        out / "detection_rates.csv",
        ["method", "bpp", "detector", "rate"],
        result.detection_rates,
    )
    paths["extraction"] = _write_csv(
        out / "extraction_rates.csv",
        ["method", "bpp", "rate"],
        result.extraction_rates,
    )
    paths["tables"] = write_markdown_tables(result, out / "tables.md")
    if render:
        fig_dir = out / "figures"
        figures.render_quality(result.aggregates, fig_dir)
        figures.render_detection(result.detection_rates, fig_dir)
        paths["figures"] = fig_dir
    return paths


def _agg_lookup(result: BenchResult):
    table = {}
    for method, bpp, metric, mean, sd, lo, hi in result.aggregates:
        table[(method, bpp, metric)] = (mean, sd, lo, hi)
    return table


def _methods_bpps(result: BenchResult):
    methods, bpps = [], []
    for method, bpp, *_ in result.aggregates:
        if method not in methods:
            methods.append(method)
        if bpp not in bpps:
            bpps.append(bpp)
    return methods, sorted(bpps)


def write_markdown_tables(result: BenchResult, path) -> Path:
    """Aggregate tables in the benchmark's standard layout."""
    table = _agg_lookup(result)
    methods, bpps = _methods_bpps(result)
    lines = []

    def metric_table(title, metric, digits, ci_digits):
        lines.append(f"## {title}")
        lines.append("")
        lines.append("| BPP | " + " | ".join(methods) + " |")
        lines.append("|" + "---|" * (len(methods) + 1))
        for bpp in bpps:
            cells = []
            for m in methods:
                if (m, bpp, metric) not in table:
                    cells.append("-")
                    continue
                mean, sd, lo, hi = table[(m, bpp, metric)]
                cells.append(
                    f"{mean:.{digits}f} ± {sd:.{digits}f} [{lo:.{ci_digits}f}, {hi:.{ci_digits}f}]"
                )
            lines.append(f"| {bpp:.2f} | " + " | ".join(cells) + " |")
        lines.append("")

    metric_table("PSNR (dB), mean ± sd with 95% CI", "psnr", 2, 2)
    metric_table("SSIM, mean ± sd with 95% CI", "ssim", 6, 6)
    metric_table("KL divergence (bits), mean ± sd with 95% CI", "kl", 5, 5)

    lines.append("## Detection rates (%)")
    lines.append("")
    det_names = ("rs", "chi2", "spa")
    header = []
    for det in det_names:
        header.extend(f"{det}:{m}" for m in methods)
    lines.append("| BPP | " + " | ".join(header) + " |")
    lines.append("|" + "---|" * (len(header) + 1))
    rates = {(m, b, d): r for m, b, d, r in result.detection_rates}
    for bpp in bpps:
        cells = []
        for det in det_names:
            for m in methods:
                r = rates.get((m, bpp, det))
                cells.append("-" if r is None else f"{100 * r:.1f}")
        lines.append(f"| {bpp:.2f} | " + " | ".join(cells) + " |")
    lines.append("")

    lines.append("## Extraction success rate (%)")
    lines.append("")
    lines.append("| BPP | " + " | ".join(methods) + " |")
    lines.append("|" + "---|" * (len(methods) + 1))
    ex = {(m, b): r for m, b, r in result.extraction_rates}
    for bpp in bpps:
        cells = [
            "-" if (m, bpp) not in ex else f"{100 * ex[(m, bpp)]:.1f}" for m in methods
        ]
        lines.append(f"| {bpp:.2f} | " + " | ".join(cells) + " |")
    lines.append("")

    lines.append("## Paired t-tests")
    lines.append("")
    lines.append(
        "| Comparison | Metric | BPP | Mean diff | t | p | p(Bonf.) | d | Power |"
    )
    lines.append("|" + "---|" * 9)
    for s in result.stats:
        r = s["report"]
        lines.append(
            f"| {s['comparison']} | {s['metric']} | {s['bpp']:.2f} | "
            f"{r.mean_diff:+.4f} | {r.t_stat:.3f} | {r.p_value:.3g} | "
            f"{r.p_bonferroni:.3g} | {r.cohens_d:+.3f} | {r.power:.3f} |"
        )
    lines.append("")

    path = Path(path)
    path.write_text("\n".join(lines), encoding="utf-8")
    return path


def write_ablation_outputs(cells, out_dir, render: bool = True) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    paths["ablation"] = _write_csv(
        out / "ablation.csv",
        ["variant", "bpp", "positive_rate", "extraction_rate"],
        [[c.variant, c.bpp, c.positive_rate, c.extraction_rate] for c in cells],
    )
    variants = []
    for c in cells:
        if c.variant not in variants:
            variants.append(c.variant)
    bpps = sorted({c.bpp for c in cells})
    grid = {(c.variant, c.bpp): c for c in cells}
    lines = ["## Ablation: feature-detector positive rate (%)", ""]
    lines.append("| BPP | " + " | ".join(variants) + " |")
    lines.append("|" + "---|" * (len(variants) + 1))
    for bpp in bpps:
        cells_fmt = [f"{100 * grid[(v, bpp)].positive_rate:.1f}" for v in variants]
        lines.append(f"| {bpp:.2f} | " + " | ".join(cells_fmt) + " |")
    lines.append("")
    lines.append("## Ablation: extraction success rate (%)")
    lines.append("")
    lines.append("| BPP | " + " | ".join(variants) + " |")
    lines.append("|" + "---|" * (len(variants) + 1))
    for bpp in bpps:
        cells_fmt = [f"{100 * grid[(v, bpp)].extraction_rate:.1f}" for v in variants]
        lines.append(f"| {bpp:.2f} | " + " | ".join(cells_fmt) + " |")
    lines.append("")
    (out / "ablation.md").write_text("\n".join(lines), encoding="utf-8")
    paths["ablation_md"] = out / "ablation.md"
    if render:
        figures.render_ablation(cells, out / "figures")
    return paths


def write_profile_outputs(rows, out_dir, render: bool = True) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    paths["profile"] = _write_csv(
        out / "profile.csv",
        ["method", "stage", "mean_s", "sd_s"],
        [[r.method, r.stage, r.mean_s, r.sd_s] for r in rows],
    )
    methods = []
    for r in rows:
        if r.method not in methods:
            methods.append(r.method)
    stages = ("feature", "fuzzy", "embed", "extract", "total")
    lines = ["## Timing profile (seconds per image, mean ± sd)", ""]
    lines.append("| Method | " + " | ".join(stages) + " |")
    lines.append("|" + "---|" * (len(stages) + 1))
    grid = {(r.method, r.stage): r for r in rows}
    for m in methods:
        cells = [
            f"{grid[(m, s)].mean_s:.4f} ± {grid[(m, s)].sd_s:.4f}" for s in stages
        ]
        lines.append(f"| {m} | " + " | ".join(cells) + " |")
    lines.append("")
    (out / "profile.md").write_text("\n".join(lines), encoding="utf-8")
    paths["profile_md"] = out / "profile.md"
    if render:
        figures.render_timing(rows, out / "figures")
    return paths

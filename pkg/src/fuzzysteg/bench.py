"""Experiment driver: full protocol, ablation study, and timing profile.

Reproducibility contract: every random draw a record consumes (payload
bytes, crypto salt and nonce) comes from a SplitMix64 stream seeded by the
bench seed XORed with a digest of (image_id, method, bpp). Two runs with the
same config produce identical records except for wall-clock timings, which
are kept out of the deterministic outputs entirely.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from pathlib import Path

from . import codec, crypto
from .corpus import load_manifest
from .errors import FuzzystegError
from .evaluation import QualityRecord, paired_t_test, quality_record
from .features import clear_feature_cache
from .fuzzy import FuzzySystem, InputPins
from .imaging import Image, load_png
from .rng import MASK64, SplitMix64
from .steganalysis import DetectorThresholds, DEFAULT_THRESHOLDS, run_detectors
from .steganalysis import feature_detector, train_feature_detector

ABLATION_VARIANTS = ("full", "entropy_only", "edge_only", "no_pressure")

#: Input pins per ablation variant; pinned inputs sit at mid-scale 0.5.
VARIANT_PINS = {
    "full": None,
    "entropy_only": InputPins(edge=0.5, pressure=0.5),
    "edge_only": InputPins(entropy=0.5, pressure=0.5),
    "no_pressure": InputPins(pressure=0.5),
}

STAT_METRICS = ("psnr", "rs_rate")
STAT_PAIRS = (("fixed1", "adaptive"), ("fixed2", "adaptive"), ("fixed1", "fixed2"))


@dataclass(frozen=True)
class BenchConfig:
    corpus_manifest: str
    bpp_levels: tuple = (0.05, 0.10, 0.20, 0.30, 0.40)
    methods: tuple = codec.METHODS
    seed: int = 42
    password: str = "bench-password"
    images_limit: int | None = None
    ablation_variants: tuple = ABLATION_VARIANTS
    kdf: crypto.KdfParams = crypto.FAST_KDF
    thresholds: DetectorThresholds = DEFAULT_THRESHOLDS

    def __post_init__(self):
        if not self.bpp_levels or any(b <= 0 for b in self.bpp_levels):
            raise ValueError("bpp levels must be positive")
        if list(self.bpp_levels) != sorted(self.bpp_levels):
            raise ValueError("bpp levels must be ascending")
        for m in self.methods:
            if m not in codec.METHODS:
                raise ValueError(f"unknown method {m!r}")
        for v in self.ablation_variants:
            if v not in ABLATION_VARIANTS:
                raise ValueError(f"unknown ablation variant {v!r}")


@dataclass(frozen=True)
class ExperimentRecord:
    image_id: str
    category: str
    method: str
    bpp: float
    payload_bytes: int
    wire_bytes: int
    embedded_bits: int
    quality: QualityRecord | None
    detections: dict
    extraction_ok: bool
    timings: dict
    error: str | None = None


@dataclass(frozen=True)
class BenchResult:
    records: list
    aggregates: list  # rows (method, bpp, metric, mean, sd, ci_low, ci_high)
    stats: list  # PairedTestReport rows with labels
    detection_rates: list  # rows (method, bpp, detector, rate)
    extraction_rates: list  # rows (method, bpp, rate)


def record_stream(seed: int, image_id: str, method: str, bpp: float) -> SplitMix64:
    """Per-record deterministic stream; independent of processing order."""
    tag = f"{image_id}|{method}|{bpp:.4f}".encode()
    digest = hashlib.blake2b(tag, digest_size=8).digest()
    return SplitMix64((seed ^ int.from_bytes(digest, "big")) & MASK64)


def load_corpus_images(cfg: BenchConfig) -> list:
    """(image_id, category, Image) rows, balanced across categories.

    With images_limit set, images are taken round-robin per category in
    manifest order, so a limit of 100 yields 20 per category.
    """
    manifest_path = Path(cfg.corpus_manifest)
    rows = load_manifest(manifest_path)
    root = manifest_path.parent
    if cfg.images_limit is not None and cfg.images_limit < len(rows):
        by_cat: dict = {}
        for rel, cat in rows:
            by_cat.setdefault(cat, []).append((rel, cat))
        picked = []
        idx = 0
        while len(picked) < cfg.images_limit:
            progressed = False
            for cat in by_cat:
                if idx < len(by_cat[cat]) and len(picked) < cfg.images_limit:
                    picked.append(by_cat[cat][idx])
                    progressed = True
            if not progressed:
                break
            idx += 1
        rows = picked
    return [(rel, cat, load_png(root / rel)) for rel, cat in rows]


def _zero_timings() -> dict:
    return {"feature": 0.0, "fuzzy": 0.0, "embed": 0.0, "extract": 0.0}


def run_record(
    cover: Image,
    image_id: str,
    category: str,
    method: str,
    bpp: float,
    cfg: BenchConfig,
    system: FuzzySystem | None = None,
    pins: InputPins | None = None,
) -> ExperimentRecord:
    """One embed -> measure -> detect -> extract -> decrypt cycle."""
    stream = record_stream(cfg.seed, image_id, method, bpp)
    payload_len = codec.plan_payload(bpp, cover.height, cover.width, method)
    plaintext = stream.take_bytes(payload_len)
    wire = crypto.serialize(crypto.seal(plaintext, cfg.password, cfg.kdf, stream))
    timings = _zero_timings()
    try:
        embed_t = {}
        stego = codec.embed(
            cover, wire, method, cfg.seed, system=system, pins=pins, timings=embed_t
        )
        quality = quality_record(cover, stego)
        detections = run_detectors(stego, cfg.thresholds)
        extract_t = {}
        recovered = codec.extract(
            stego, method, cfg.seed, system=system, pins=pins, timings=extract_t
        )
        ok = recovered == wire
        if ok:
            plain2 = crypto.open_payload(
                crypto.deserialize(recovered), cfg.password, cfg.kdf
            )
            ok = plain2 == plaintext
        timings["feature"] = embed_t.get("feature", 0.0) + extract_t.get("feature", 0.0)
        timings["fuzzy"] = embed_t.get("fuzzy", 0.0) + extract_t.get("fuzzy", 0.0)
        timings["embed"] = embed_t.get("embed", 0.0)
        timings["extract"] = extract_t.get("extract", 0.0)
        return ExperimentRecord(
            image_id=image_id,
            category=category,
            method=method,
            bpp=bpp,
            payload_bytes=payload_len,
            wire_bytes=len(wire),
            embedded_bits=codec.HEADER_BITS + 8 * len(wire),
            quality=quality,
            detections=detections,
            extraction_ok=ok,
            timings=timings,
        )
    except FuzzystegError as exc:
        return ExperimentRecord(
            image_id=image_id,
            category=category,
            method=method,
            bpp=bpp,
            payload_bytes=payload_len,
            wire_bytes=len(wire),
            embedded_bits=codec.HEADER_BITS + 8 * len(wire),
            quality=None,
            detections={},
            extraction_ok=False,
            timings=timings,
            error=f"{type(exc).__name__}: {exc}",
        )


def _mean_sd_ci(values) -> tuple:
    import math

    import numpy as np

    from .evaluation import t_ppf

    arr = np.asarray(values, dtype=np.float64)
    n = arr.size
    mean = float(arr.mean())
    if n < 2:
        return mean, 0.0, mean, mean
    sd = float(arr.std(ddof=1))
    if sd == 0.0:
        return mean, 0.0, mean, mean
    half = t_ppf(0.975, n - 1) * sd / math.sqrt(n)
    return mean, sd, mean - half, mean + half


def _metric_value(record: ExperimentRecord, metric: str) -> float:
    if metric == "psnr":
        return record.quality.psnr
    if metric == "ssim":
        return record.quality.ssim
    if metric == "mse":
        return record.quality.mse
    if metric == "kl":
        return record.quality.kl
    if metric == "rs_rate":
        return record.detections["rs"].statistic
    if metric == "spa_rate":
        return record.detections["spa"].statistic
    if metric == "chi2_p":
        return record.detections["chi2"].statistic
    raise KeyError(metric)


def summarize(records: list, cfg: BenchConfig) -> BenchResult:
    """Aggregate records into the report tables (deterministic fold order)."""
    good = [r for r in records if r.error is None]
    aggregates = []
    detection_rates = []
    extraction_rates = []
    for method in cfg.methods:
        for bpp in cfg.bpp_levels:
            cell = [r for r in good if r.method == method and r.bpp == bpp]
            if not cell:
                continue
            for metric in ("psnr", "ssim", "mse", "kl", "rs_rate", "spa_rate", "chi2_p"):
                mean, sd, lo, hi = _mean_sd_ci([_metric_value(r, metric) for r in cell])
                aggregates.append((method, bpp, metric, mean, sd, lo, hi))
            for det in ("rs", "chi2", "spa"):
                rate = sum(r.detections[det].detected for r in cell) / len(cell)
                detection_rates.append((method, bpp, det, rate))
            all_cell = [r for r in records if r.method == method and r.bpp == bpp]
            ok = sum(r.extraction_ok for r in all_cell) / len(all_cell)
            extraction_rates.append((method, bpp, ok))
    stats_rows = []
    comparisons_k = len(STAT_PAIRS) * len(cfg.bpp_levels)
    for metric in STAT_METRICS:
        for left, right in STAT_PAIRS:
            if left not in cfg.methods or right not in cfg.methods:
                continue
            for bpp in cfg.bpp_levels:
                lefts = {
                    r.image_id: r for r in good if r.method == left and r.bpp == bpp
                }
                rights = {
                    r.image_id: r for r in good if r.method == right and r.bpp == bpp
                }
                common = [i for i in lefts if i in rights]
                if len(common) < 2:
                    continue
                diffs = [
                    _metric_value(lefts[i], metric) - _metric_value(rights[i], metric)
                    for i in common
                ]
                try:
                    report = paired_t_test(diffs, comparisons_k=comparisons_k)
                except FuzzystegError:
                    continue
                stats_rows.append(
                    {
                        "comparison": f"{left} vs {right}",
                        "metric": metric,
                        "bpp": bpp,
                        "report": report,
                    }
                )
    return BenchResult(
        records=records,
        aggregates=aggregates,
        stats=stats_rows,
        detection_rates=detection_rates,
        extraction_rates=extraction_rates,
    )


def run_bench(cfg: BenchConfig, system: FuzzySystem | None = None) -> BenchResult:
    """The full protocol: every (image, method, bpp) cycle plus aggregation."""
    images = load_corpus_images(cfg)
    records = []
    for image_id, category, cover in images:
        for method in cfg.methods:
            for bpp in cfg.bpp_levels:
                records.append(
                    run_record(cover, image_id, category, method, bpp, cfg, system)
                )
    return summarize(records, cfg)


@dataclass(frozen=True)
class AblationCell:
    variant: str
    bpp: float
    positive_rate: float
    extraction_rate: float


def run_ablation(cfg: BenchConfig, system: FuzzySystem | None = None) -> list:
    """Feature-detector positive rate per variant and bpp.

    For each cell the image set splits 50/50 (even/odd manifest order) into
    a training half and a held-out half; the detector trains on training
    covers plus their stegos and is scored on the held-out stegos.
    """
    limit = cfg.images_limit or 100
    images = load_corpus_images(replace(cfg, images_limit=limit))
    train = [row for i, row in enumerate(images) if i % 2 == 0]
    test = [row for i, row in enumerate(images) if i % 2 == 1]
    cells = []
    for variant in cfg.ablation_variants:
        pins = VARIANT_PINS[variant]
        for bpp in cfg.bpp_levels:
            def stego_for(row):
                image_id, category, cover = row
                rec_stream = record_stream(cfg.seed, f"abl:{variant}:{image_id}", "adaptive", bpp)
                payload_len = codec.plan_payload(bpp, cover.height, cover.width, "adaptive")
                plaintext = rec_stream.take_bytes(payload_len)
                wire = crypto.serialize(
                    crypto.seal(plaintext, cfg.password, cfg.kdf, rec_stream)
                )
                stego = codec.embed(cover, wire, "adaptive", cfg.seed, system=system, pins=pins)
                recovered = codec.extract(
                    stego, "adaptive", cfg.seed, system=system, pins=pins
                )
                ok = recovered == wire and (
                    crypto.open_payload(crypto.deserialize(recovered), cfg.password, cfg.kdf)
                    == plaintext
                )
                return stego, ok
            train_stegos, train_ok = zip(*(stego_for(row) for row in train))
            test_stegos, test_ok = zip(*(stego_for(row) for row in test))
            model = train_feature_detector([row[2] for row in train], train_stegos)
            positives = [feature_detector(st, model).detected for st in test_stegos]
            cells.append(
                AblationCell(
                    variant=variant,
                    bpp=bpp,
                    positive_rate=sum(positives) / len(positives),
                    extraction_rate=(sum(train_ok) + sum(test_ok))
                    / (len(train_ok) + len(test_ok)),
                )
            )
    return cells


@dataclass(frozen=True)
class ProfileRow:
    method: str
    stage: str
    mean_s: float
    sd_s: float


def profile(cfg: BenchConfig, images_count: int = 30, bpp: float = 0.20) -> list:
    """Wall-clock per stage, mean and sd over `images_count` images.

    The feature cache is cleared per record so adaptive feature timings stay
    cold-path honest; fixed methods report exactly zero feature/fuzzy time.
    """
    images = load_corpus_images(replace(cfg, images_limit=images_count))
    rows = []
    stage_names = ("feature", "fuzzy", "embed", "extract", "total")
    for method in cfg.methods:
        samples = {s: [] for s in stage_names}
        for image_id, category, cover in images:
            clear_feature_cache()
            rec = run_record(cover, image_id, category, method, bpp, cfg)
            total = sum(rec.timings.values())
            for s in ("feature", "fuzzy", "embed", "extract"):
                samples[s].append(rec.timings[s])
            samples["total"].append(total)
        for s in stage_names:
            mean, sd, _, _ = _mean_sd_ci(samples[s])
            rows.append(ProfileRow(method=method, stage=s, mean_s=mean, sd_s=sd))
    return rows

"""Deterministic synthetic corpus spanning five texture regimes.

Every random draw comes from a per-image SplitMix64 stream seeded as
``master_seed XOR (category_ordinal * 10**6 + index)``, so any single image
can be regenerated in isolation and the full corpus is byte-stable across
runs. Category ordering (and the entropy ordering the generators are tuned
to) is: smooth, noise, natural_like, textured, mixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import UnknownCategoryError
from .imaging import Image, save_png
from .rng import MASK64, SplitMix64

CATEGORIES = ("smooth", "noise", "natural_like", "textured", "mixed")

MANIFEST_NAME = "manifest.csv"

# Generator tuning constants. Chosen so that mean local entropy orders as
# noise >= textured >= mixed >= natural_like >= smooth and so histogram
# pair statistics stay smooth enough for the chi-square attack to saturate.
_SMOOTH_LO = (36, 64)               # channel range low end (even values)
_SMOOTH_HI = (191, 219)             # channel range high end (odd values)
_SMOOTH_SLOPE_MAIN = (0.35, 0.55)   # dominant-axis |gradient|, levels/pixel
_SMOOTH_SLOPE_CROSS = (0.12, 0.22)  # |gradient| range on the other axis
_SMOOTH_BLUR_RADIUS = 16
_SMOOTH_BLUR_AMP = 8.0              # blurred-noise amplitude before equalization
_SMOOTH_PIXEL_DITHER = 1.5          # fine-grain dither before equalization
_TEX_WAVES = 3
_TEX_WAVE_FREQ = (8.0, 20.0)  # cycles per image side
_TEX_GABORS = 2
_TEX_GABOR_FREQ = (12.0, 26.0)
_TEX_GABOR_AMP = 1.3
_TEX_PIXEL_DITHER = 0.05      # relative fine-grain dither before equalization
_NATURAL_SMOOTH_SIGMA = 1.5   # optics-like rolloff on the 1/f field
_QUANT_DITHER = 2.0           # uniform per-pixel dither before rounding


@dataclass(frozen=True)
class CorpusSpec:
    """Parameters of one reproducible corpus."""

    images_per_category: int = 200
    side: int = 256
    master_seed: int = 42
    categories: tuple = field(default=CATEGORIES)

    def __post_init__(self):
        if self.images_per_category < 1:
            raise ValueError("images_per_category must be positive")
        if self.side < 8:
            raise ValueError("side must be at least 8")
        if tuple(self.categories) != CATEGORIES:
            raise ValueError(f"categories must be exactly {CATEGORIES}")


def image_seed(spec: CorpusSpec, category: str, index: int) -> int:
    ordinal = CATEGORIES.index(category)
    return (spec.master_seed ^ (ordinal * 10**6 + index)) & MASK64


def _rescale(field_: np.ndarray, lo: float, hi: float) -> np.ndarray:
    fmin = field_.min()
    fmax = field_.max()
    if fmax == fmin:
        return np.full_like(field_, (lo + hi) / 2.0)
    return lo + (field_ - fmin) * ((hi - lo) / (fmax - fmin))


def _quantize(field_: np.ndarray, rng: SplitMix64, amplitude: float = _QUANT_DITHER) -> np.ndarray:
    """Round a continuous field to 8 bits with uniform per-pixel dither.

    The dither kills the level-count aliasing that plain rounding of
    noiseless fields produces; without it the pair histograms of synthetic
    covers carry asymmetries no embedding can explain.
    """
    dither = rng.take_floats(field_.size).reshape(field_.shape) * 2.0 - 1.0
    return np.clip(np.round(field_ + amplitude * dither), 0, 255).astype(np.uint8)


def _equalize_levels(field_: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Histogram-equalize a continuous field onto the levels lo..hi inclusive.

    The rank transform is monotone, so spatial structure survives while the
    level counts come out exactly balanced. With an even lower bound and an
    odd upper bound every (2k, 2k+1) histogram pair is either fully inside
    the range or fully outside it, which keeps synthetic covers consistent
    with the pairs-of-values null hypothesis the chi-square attack tests.
    """
    flat = field_.ravel()
    order = np.argsort(flat, kind="stable")
    ranks = np.empty(order.size, dtype=np.int64)
    ranks[order] = np.arange(order.size, dtype=np.int64)
    levels = lo + (ranks * (hi - lo + 1)) // order.size
    return levels.reshape(field_.shape).astype(np.uint8)


def _smooth_channel(h: int, w: int, rng: SplitMix64) -> np.ndarray:
    """Affine ramp plus blurred noise, equalized onto a random sub-range.

    The rank equalization keeps the gradient-like spatial structure while
    pinning the channel histogram exactly flat between parity-aligned ends.
    """
    lo = _SMOOTH_LO[0] + 2 * rng.next_below((_SMOOTH_LO[1] - _SMOOTH_LO[0]) // 2 + 1)
    hi = _SMOOTH_HI[0] + 2 * rng.next_below((_SMOOTH_HI[1] - _SMOOTH_HI[0]) // 2 + 1)
    main = _SMOOTH_SLOPE_MAIN[0] + rng.next_float() * (
        _SMOOTH_SLOPE_MAIN[1] - _SMOOTH_SLOPE_MAIN[0]
    )
    if rng.next_float() < 0.5:
        main = -main
    cross = _SMOOTH_SLOPE_CROSS[0] + rng.next_float() * (
        _SMOOTH_SLOPE_CROSS[1] - _SMOOTH_SLOPE_CROSS[0]
    )
    if rng.next_float() < 0.5:
        cross = -cross
    if rng.next_float() < 0.5:
        slope_x, slope_y = main, cross
    else:
        slope_x, slope_y = cross, main
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    ramp = slope_x * (xx - w / 2.0) + slope_y * (yy - h / 2.0)
    noise = rng.take_floats(h * w).reshape(h, w) - 0.5
    blurred = ndimage.uniform_filter(noise, size=2 * _SMOOTH_BLUR_RADIUS + 1, mode="reflect")
    cloud = _rescale(blurred, -_SMOOTH_BLUR_AMP, _SMOOTH_BLUR_AMP)
    grain = (rng.take_floats(h * w).reshape(h, w) * 2.0 - 1.0) * _SMOOTH_PIXEL_DITHER
    return _equalize_levels(ramp + cloud + grain, lo, hi)


def _noise_image(h: int, w: int, rng: SplitMix64) -> np.ndarray:
    raw = np.frombuffer(rng.take_bytes(h * w * 3), dtype=np.uint8)
    return raw.reshape(h, w, 3).copy()


def _natural_channel(h: int, w: int, rng: SplitMix64) -> np.ndarray:
    white = rng.take_normals(h * w).reshape(h, w)
    spectrum = np.fft.fft2(white)
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    radial = np.hypot(fy, fx)
    radial[0, 0] = 1.0
    spectrum = spectrum / radial
    spectrum[0, 0] = 0.0
    field_ = np.fft.ifft2(spectrum).real
    field_ = ndimage.gaussian_filter(field_, _NATURAL_SMOOTH_SIGMA, mode="reflect")
    return _rescale(field_, 0.0, 255.0)


def _textured_channel(h: int, w: int, rng: SplitMix64) -> np.ndarray:
    side = float(max(h, w))
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    acc = np.zeros((h, w))
    for _ in range(_TEX_WAVES):
        theta = rng.next_float() * math.pi
        freq = _TEX_WAVE_FREQ[0] + rng.next_float() * (_TEX_WAVE_FREQ[1] - _TEX_WAVE_FREQ[0])
        phase = rng.next_float() * 2.0 * math.pi
        u = xx * math.cos(theta) + yy * math.sin(theta)
        acc += np.sin(2.0 * math.pi * freq * u / side + phase)
    for _ in range(_TEX_GABORS):
        cx = rng.next_float() * w
        cy = rng.next_float() * h
        theta = rng.next_float() * math.pi
        freq = _TEX_GABOR_FREQ[0] + rng.next_float() * (_TEX_GABOR_FREQ[1] - _TEX_GABOR_FREQ[0])
        sigma = side / 16.0 + rng.next_float() * (side / 5.0 - side / 16.0)
        phase = rng.next_float() * 2.0 * math.pi
        u = (xx - cx) * math.cos(theta) + (yy - cy) * math.sin(theta)
        envelope = np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * sigma**2))
        acc += _TEX_GABOR_AMP * envelope * np.sin(2.0 * math.pi * freq * u / side + phase)
    spread = acc.max() - acc.min()
    grain = (rng.take_floats(h * w).reshape(h, w) * 2.0 - 1.0)
    acc = acc + grain * (_TEX_PIXEL_DITHER * spread)
    return _equalize_levels(acc, 0, 255)


def _stack_channels(gen, h: int, w: int, rng: SplitMix64) -> np.ndarray:
    return np.stack([gen(h, w, rng) for _ in range(3)], axis=2)


def _mixed_image(h: int, w: int, rng: SplitMix64) -> np.ndarray:
    others = ["smooth", "noise", "natural_like", "textured"]
    # Fisher-Yates arrangement of the four source regimes over the quadrants.
    for i in range(3, 0, -1):
        j = rng.next_below(i + 1)
        others[i], others[j] = others[j], others[i]
    sub_seeds = [rng.next_u64() for _ in range(4)]
    h1, w1 = h // 2, w // 2
    quads = []
    for (qh, qw), cat, seed in zip(
        ((h1, w1), (h1, w - w1), (h - h1, w1), (h - h1, w - w1)), others, sub_seeds
    ):
        quads.append(_generate_array(cat, qh, qw, SplitMix64(seed)))
    top = np.concatenate([quads[0], quads[1]], axis=1)
    bottom = np.concatenate([quads[2], quads[3]], axis=1)
    return np.concatenate([top, bottom], axis=0)


def _generate_array(category: str, h: int, w: int, rng: SplitMix64) -> np.ndarray:
    if category == "smooth":
        return _stack_channels(_smooth_channel, h, w, rng)
    if category == "noise":
        return _noise_image(h, w, rng)
    if category == "natural_like":
        return _quantize(_stack_channels(_natural_channel, h, w, rng), rng)
    if category == "textured":
        return _stack_channels(_textured_channel, h, w, rng)
    if category == "mixed":
        return _mixed_image(h, w, rng)
    raise UnknownCategoryError(f"unknown category {category!r}")


def generate_category(category: str, index: int, spec: CorpusSpec = CorpusSpec()) -> Image:
    """Deterministic side x side x 3 image for (category, index)."""
    if category not in CATEGORIES:
        raise UnknownCategoryError(f"unknown category {category!r}")
    rng = SplitMix64(image_seed(spec, category, index))
    return Image(_generate_array(category, spec.side, spec.side, rng))


def generate_corpus(spec: CorpusSpec, out_dir) -> list:
    """Write the full corpus as PNGs plus a manifest; returns (relpath, category) rows.

    The manifest file has one `<relative_path>,<category>` line per image,
    UTF-8 with LF line endings.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for category in CATEGORIES:
        cat_dir = out / category
        cat_dir.mkdir(exist_ok=True)
        for index in range(spec.images_per_category):
            img = generate_category(category, index, spec)
            rel = f"{category}/{category}_{index:04d}.png"
            save_png(img, out / rel)
            manifest.append((rel, category))
    with open(out / MANIFEST_NAME, "w", encoding="utf-8", newline="\n") as fh:
        for rel, category in manifest:
            fh.write(f"{rel},{category}\n")
    return manifest


def load_manifest(path) -> list:
    """Parse a manifest file into (relative_path, category) rows."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rel, category = line.rsplit(",", 1)
            rows.append((rel, category))
    return rows

"""LSB-invariant feature extraction.

All features are computed from samples masked with 0xF8, so any modification
confined to the three lowest bits leaves every map bitwise identical. That is
the synchronization property the adaptive codec relies on: the decoder
recomputes these maps from the stego image and must land on the same values
the encoder saw.

Border handling is mirror padding (edge-inclusive reflection) for both the
entropy window and the Sobel kernels.
"""

from __future__ import annotations

import hashlib
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ImageTooSmallError
from .imaging import Image

ENTROPY_BINS = 64
ENTROPY_MAX_BITS = 6.0  # log2(64)

#: Grayscale weights applied to the stripped R, G, B planes.
GRAY_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class EntropyConfig:
    """Window for the local-entropy map; bins are fixed at 64 (bin = g // 4)."""

    window_radius: int = 4
    bins: int = ENTROPY_BINS

    def __post_init__(self):
        if self.window_radius < 1:
            raise ValueError("window_radius must be >= 1")
        if self.bins != ENTROPY_BINS:
            raise ValueError("bins are fixed at 64")


DEFAULT_ENTROPY_CONFIG = EntropyConfig()


@dataclass(frozen=True, eq=False)
class FeatureMaps:
    """Per-pixel entropy (bits, [0, 6]), edge magnitude ([0, 1]), gray ([0, 248])."""

    entropy: np.ndarray
    edge: np.ndarray
    gray: np.ndarray

    def __post_init__(self):
        for arr in (self.entropy, self.edge, self.gray):
            arr.setflags(write=False)


def clear_feature_cache() -> None:
    """Drop memoized maps (tests that must observe honest recomputation)."""
    _feature_cache.clear()


def strip_lower_bits(img: Image) -> Image:
    """Mask every sample with 0xF8 (clears bits 0-2)."""
    return Image(img.samples & np.uint8(0xF8))


def to_gray(stripped: Image) -> np.ndarray:
    """Real-valued luminance of a stripped image (no rounding).

    For single-channel images the gray plane is the stripped channel itself.
    """
    s = stripped.samples.astype(np.float64)
    if stripped.channels == 1:
        return s[:, :, 0]
    r, g, b = GRAY_WEIGHTS
    return r * s[:, :, 0] + g * s[:, :, 1] + b * s[:, :, 2]


def entropy_from_counts(counts: np.ndarray) -> np.ndarray:
    """Shannon entropy (bits) along the last axis of a histogram-count array.

    Zero-count bins contribute nothing (0 * log 0 = 0).
    """
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = counts / total
        terms = np.where(counts > 0, p * np.log2(p, where=counts > 0), 0.0)
    h = -terms.sum(axis=-1)
    return np.where(total[..., 0] > 0, h, 0.0)


def local_entropy(gray: np.ndarray, cfg: EntropyConfig = DEFAULT_ENTROPY_CONFIG) -> np.ndarray:
    """Windowed 64-bin Shannon entropy of the gray plane.

    Gray values are binned as floor(g / 4) over [0, 256); the window is the
    (2r+1)^2 mirror-padded neighborhood of each pixel. Counts come from
    per-bin integral images, and the entropy uses the identity
    H = log2(A) - (1/A) * sum(c * log2 c) with a lookup table over the
    integer counts, which keeps the map bitwise deterministic.
    """
    r = cfg.window_radius
    side = 2 * r + 1
    area = side * side
    bins = np.clip((gray * 0.25).astype(np.int64), 0, ENTROPY_BINS - 1)
    padded = np.pad(bins, r, mode="symmetric")
    ph, pw = padded.shape
    onehot = np.zeros((ph, pw, ENTROPY_BINS), dtype=np.int32)
    rows, cols = np.indices(padded.shape)
    onehot[rows, cols, padded] = 1
    sat = onehot.cumsum(axis=0, dtype=np.int32).cumsum(axis=1, dtype=np.int32)
    sat = np.pad(sat, ((1, 0), (1, 0), (0, 0)))
    h, w = gray.shape
    counts = (
        sat[side : side + h, side : side + w]
        - sat[:h, side : side + w]
        - sat[side : side + h, :w]
        + sat[:h, :w]
    )
    lut = np.zeros(area + 1)
    ks = np.arange(1, area + 1, dtype=np.float64)
    lut[1:] = ks * np.log2(ks)
    plogp_sum = np.take(lut, counts).sum(axis=2)
    return np.maximum(np.log2(float(area)) - plogp_sum / area, 0.0)


def edge_magnitude(gray: np.ndarray) -> np.ndarray:
    """Sobel gradient magnitude normalized by its global maximum.

    A flat image (zero maximum) maps to an all-zero edge map.
    """
    h, w = gray.shape
    if h < 3 or w < 3:
        raise ImageTooSmallError(f"Sobel needs at least 3x3, got {h}x{w}")
    gx = ndimage.sobel(gray, axis=1, mode="reflect")
    gy = ndimage.sobel(gray, axis=0, mode="reflect")
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak == 0.0:
        return np.zeros_like(mag)
    return mag / peak


_CACHE_SLOTS = 16
_feature_cache: "OrderedDict[tuple, FeatureMaps]" = OrderedDict()


def extract_features(img: Image, cfg: EntropyConfig = DEFAULT_ENTROPY_CONFIG) -> FeatureMaps:
    """Strip, gray-convert, then compute the entropy and edge maps.

    Results are memoized on a digest of the stripped samples, so repeated
    calls for the same cover (and for any stego derived from it, which strips
    to identical samples) cost one hash instead of a recompute.
    """
    stripped = strip_lower_bits(img)
    key = (hashlib.blake2b(stripped.samples.tobytes(), digest_size=16).digest(),
           cfg.window_radius)
    hit = _feature_cache.get(key)
    if hit is not None:
        _feature_cache.move_to_end(key)
        return hit
    gray = to_gray(stripped)
    fm = FeatureMaps(
        entropy=local_entropy(gray, cfg),
        edge=edge_magnitude(gray),
        gray=gray,
    )
    _feature_cache[key] = fm
    if len(_feature_cache) > _CACHE_SLOTS:
        _feature_cache.popitem(last=False)
    return fm


def dump_heatmaps(fm: FeatureMaps, out_dir) -> list:
    """Debug dump of the maps as 8-bit linear-scaled PNG heatmaps.

    Inspection aid only; nothing consumes these files.
    """
    from pathlib import Path

    from .imaging import save_png

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, arr, peak in (
        ("entropy", fm.entropy, ENTROPY_MAX_BITS),
        ("edge", fm.edge, 1.0),
        ("gray", fm.gray, 248.0),
    ):
        scaled = np.clip(arr / peak if peak else arr, 0.0, 1.0)
        img = Image(np.round(scaled * 255.0).astype(np.uint8)[:, :, None])
        path = out / f"{name}.png"
        save_png(img, path)
        written.append(path)
    return written

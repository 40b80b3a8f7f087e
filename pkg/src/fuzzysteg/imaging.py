"""8-bit image container, lossless PNG I/O, and pixel-level MSE.

Carriers are 8-bit PNG, grayscale or RGB, no alpha. The in-memory layout
(H, W, C) row-major with interleaved channels is the canonical sample order
every other module indexes into; flat sample index s maps to pixel s // C.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image as _PILImage

from .errors import DimensionMismatchError, UnsupportedFormatError


@dataclass(frozen=True, eq=False)
class Image:
    """Immutable 8-bit image; samples has shape (height, width, channels)."""

    samples: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.samples)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValueError(f"expected (H, W, C) with C in {{1, 3}}, got {arr.shape}")
        if arr.dtype != np.uint8:
            raise ValueError(f"expected uint8 samples, got {arr.dtype}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("empty image")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def channels(self) -> int:
        return self.samples.shape[2]

    @property
    def sample_count(self) -> int:
        return self.samples.size

    def same_shape(self, other: "Image") -> bool:
        return self.samples.shape == other.samples.shape


def load_png(path) -> Image:
    """Load an 8-bit grayscale or RGB PNG.

    16-bit grayscale and paletted PNGs are converted to 8-bit deterministically
    (high byte, palette expansion). Any alpha is rejected rather than dropped.
    """
    try:
        with _PILImage.open(path) as im:
            if im.format != "PNG":
                raise UnsupportedFormatError(f"not a PNG file: {path}")
            mode = im.mode
            if mode == "L" or mode == "RGB":
                arr = np.asarray(im)
            elif mode == "P":
                if "transparency" in im.info:
                    raise UnsupportedFormatError("paletted PNG with transparency")
                arr = np.asarray(im.convert("RGB"))
            elif mode in ("I", "I;16", "I;16B", "I;16L"):
                wide = np.asarray(im.convert("I"), dtype=np.int64)
                gray = (wide >> 8).astype(np.uint8)
                arr = np.repeat(gray[:, :, None], 3, axis=2)
            elif mode in ("RGBA", "LA", "PA"):
                raise UnsupportedFormatError("alpha channels are not supported")
            else:
                raise UnsupportedFormatError(f"unsupported PNG mode {mode!r}")
    except FileNotFoundError:
        raise
    except UnsupportedFormatError:
        raise
    except (OSError, SyntaxError, ValueError) as exc:
        raise UnsupportedFormatError(f"cannot decode {path}: {exc}") from exc
    return Image(arr)


def save_png(img: Image, path) -> None:
    """Write `img` losslessly; a reload yields a bit-identical sample array."""
    arr = img.samples
    if img.channels == 1:
        pil = _PILImage.fromarray(arr[:, :, 0], mode="L")
    else:
        pil = _PILImage.fromarray(arr, mode="RGB")
    pil.save(path, format="PNG")


def mse(a: Image, b: Image) -> float:
    """Mean squared difference over all samples."""
    if not a.same_shape(b):
        raise DimensionMismatchError(
            f"shape {a.samples.shape} vs {b.samples.shape}"
        )
    diff = a.samples.astype(np.float64) - b.samples.astype(np.float64)
    return float(np.mean(diff * diff))

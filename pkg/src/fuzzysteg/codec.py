"""Embedding and extraction: capacity, keyed ordering, header, bit packing.

Layout contract shared by encoder and decoder:

* Samples are visited in the order of a Fisher-Yates permutation of all
  H*W*C flat sample indices, keyed by a shared 64-bit seed.
* The first 32 permuted samples carry a 32-bit big-endian wire byte length
  in their plain LSBs (depth 1 regardless of method) and never carry payload.
* Remaining samples carry payload bits at the local depth: fixed 1 or 2 for
  the fixed methods, the fuzzy depth of the sample's pixel for adaptive.
* Payload bytes stream MSB-first; inside a sample of depth d the bits fill
  positions d-1 down to 0, most significant first. A trailing partial sample
  leaves its lower positions untouched.

The adaptive depth map depends on payload pressure, which both sides derive
from the wire length (the encoder knows it, the decoder reads the header),
so depth-map recomputation is never circular.
"""

from __future__ import annotations

import math
import struct
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityExceededError, MalformedHeaderError
from .features import DEFAULT_ENTROPY_CONFIG, EntropyConfig, extract_features
from .fuzzy import FuzzySystem, InputPins, default_system, depth_map
from .imaging import Image
from .rng import SplitMix64

METHODS = ("fixed1", "fixed2", "adaptive")
DEFAULT_SEED = 42
HEADER_BITS = 32
MAX_DEPTH = 3

#: Fraction of the bpp target a payload may occupy, per method.
FILL_FACTORS = {"fixed1": 0.70, "fixed2": 0.70, "adaptive": 0.35}

_WIRE_OVERHEAD_BITS = 8 * 44  # serialized crypto framing


@dataclass(frozen=True, eq=False)
class CapacityReport:
    total_bits: int
    per_pixel: np.ndarray


@dataclass(frozen=True, eq=False)
class EmbedPlan:
    """Everything position-dependent the encoder and decoder must agree on."""

    method: str
    seed: int
    depth_plane: np.ndarray
    permutation: np.ndarray


def capacity(depths: np.ndarray, channels: int) -> CapacityReport:
    """Per-pixel bit capacity depth * channels and its total."""
    per_pixel = depths.astype(np.int64) * channels
    return CapacityReport(total_bits=int(per_pixel.sum()), per_pixel=per_pixel)


@lru_cache(maxsize=8)
def _cached_permutation(n: int, seed: int) -> np.ndarray:
    rng = SplitMix64(seed)
    draws = rng.take_u64(n - 1) if n > 1 else np.empty(0, dtype=np.uint64)
    moduli = np.arange(n, 1, -1, dtype=np.uint64)
    js = (draws % moduli).tolist()
    perm = list(range(n))
    i = n - 1
    for j in js:
        perm[i], perm[j] = perm[j], perm[i]
        i -= 1
    out = np.array(perm, dtype=np.int64)
    out.setflags(write=False)
    return out


def keyed_permutation(n: int, seed: int) -> np.ndarray:
    """Fisher-Yates permutation of 0..n-1 driven by SplitMix64(seed)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _cached_permutation(n, seed)


def compute_pressure(payload_bits: int, height: int, width: int, channels: int) -> float:
    """Payload bits normalized against the moderate-depth reference capacity."""
    reference = 2.0 * channels * height * width
    return min(max(payload_bits / reference, 0.0), 1.0)


def plan_payload(bpp: float, height: int, width: int, method: str) -> int:
    """Plaintext byte budget for a target embedding rate.

    The fill factor scales the bpp target down (0.70 fixed, 0.35 adaptive);
    header and crypto framing are then paid out of the scaled budget.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if bpp <= 0:
        raise ValueError("bpp must be positive")
    target_bits = round(bpp * height * width)
    allowed = FILL_FACTORS[method] * target_bits
    return max(0, math.floor((allowed - HEADER_BITS - _WIRE_OVERHEAD_BITS) / 8.0))


def _depth_plane(
    img: Image,
    method: str,
    pressure: float,
    system: FuzzySystem | None,
    pins: InputPins | None,
    cfg: EntropyConfig,
    timings: dict | None,
) -> np.ndarray:
    if method == "fixed1":
        return np.ones((img.height, img.width), dtype=np.uint8)
    if method == "fixed2":
        return np.full((img.height, img.width), 2, dtype=np.uint8)
    t0 = time.perf_counter()
    fm = extract_features(img, cfg)
    t1 = time.perf_counter()
    plane = depth_map(fm, pressure, system or default_system(), pins)
    t2 = time.perf_counter()
    if timings is not None:
        timings["feature"] = t1 - t0
        timings["fuzzy"] = t2 - t1
    return plane


def build_plan(
    img: Image,
    method: str,
    seed: int,
    wire_len: int,
    system: FuzzySystem | None = None,
    pins: InputPins | None = None,
    cfg: EntropyConfig = DEFAULT_ENTROPY_CONFIG,
    timings: dict | None = None,
) -> EmbedPlan:
    """Depth plane plus keyed sample order for a wire of `wire_len` bytes."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    pressure = compute_pressure(8 * wire_len, img.height, img.width, img.channels)
    plane = _depth_plane(img, method, pressure, system, pins, cfg, timings)
    perm = keyed_permutation(img.sample_count, seed)
    return EmbedPlan(method=method, seed=seed, depth_plane=plane, permutation=perm)


def _per_sample_depths(plane: np.ndarray, channels: int) -> np.ndarray:
    return np.repeat(plane.reshape(-1), channels)


def _write_bits(flat, samples, depths, bits) -> None:
    """Scatter a bit stream into the low bits of `samples`, in order."""
    nbits = bits.size
    if nbits == 0:
        return
    cum = np.cumsum(depths)
    starts = cum - depths
    used = starts < nbits
    s_used = samples[used]
    d_used = depths[used]
    st_used = starts[used]
    full = (st_used + d_used) <= nbits
    for d in range(1, MAX_DEPTH + 1):
        sel = full & (d_used == d)
        if not sel.any():
            continue
        idx = s_used[sel]
        st = st_used[sel]
        val = np.zeros(idx.size, dtype=np.uint8)
        for j in range(d):
            val = (val << np.uint8(1)) | bits[st + j]
        window = np.uint8((1 << d) - 1)
        flat[idx] = (flat[idx] & ~window) | val
    partial = np.nonzero(~full)[0]
    if partial.size:
        i = int(partial[0])
        s, d, st = int(s_used[i]), int(d_used[i]), int(st_used[i])
        count = nbits - st
        val = 0
        for j in range(count):
            val = (val << 1) | int(bits[st + j])
        val <<= d - count
        clear = ((1 << d) - 1) ^ ((1 << (d - count)) - 1)
        flat[s] = (int(flat[s]) & (0xFF ^ clear)) | val


def _read_bits(flat, samples, depths, nbits: int) -> np.ndarray:
    """Gather `nbits` from the low bits of `samples`, in order."""
    bits = np.zeros(nbits, dtype=np.uint8)
    if nbits == 0:
        return bits
    cum = np.cumsum(depths)
    starts = cum - depths
    used = starts < nbits
    s_used = samples[used]
    d_used = depths[used]
    st_used = starts[used]
    full = (st_used + d_used) <= nbits
    for d in range(1, MAX_DEPTH + 1):
        sel = full & (d_used == d)
        if not sel.any():
            continue
        vals = flat[s_used[sel]]
        st = st_used[sel]
        for j in range(d):
            bits[st + j] = (vals >> np.uint8(d - 1 - j)) & np.uint8(1)
    partial = np.nonzero(~full)[0]
    if partial.size:
        i = int(partial[0])
        s, d, st = int(s_used[i]), int(d_used[i]), int(st_used[i])
        count = nbits - st
        val = int(flat[s])
        for j in range(count):
            bits[st + j] = (val >> (d - 1 - j)) & 1
    return bits


def embed(
    cover: Image,
    wire: bytes,
    method: str,
    seed: int = DEFAULT_SEED,
    system: FuzzySystem | None = None,
    pins: InputPins | None = None,
    cfg: EntropyConfig = DEFAULT_ENTROPY_CONFIG,
    timings: dict | None = None,
) -> Image:
    """Embed a serialized wire payload; returns the stego image.

    Raises CapacityExceededError when 32 + 8*len(wire) bits exceed what the
    depth plane offers over the non-header samples.
    """
    n = cover.sample_count
    required = HEADER_BITS + 8 * len(wire)
    if n < HEADER_BITS:
        raise CapacityExceededError(required, 0)
    plan = build_plan(cover, method, seed, len(wire), system, pins, cfg, timings)
    t0 = time.perf_counter()
    body = plan.permutation[HEADER_BITS:]
    body_depths = _per_sample_depths(plan.depth_plane, cover.channels)[body]
    usable = int(body_depths.sum())
    if 8 * len(wire) > usable:
        raise CapacityExceededError(required, HEADER_BITS + usable)
    flat = cover.samples.reshape(-1).copy()
    header = plan.permutation[:HEADER_BITS]
    header_bits = np.unpackbits(np.frombuffer(struct.pack(">I", len(wire)), np.uint8))
    flat[header] = (flat[header] & np.uint8(0xFE)) | header_bits
    payload_bits = np.unpackbits(np.frombuffer(wire, dtype=np.uint8))
    _write_bits(flat, body, body_depths, payload_bits)
    if timings is not None:
        timings["embed"] = time.perf_counter() - t0
    return Image(flat.reshape(cover.samples.shape))


def extract(
    stego: Image,
    method: str,
    seed: int = DEFAULT_SEED,
    system: FuzzySystem | None = None,
    pins: InputPins | None = None,
    cfg: EntropyConfig = DEFAULT_ENTROPY_CONFIG,
    timings: dict | None = None,
) -> bytes:
    """Recover the wire bytes by recomputing the plan from the stego image.

    Raises MalformedHeaderError when the decoded length cannot fit the
    carrier; with a wrong seed or method this is the overwhelmingly likely
    outcome (otherwise decryption fails downstream).
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    n = stego.sample_count
    if n < HEADER_BITS:
        raise MalformedHeaderError("carrier too small to hold a header")
    t0 = time.perf_counter()
    perm = keyed_permutation(n, seed)
    flat = stego.samples.reshape(-1)
    header_bits = flat[perm[:HEADER_BITS]] & np.uint8(1)
    wire_len = struct.unpack(">I", np.packbits(header_bits).tobytes())[0]
    if timings is not None:
        timings["extract"] = time.perf_counter() - t0
    if 8 * wire_len > MAX_DEPTH * n:
        raise MalformedHeaderError(
            f"declared wire length {wire_len} exceeds any possible capacity"
        )
    pressure = compute_pressure(8 * wire_len, stego.height, stego.width, stego.channels)
    plane = _depth_plane(stego, method, pressure, system, pins, cfg, timings)
    t1 = time.perf_counter()
    body = perm[HEADER_BITS:]
    body_depths = _per_sample_depths(plane, stego.channels)[body]
    usable = int(body_depths.sum())
    if 8 * wire_len > usable:
        raise MalformedHeaderError(
            f"declared wire length {wire_len} exceeds usable capacity "
            f"{usable // 8} bytes"
        )
    bits = _read_bits(flat, body, body_depths, 8 * wire_len)
    wire = np.packbits(bits).tobytes()
    if timings is not None:
        timings["extract"] = timings.get("extract", 0.0) + (time.perf_counter() - t1)
    return wire

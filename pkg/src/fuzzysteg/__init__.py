"""Adaptive fuzzy-controlled LSB steganography toolkit.

Library layout mirrors the pipeline: imaging (carriers), corpus (synthetic
covers), features (LSB-invariant maps), fuzzy (depth controller), crypto
(payload protection), codec (embed/extract), steganalysis (detectors),
evaluation (fidelity metrics and statistics), bench (experiment driver).
"""

from .codec import DEFAULT_SEED, METHODS, embed, extract, plan_payload
from .corpus import CATEGORIES, CorpusSpec, generate_category, generate_corpus
from .crypto import KdfParams, WirePayload, open_payload, seal
from .features import EntropyConfig, FeatureMaps, extract_features
from .fuzzy import FuzzySystem, InputPins, default_system, depth_map, infer_depth
from .imaging import Image, load_png, mse, save_png
from .steganalysis import (
    DetectionResult,
    chi_square_attack,
    rs_analysis,
    sample_pair_analysis,
)
from .evaluation import kl_divergence, paired_t_test, psnr, ssim

__version__ = "0.1.0"

__all__ = [
    "CATEGORIES",
    "CorpusSpec",
    "DEFAULT_SEED",
    "DetectionResult",
    "EntropyConfig",
    "FeatureMaps",
    "FuzzySystem",
    "Image",
    "InputPins",
    "KdfParams",
    "METHODS",
    "WirePayload",
    "chi_square_attack",
    "default_system",
    "depth_map",
    "embed",
    "extract",
    "extract_features",
    "generate_category",
    "generate_corpus",
    "infer_depth",
    "kl_divergence",
    "load_png",
    "mse",
    "open_payload",
    "paired_t_test",
    "plan_payload",
    "psnr",
    "rs_analysis",
    "sample_pair_analysis",
    "save_png",
    "seal",
    "ssim",
]

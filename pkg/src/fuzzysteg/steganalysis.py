"""Classical LSB detectors plus the simple trained feature detector.

All detectors operate on a single plane: the green channel of RGB images
(channel mixing would blur the pairs-of-values structure the attacks
exploit), or the sole channel of grayscale images. The chi-square attack is
the exception: it pools the intensity histogram across channels.

RS and SPA share two conventions: estimates are clamped to [0, 1] before
thresholding, and a negative discriminant in the final quadratic reports
full embedding (geometrically the measured point lies past the model's
crossing, which only happens at saturation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyTrainingSetError,
    InsufficientDataError,
    ModelNotTrainedError,
)
from .imaging import Image

_RS_GROUP = 4


@dataclass(frozen=True)
class DetectorThresholds:
    """Calibration constants; the paper's detection percentages depend on them."""

    rs_rate: float = 0.018
    spa_rate: float = 0.03
    chi2_p: float = 0.95


DEFAULT_THRESHOLDS = DetectorThresholds()


@dataclass(frozen=True)
class DetectionResult:
    statistic: float
    detected: bool
    threshold: float


def analysis_plane(img: Image) -> np.ndarray:
    """Green channel for RGB, the single channel otherwise."""
    if img.channels == 3:
        return img.samples[:, :, 1]
    return img.samples[:, :, 0]


# --- regularized incomplete gamma (for the chi-square p-value) -------------

_GAMMA_EPS = 3e-12
_GAMMA_ITMAX = 500


def _gamma_p_series(a: float, x: float) -> float:
    """Lower regularized gamma P(a, x) by series; valid for x < a + 1."""
    term = 1.0 / a
    total = term
    n = a
    for _ in range(_GAMMA_ITMAX):
        n += 1.0
        term *= x / n
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a: float, x: float) -> float:
    """Upper regularized gamma Q(a, x) by continued fraction; for x >= a + 1."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_ITMAX + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def chi2_sf(stat: float, dof: float) -> float:
    """P(chi2_dof >= stat), via the regularized incomplete gamma function."""
    if stat <= 0.0:
        return 1.0
    a = dof / 2.0
    x = stat / 2.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_contfrac(a, x)


# --- RS analysis ------------------------------------------------------------


def _rs_counts(groups: np.ndarray, shifted: bool) -> tuple:
    """(regular, singular) counts under the mask [0, 1, 1, 0].

    `shifted` selects the F-1 flip (-1<->0, 1<->2, ...) instead of F1.
    """
    flipped = groups.copy()
    inner = flipped[:, 1:3]
    if shifted:
        flipped[:, 1:3] = ((inner + 1) ^ 1) - 1
    else:
        flipped[:, 1:3] = inner ^ 1
    f0 = np.abs(np.diff(groups, axis=1)).sum(axis=1)
    f1 = np.abs(np.diff(flipped, axis=1)).sum(axis=1)
    return int((f1 > f0).sum()), int((f1 < f0).sum())


def _quadratic_root(ca: float, cb: float, cc: float):
    """Smaller-magnitude root; None signals a negative discriminant."""
    if ca == 0.0:
        if cb == 0.0:
            return 0.0
        return -cc / cb
    disc = cb * cb - 4.0 * ca * cc
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    r1 = (-cb + sq) / (2.0 * ca)
    r2 = (-cb - sq) / (2.0 * ca)
    return r1 if abs(r1) < abs(r2) else r2


def rs_estimate(plane: np.ndarray) -> float:
    """RS-estimated embedding rate of one plane, clamped to [0, 1]."""
    x = plane.astype(np.int64)
    h, w = x.shape
    ngroups = w // _RS_GROUP
    if ngroups == 0:
        return 0.0
    groups = x[:, : ngroups * _RS_GROUP].reshape(h * ngroups, _RS_GROUP)
    rm, sm = _rs_counts(groups, shifted=False)
    rmm, smm = _rs_counts(groups, shifted=True)
    flipped_all = groups ^ 1
    rm1, sm1 = _rs_counts(flipped_all, shifted=False)
    rmm1, smm1 = _rs_counts(flipped_all, shifted=True)
    d0 = rm - sm
    d1 = rm1 - sm1
    dm0 = rmm - smm
    dm1 = rmm1 - smm1
    if d0 == 0 and d1 == 0 and dm0 == 0 and dm1 == 0:
        return 0.0
    z = _quadratic_root(2.0 * (d1 + d0), dm0 - dm1 - d1 - 3.0 * d0, float(d0 - dm0))
    if z is None or z == 0.5:
        return 1.0
    rate = z / (z - 0.5)
    return min(max(rate, 0.0), 1.0)


def rs_analysis(img: Image, thresholds: DetectorThresholds = DEFAULT_THRESHOLDS) -> DetectionResult:
    """Dual-flip regular/singular analysis with 1x4 groups and mask [0,1,1,0]."""
    rate = rs_estimate(analysis_plane(img))
    return DetectionResult(
        statistic=rate,
        detected=rate > thresholds.rs_rate,
        threshold=thresholds.rs_rate,
    )


# --- chi-square (pairs of values) -------------------------------------------


def chi_square_attack(
    img: Image, thresholds: DetectorThresholds = DEFAULT_THRESHOLDS
) -> DetectionResult:
    """Pairs-of-values test on the channel-pooled 256-level histogram.

    The statistic is the p-value that the observed pair counts match the
    LSB-equalized hypothesis; a value near 1 marks the image as carrying
    embedded data.
    """
    hist = np.bincount(img.samples.reshape(-1), minlength=256).astype(np.float64)
    even = hist[0::2]
    odd = hist[1::2]
    totals = even + odd
    usable = totals > 4
    k = int(usable.sum())
    if k < 2:
        raise InsufficientDataError(f"only {k} usable histogram pairs")
    expected = totals[usable] / 2.0
    stat = float((((even[usable] - expected) ** 2) / expected).sum())
    p = chi2_sf(stat, k - 1)
    return DetectionResult(
        statistic=p,
        detected=p >= thresholds.chi2_p,
        threshold=thresholds.chi2_p,
    )


# --- sample pair analysis ----------------------------------------------------


def spa_estimate(plane: np.ndarray) -> float:
    """Close-pair SPA embedding-rate estimate, clamped to [0, 1].

    Horizontally adjacent (overlapping) pairs (u, v) partition into
    X: v even and u < v, or v odd and u > v;
    Y: the reverse inequalities;
    C0: same bucket floor(u/2) == floor(v/2), of which W are the unequal
    pairs. With A = X - (Y - W), the rate solves
    0.5*C0*p^2 - (C0 - A)*p + (W - A) = 0.
    """
    x = plane.astype(np.int64)
    if x.shape[1] < 2:
        return 0.0
    u = x[:, :-1].reshape(-1)
    v = x[:, 1:].reshape(-1)
    v_even = (v & 1) == 0
    x_count = int(((v_even & (u < v)) | (~v_even & (u > v))).sum())
    y_count = int(((v_even & (u > v)) | (~v_even & (u < v))).sum())
    same_bucket = (u >> 1) == (v >> 1)
    c0 = int(same_bucket.sum())
    w_count = int((same_bucket & (u != v)).sum())
    if c0 == 0:
        return 0.0
    a_term = x_count - (y_count - w_count)
    p = _quadratic_root(0.5 * c0, -(c0 - a_term), float(w_count - a_term))
    if p is None:
        return 1.0
    return min(max(p, 0.0), 1.0)


def sample_pair_analysis(
    img: Image, thresholds: DetectorThresholds = DEFAULT_THRESHOLDS
) -> DetectionResult:
    rate = spa_estimate(analysis_plane(img))
    return DetectionResult(
        statistic=rate,
        detected=rate > thresholds.spa_rate,
        threshold=thresholds.spa_rate,
    )


def run_detectors(
    img: Image, thresholds: DetectorThresholds = DEFAULT_THRESHOLDS
) -> dict:
    """All three classical detectors keyed by name."""
    return {
        "rs": rs_analysis(img, thresholds),
        "chi2": chi_square_attack(img, thresholds),
        "spa": sample_pair_analysis(img, thresholds),
    }


# --- trained feature detector ------------------------------------------------


def detector_features(img: Image) -> np.ndarray:
    """Feature vector: RS rate, SPA rate, chi-square p, LSB bias, LSB correlation."""
    plane = analysis_plane(img)
    lsb = (plane & 1).astype(np.float64)
    bias = abs(float(lsb.mean()) - 0.5)
    a = lsb[:, :-1].reshape(-1)
    b = lsb[:, 1:].reshape(-1)
    sa = a.std()
    sb = b.std()
    corr = float(((a - a.mean()) * (b - b.mean())).mean() / (sa * sb)) if sa > 0 and sb > 0 else 0.0
    chi_p = chi_square_attack(img).statistic
    return np.array([rs_estimate(plane), spa_estimate(plane), chi_p, bias, corr])


@dataclass(frozen=True, eq=False)
class FeatureDetectorModel:
    """Standardized class-mean direction with a balanced-accuracy threshold."""

    mean: np.ndarray = field(default=None)
    scale: np.ndarray = field(default=None)
    weights: np.ndarray = field(default=None)
    threshold: float = 0.0
    trained: bool = False

    def score(self, feats: np.ndarray) -> float:
        z = (feats - self.mean) / self.scale
        return float(z @ self.weights)


def train_feature_detector(covers, stegos) -> FeatureDetectorModel:
    """Fit the linear score and pick the threshold maximizing balanced accuracy.

    Deterministic given the inputs; ties resolve to the smallest threshold.
    """
    covers = list(covers)
    stegos = list(stegos)
    if not covers or not stegos:
        raise EmptyTrainingSetError("need at least one cover and one stego image")
    fc = np.array([detector_features(im) for im in covers])
    fs = np.array([detector_features(im) for im in stegos])
    both = np.concatenate([fc, fs])
    mean = both.mean(axis=0)
    scale = both.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    zc = (fc - mean) / scale
    zs = (fs - mean) / scale
    weights = zs.mean(axis=0) - zc.mean(axis=0)
    sc = zc @ weights
    ss = zs @ weights
    candidates = np.unique(np.concatenate([sc, ss]))
    cuts = np.concatenate(
        [[candidates[0] - 1.0], (candidates[:-1] + candidates[1:]) / 2.0, [candidates[-1] + 1.0]]
    )
    best_cut = cuts[0]
    best_acc = -1.0
    for cut in cuts:
        acc = 0.5 * ((ss > cut).mean() + (sc <= cut).mean())
        if acc > best_acc:
            best_acc = acc
            best_cut = cut
    return FeatureDetectorModel(
        mean=mean, scale=scale, weights=weights, threshold=float(best_cut), trained=True
    )


def feature_detector(img: Image, model: FeatureDetectorModel) -> DetectionResult:
    if model is None or not model.trained:
        raise ModelNotTrainedError("feature detector has not been trained")
    score = model.score(detector_features(img))
    return DetectionResult(
        statistic=score,
        detected=score > model.threshold,
        threshold=model.threshold,
    )

"""Mamdani inference mapping (entropy, edge, pressure) to embedding depth 1-3.

Rule firing uses the minimum t-norm, aggregation the maximum s-norm, and
defuzzification the centroid of the aggregated output shape. The centroid is
evaluated on a fixed uniform grid of 201 points over [1, 3] with
trapezoid-rule quadrature in a fixed reduction order, so encoder and decoder
produce bitwise-identical depth maps from identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .features import ENTROPY_MAX_BITS, FeatureMaps

INPUT_LABELS = ("low", "medium", "high")
OUTPUT_LABELS = ("shallow", "moderate", "deep")
CENTROID_POINTS = 201
DEPTH_DOMAIN = (1.0, 3.0)

_CHUNK = 8192


@dataclass(frozen=True)
class Trapezoid:
    """Trapezoidal membership function with knots a <= b <= c <= d."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not (self.a <= self.b <= self.c <= self.d):
            raise ValueError(f"knots must be ordered: {self}")

    def mu(self, x) -> np.ndarray:
        """Membership degree; vertical flanks (b == a or d == c) are crisp."""
        x = np.asarray(x, dtype=np.float64)
        if self.b > self.a:
            left = (x - self.a) / (self.b - self.a)
        else:
            left = np.where(x >= self.a, np.inf, -np.inf)
        if self.d > self.c:
            right = (self.d - x) / (self.d - self.c)
        else:
            right = np.where(x <= self.d, np.inf, -np.inf)
        val = np.minimum(np.minimum(left, 1.0), right)
        return np.maximum(val, 0.0)

    def as_tuple(self) -> tuple:
        return (self.a, self.b, self.c, self.d)


def trapezoid_mu(x, t: Trapezoid):
    """Functional form of Trapezoid.mu for scalar inputs."""
    return float(t.mu(x))


@dataclass(frozen=True)
class InputPins:
    """Optional overrides that pin fuzzy inputs to constants (ablation studies)."""

    entropy: float | None = None
    edge: float | None = None
    pressure: float | None = None


@dataclass(frozen=True, eq=False)
class FuzzySystem:
    """Membership functions plus the full 27-entry rule table."""

    entropy_sets: Mapping[str, Trapezoid]
    edge_sets: Mapping[str, Trapezoid]
    pressure_sets: Mapping[str, Trapezoid]
    output_sets: Mapping[str, Trapezoid]
    rules: Mapping[tuple, str]

    def __post_init__(self):
        for sets, labels in (
            (self.entropy_sets, INPUT_LABELS),
            (self.edge_sets, INPUT_LABELS),
            (self.pressure_sets, INPUT_LABELS),
            (self.output_sets, OUTPUT_LABELS),
        ):
            if tuple(sets.keys()) != labels:
                raise ValueError(f"expected labels {labels}, got {tuple(sets.keys())}")
        keys = set(self.rules.keys())
        expected = {
            (h, e, p)
            for h in INPUT_LABELS
            for e in INPUT_LABELS
            for p in INPUT_LABELS
        }
        if keys != expected:
            raise ValueError("rule table must cover exactly the 27 label triples")
        for verdict in self.rules.values():
            if verdict not in OUTPUT_LABELS:
                raise ValueError(f"unknown consequent {verdict!r}")


def _score_rule_table() -> dict:
    """Materialize the rule table from a pressure-weighted label score.

    Labels score low=0, medium=1, high=2; the total is
    ``s = s_entropy + s_edge + 2 * s_pressure`` and the consequent is shallow
    for s <= 2, moderate for 3-5, deep for >= 6. Pressure carries double
    weight so that demand, not texture alone, unlocks deep embedding. The
    table reproduces the three anchor rules (L,L,L)->shallow,
    (M,M,M)->moderate, (H,H,H)->deep and is monotone in every input.
    """
    table = {}
    for hi, h in enumerate(INPUT_LABELS):
        for ei, e in enumerate(INPUT_LABELS):
            for pi, p in enumerate(INPUT_LABELS):
                s = hi + ei + 2 * pi
                if s <= 2:
                    table[(h, e, p)] = "shallow"
                elif s <= 5:
                    table[(h, e, p)] = "moderate"
                else:
                    table[(h, e, p)] = "deep"
    return table


def default_system() -> FuzzySystem:
    """The stock controller.

    Entropy and pressure use a symmetric 50%-overlap partition of [0, 1].
    The edge partition sits higher: global-max normalization concentrates
    most pixels of any texture near the low end of [0, 1], so "low edge"
    extends to 0.55 to keep routinely-attained magnitudes from reading as
    structure.
    """
    symmetric = {
        "low": Trapezoid(0.0, 0.0, 0.2, 0.4),
        "medium": Trapezoid(0.2, 0.4, 0.6, 0.8),
        "high": Trapezoid(0.6, 0.8, 1.0, 1.0),
    }
    edge = {
        "low": Trapezoid(0.0, 0.0, 0.35, 0.55),
        "medium": Trapezoid(0.35, 0.55, 0.75, 0.85),
        "high": Trapezoid(0.75, 0.85, 1.0, 1.0),
    }
    outputs = {
        "shallow": Trapezoid(1.0, 1.0, 1.3, 1.7),
        "moderate": Trapezoid(1.3, 1.7, 2.3, 2.7),
        "deep": Trapezoid(2.3, 2.7, 3.0, 3.0),
    }
    return FuzzySystem(
        entropy_sets=dict(symmetric),
        edge_sets=edge,
        pressure_sets=dict(symmetric),
        output_sets=dict(outputs),
        rules=_score_rule_table(),
    )


def _centroid_grid(system: FuzzySystem):
    lo, hi = DEPTH_DOMAIN
    grid = np.linspace(lo, hi, CENTROID_POINTS)
    step = (hi - lo) / (CENTROID_POINTS - 1)
    weights = np.full(CENTROID_POINTS, step)
    weights[0] = weights[-1] = step / 2.0
    members = np.stack(
        [system.output_sets[label].mu(grid) for label in OUTPUT_LABELS]
    )
    return grid, weights, members


def _rule_strengths(h, e, p_memberships, system: FuzzySystem):
    """Clip level per output set: max over rules of min-fired antecedents.

    h, e are flat arrays; pressure memberships are scalars (pressure is
    constant per image).
    """
    mu_h = {lab: system.entropy_sets[lab].mu(h) for lab in INPUT_LABELS}
    mu_e = {lab: system.edge_sets[lab].mu(e) for lab in INPUT_LABELS}
    beta = {lab: np.zeros_like(h) for lab in OUTPUT_LABELS}
    for hl in INPUT_LABELS:
        for el in INPUT_LABELS:
            pair = np.minimum(mu_h[hl], mu_e[el])
            for pl in INPUT_LABELS:
                mp = p_memberships[pl]
                if mp == 0.0:
                    continue
                fired = np.minimum(pair, mp)
                out = system.rules[(hl, el, pl)]
                np.maximum(beta[out], fired, out=beta[out])
    return np.stack([beta[lab] for lab in OUTPUT_LABELS], axis=1)


def _centroids(beta: np.ndarray, system: FuzzySystem) -> np.ndarray:
    """Centroid of max-aggregated clipped output sets, per row of beta (N, 3).

    The grid reduction runs in float32 (fixed order, deterministic); rows
    with an all-zero aggregate fall back to depth 1 (conservative and
    unreachable with full-coverage membership sets).
    """
    grid, weights, members = _centroid_grid(system)
    w32 = weights.astype(np.float32)
    nw32 = (grid * weights).astype(np.float32)
    m32 = members.astype(np.float32)
    b32 = beta.astype(np.float32)
    out = np.empty(len(beta))
    for start in range(0, len(beta), _CHUNK):
        block = b32[start : start + _CHUNK]
        agg = np.minimum(block[:, 0, None], m32[0][None, :])
        for o in range(1, len(OUTPUT_LABELS)):
            np.maximum(agg, np.minimum(block[:, o, None], m32[o][None, :]), out=agg)
        den = (agg * w32).sum(axis=1)
        num = (agg * nw32).sum(axis=1)
        vals = np.where(den > 0.0, num / np.where(den > 0.0, den, np.float32(1.0)), 1.0)
        out[start : start + _CHUNK] = vals
    return out


def quantize_depth(d_star: np.ndarray) -> np.ndarray:
    """Crisp depth: clip(floor(d* + 0.5), 1, 3)."""
    return np.clip(np.floor(np.asarray(d_star) + 0.5), 1, 3).astype(np.uint8)


def infer_many(h_norm: np.ndarray, e: np.ndarray, pressure: float, system: FuzzySystem):
    """Vectorized inference; returns (d_star, depth) arrays shaped like h_norm."""
    h_flat = np.asarray(h_norm, dtype=np.float64).ravel()
    e_flat = np.asarray(e, dtype=np.float64).ravel()
    p_memberships = {
        lab: float(system.pressure_sets[lab].mu(pressure)) for lab in INPUT_LABELS
    }
    beta = _rule_strengths(h_flat, e_flat, p_memberships, system)
    d_star = _centroids(beta, system).reshape(np.shape(h_norm))
    return d_star, quantize_depth(d_star)


def infer_depth(h_norm: float, e: float, pressure: float, system: FuzzySystem):
    """Single-pixel inference; returns (d_star, depth)."""
    d_star, depth = infer_many(np.array([h_norm]), np.array([e]), pressure, system)
    return float(d_star[0]), int(depth[0])


def depth_map(
    fm: FeatureMaps,
    pressure: float,
    system: FuzzySystem | None = None,
    pins: InputPins | None = None,
) -> np.ndarray:
    """Per-pixel embedding depth in {1, 2, 3} for the given feature maps.

    Entropy is normalized to [0, 1] by its 6-bit ceiling before fuzzification.
    `pins` replaces selected inputs with constants before fuzzification.
    """
    system = system or default_system()
    h_norm = np.clip(fm.entropy / ENTROPY_MAX_BITS, 0.0, 1.0)
    e = np.clip(fm.edge, 0.0, 1.0)
    if pins is not None:
        if pins.entropy is not None:
            h_norm = np.full_like(h_norm, pins.entropy)
        if pins.edge is not None:
            e = np.full_like(e, pins.edge)
        if pins.pressure is not None:
            pressure = pins.pressure
    _, depth = infer_many(h_norm, e, pressure, system)
    return depth


def system_to_dict(system: FuzzySystem) -> dict:
    """JSON-ready description of every trapezoid and all 27 rules."""
    return {
        "inputs": {
            "entropy": {k: list(t.as_tuple()) for k, t in system.entropy_sets.items()},
            "edge": {k: list(t.as_tuple()) for k, t in system.edge_sets.items()},
            "pressure": {k: list(t.as_tuple()) for k, t in system.pressure_sets.items()},
        },
        "output": {k: list(t.as_tuple()) for k, t in system.output_sets.items()},
        "rules": [
            {"entropy": h, "edge": e, "pressure": p, "depth": out}
            for (h, e, p), out in sorted(system.rules.items())
        ],
    }


def system_from_dict(cfg: dict) -> FuzzySystem:
    def sets(block):
        return {k: Trapezoid(*map(float, v)) for k, v in block.items()}

    rules = {
        (r["entropy"], r["edge"], r["pressure"]): r["depth"] for r in cfg["rules"]
    }
    return FuzzySystem(
        entropy_sets=sets(cfg["inputs"]["entropy"]),
        edge_sets=sets(cfg["inputs"]["edge"]),
        pressure_sets=sets(cfg["inputs"]["pressure"]),
        output_sets=sets(cfg["output"]),
        rules=rules,
    )

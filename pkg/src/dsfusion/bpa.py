"""Basic-probability-assignment builders and their training helpers.

Four families of mass assignment are provided: a plain sigmoid around a
trained threshold (binary frames), a scaled sigmoid with explicit floor,
ceiling and ignorance mass, a lookup table for binary signals, and two
three-class assignments driven by per-class value ranges and per-class
means. Training helpers derive the thresholds, ranges, means and the
feature-selection scores from labelled samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

from .evidence import Frame, MassFunction, make_frame

BINARY_LABELS = ("normal", "abnormal")
BINARY_FRAME = make_frame(BINARY_LABELS)

ROW_TOL = 1e-9

# Saturated sigmoids are clamped so both hypotheses keep a sliver of mass;
# finite precision must not manufacture certainty.
MASS_EPS = 1e-15

Sample = tuple[Sequence[float], int]


class DegenerateFeatureError(ValueError):
    """A feature whose pooled values have zero spread cannot be scored."""


def _logistic(x: float) -> float:
    # 1 / (1 + e^-x) with overflow guards; math.exp overflows past ~709.
    if x > 709:
        return 1.0
    if x < -709:
        return 0.0
    return 1.0 / (1.0 + math.exp(-x))


def _sample_sd(values: Sequence[float]) -> float:
    # Sample (n-1) standard deviation in plain float arithmetic;
    # statistics.stdev's exact-fraction path is needlessly slow here.
    n = len(values)
    mean = sum(values) / n
    return math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))


@dataclass(frozen=True)
class SigmoidBpa:
    """Mass assignment sliding from normal to abnormal around a threshold."""

    threshold: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.threshold):
            raise ValueError(f"threshold must be finite, got {self.threshold}")


@dataclass(frozen=True)
class ScaledSigmoidBpa:
    """Sigmoid squeezed between a floor and ceiling, with fixed ignorance mass."""

    threshold: float
    floor: float
    ceiling: float
    theta_mass: float

    def __post_init__(self) -> None:
        if not 0 <= self.floor < self.ceiling <= 1:
            raise ValueError(f"need 0 <= floor < ceiling <= 1, got {self.floor}, {self.ceiling}")
        if not 0 < self.theta_mass < 1:
            raise ValueError(f"theta_mass must be in (0, 1), got {self.theta_mass}")
        if self.ceiling + self.theta_mass > 1 + 1e-12:
            raise ValueError("ceiling + theta_mass exceeds 1; abnormal mass would go negative")


@dataclass(frozen=True)
class TableBpa:
    """Per-signal-value rows of (m_normal, m_abnormal, m_theta), indexed 0/1."""

    rows: tuple[tuple[float, float, float], tuple[float, float, float]]

    def __post_init__(self) -> None:
        for value, row in enumerate(self.rows):
            if len(row) != 3 or any(not 0 <= v <= 1 for v in row):
                raise ValueError(f"row {value} entries must lie in [0, 1]: {row}")
            if abs(sum(row) - 1.0) > ROW_TOL:
                raise ValueError(f"row {value} sums to {sum(row)!r}, expected 1")


@dataclass(frozen=True)
class BoundaryModel:
    """Observed (min, max) value range per feature and class."""

    bounds: tuple[tuple[tuple[float, float], ...], ...]

    def __post_init__(self) -> None:
        for f, per_class in enumerate(self.bounds):
            for c, (lo, hi) in enumerate(per_class):
                if lo > hi:
                    raise ValueError(f"feature {f} class {c}: min {lo} exceeds max {hi}")

    @property
    def n_features(self) -> int:
        return len(self.bounds)

    def feature_bounds(self, feature: int) -> tuple[tuple[float, float], ...]:
        return self.bounds[feature]


@dataclass(frozen=True)
class DistanceModel:
    """Per-class mean of one feature, for nearest-mean assignment."""

    feature: int
    means: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(not math.isfinite(m) for m in self.means):
            raise ValueError(f"class means must be finite: {self.means}")


def modified_median_threshold(
    values: Sequence[float], normal_count: int, total_count: int
) -> float:
    """The k-th smallest value, with k set by the normal-class fraction.

    k = round(len(values) * normal_count / total_count), clamped to a valid
    1-based rank. ``normal_count`` and ``total_count`` describe the training
    labels; ``values`` may be a subset of the training column (e.g. with
    missing cells removed), in which case k scales with it.
    """
    if not values:
        raise ValueError("cannot take a threshold of an empty value list")
    if not 0 < normal_count < total_count:
        raise ValueError(f"need 0 < normal_count < total_count, got {normal_count}/{total_count}")
    k = math.floor(len(values) * normal_count / total_count + 0.5)
    k = min(max(k, 1), len(values))
    return sorted(values)[k - 1]


def sigmoid_mass(value: float, bpa: SigmoidBpa, frame: Frame = BINARY_FRAME) -> MassFunction:
    """m(normal) = 1 / (1 + e^(value - threshold)); the rest goes to abnormal.

    Saturation is clamped to ``MASS_EPS`` so both singletons stay focal.
    """
    if not math.isfinite(value):
        raise ValueError(f"feature value must be finite, got {value}")
    m_normal = _logistic(bpa.threshold - value)
    m_normal = min(max(m_normal, MASS_EPS), 1.0 - MASS_EPS)
    return MassFunction(frame, {1: m_normal, 2: 1.0 - m_normal})


def scaled_sigmoid_mass(
    value: float, bpa: ScaledSigmoidBpa, frame: Frame = BINARY_FRAME
) -> MassFunction:
    """Sigmoid mass between floor and ceiling, with fixed ignorance mass."""
    if value < 0:
        raise ValueError(f"signal value must be non-negative, got {value}")
    m_normal = (bpa.ceiling - bpa.floor) * _logistic(bpa.threshold - value) + bpa.floor
    return _scaled_mass_cached(m_normal, bpa.theta_mass, frame)


@lru_cache(maxsize=8192)
def _scaled_mass_cached(m_normal: float, theta_mass: float, frame: Frame) -> MassFunction:
    # The sigmoid saturates outside a narrow band, so sweeps over wide value
    # ranges produce few distinct masses; keying on the computed value keeps
    # the cache small.
    return MassFunction(frame, {1: m_normal, 2: 1.0 - m_normal - theta_mass, 3: theta_mass})


def table_mass(signal_value: int, bpa: TableBpa, frame: Frame = BINARY_FRAME) -> MassFunction:
    """Exact row lookup for a binary signal."""
    if signal_value not in (0, 1):
        raise ValueError(f"binary signal value must be 0 or 1, got {signal_value!r}")
    return _table_mass_cached(signal_value, bpa, frame)


@lru_cache(maxsize=None)
def _table_mass_cached(signal_value: int, bpa: TableBpa, frame: Frame) -> MassFunction:
    m_normal, m_abnormal, m_theta = bpa.rows[signal_value]
    return MassFunction(frame, {1: m_normal, 2: m_abnormal, 3: m_theta})


def fit_boundaries(samples: Sequence[Sample], n_features: int, n_classes: int = 3) -> BoundaryModel:
    """Observed (min, max) per feature and class over labelled samples."""
    per_class: list[list[list[float]]] = [
        [[] for _ in range(n_classes)] for _ in range(n_features)
    ]
    for features, label in samples:
        for f in range(n_features):
            per_class[f][label].append(features[f])
    bounds = []
    for f in range(n_features):
        row = []
        for c in range(n_classes):
            values = per_class[f][c]
            if not values:
                raise ValueError(f"class {c} has no training records")
            row.append((min(values), max(values)))
        bounds.append(tuple(row))
    return BoundaryModel(tuple(bounds))


def boundary_mass(
    value: float,
    class_bounds: Sequence[tuple[float, float]],
    frame: Frame,
    confidence: float = 0.9,
) -> MassFunction:
    """Mass from range membership: which classes' observed range holds the value.

    The membership set gets ``confidence`` and the frame the remainder;
    membership in every class collapses to total ignorance, membership in
    none falls back to the class whose range is nearest.
    """
    if len(class_bounds) != 3 or frame.size != 3:
        raise ValueError("boundary assignment is defined over exactly three classes")
    bits = 0
    for c, (lo, hi) in enumerate(class_bounds):
        if lo <= value <= hi:
            bits |= 1 << c
    full = frame.full_mask
    if bits == full:
        return MassFunction(frame, {full: 1.0})
    if bits == 0:
        distances = [
            max(lo - value, value - hi) for lo, hi in class_bounds
        ]
        bits = 1 << min(range(3), key=lambda c: (distances[c], c))
    return MassFunction(frame, {bits: confidence, full: 1.0 - confidence})


def fsv(grouped: Sequence[Sequence[float]]) -> float:
    """Feature-selection value: product of per-class sample sds over the union sd.

    Smaller is better: tight classes that pool into a spread-out union
    separate well on this feature.
    """
    if len(grouped) < 2:
        raise ValueError("feature selection needs at least two classes")
    if any(len(values) < 2 for values in grouped):
        raise ValueError("every class needs at least two values for a sample sd")
    union: list[float] = [v for values in grouped for v in values]
    union_sd = _sample_sd(union)
    if union_sd == 0:
        raise DegenerateFeatureError("all pooled values identical; feature carries no signal")
    numerator = 1.0
    for values in grouped:
        numerator *= _sample_sd(values)
    return numerator / union_sd


def select_feature(samples: Sequence[Sample], classes: Sequence[int]) -> int:
    """The feature index with the smallest selection value over the named classes.

    Degenerate features (zero pooled spread) are skipped; ties go to the
    lowest feature index.
    """
    n_features = len(samples[0][0])
    best_feature = -1
    best_value = math.inf
    for f in range(n_features):
        grouped = [[feats[f] for feats, label in samples if label == c] for c in classes]
        try:
            value = fsv(grouped)
        except DegenerateFeatureError:
            continue
        if value < best_value:
            best_value = value
            best_feature = f
    if best_feature < 0:
        raise DegenerateFeatureError("every feature is degenerate for these classes")
    return best_feature


def distance_mass(
    value: float, model: DistanceModel, frame: Frame, confidence: float = 0.8
) -> MassFunction:
    """Mass on the class whose mean is nearest to the value; rest on the frame.

    Ties go to the lowest class index.
    """
    if len(model.means) != 3 or frame.size != 3:
        raise ValueError("distance assignment is defined over exactly three classes")
    diffs = [abs(value - mean) for mean in model.means]
    nearest = min(range(3), key=lambda c: (diffs[c], c))
    return MassFunction(frame, {1 << nearest: confidence, frame.full_mask: 1.0 - confidence})


BpaModel = SigmoidBpa | ScaledSigmoidBpa | TableBpa | BoundaryModel | DistanceModel

_BPA_KINDS = {
    SigmoidBpa: "sigmoid",
    ScaledSigmoidBpa: "scaled_sigmoid",
    TableBpa: "table",
    BoundaryModel: "boundary",
    DistanceModel: "distance",
}


def bpa_to_dict(model: BpaModel) -> dict:
    """JSON-ready dict for a bpa model: a kind tag plus the numeric fields."""
    kind = _BPA_KINDS.get(type(model))
    if kind is None:
        raise TypeError(f"not a bpa model: {type(model).__name__}")
    if isinstance(model, SigmoidBpa):
        return {"kind": kind, "threshold": model.threshold}
    if isinstance(model, ScaledSigmoidBpa):
        return {
            "kind": kind,
            "threshold": model.threshold,
            "floor": model.floor,
            "ceiling": model.ceiling,
            "theta_mass": model.theta_mass,
        }
    if isinstance(model, TableBpa):
        return {"kind": kind, "rows": [list(row) for row in model.rows]}
    if isinstance(model, BoundaryModel):
        return {
            "kind": kind,
            "bounds": [[list(rng) for rng in per_class] for per_class in model.bounds],
        }
    return {"kind": kind, "feature": model.feature, "means": list(model.means)}


def bpa_from_dict(data: Mapping) -> BpaModel:
    """Inverse of :func:`bpa_to_dict`."""
    kind = data.get("kind")
    if kind == "sigmoid":
        return SigmoidBpa(float(data["threshold"]))
    if kind == "scaled_sigmoid":
        return ScaledSigmoidBpa(
            float(data["threshold"]),
            float(data["floor"]),
            float(data["ceiling"]),
            float(data["theta_mass"]),
        )
    if kind == "table":
        rows = tuple(tuple(float(v) for v in row) for row in data["rows"])
        return TableBpa(rows)  # type: ignore[arg-type]
    if kind == "boundary":
        bounds = tuple(
            tuple((float(lo), float(hi)) for lo, hi in per_class) for per_class in data["bounds"]
        )
        return BoundaryModel(bounds)
    if kind == "distance":
        return DistanceModel(int(data["feature"]), tuple(float(m) for m in data["means"]))
    raise ValueError(f"unknown bpa kind {kind!r}")

"""The three fusion classifiers: binary threshold fusion, three-step
three-class fusion, and table-driven email-signal fusion.

Models are immutable values built by their trainers (or from fixed expert
settings, for email); classification is a pure function of record and
model, so batches may fan out across workers freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .bpa import (
    BoundaryModel,
    DistanceModel,
    ScaledSigmoidBpa,
    SigmoidBpa,
    TableBpa,
    bpa_from_dict,
    bpa_to_dict,
    distance_mass,
    boundary_mass,
    fit_boundaries,
    modified_median_threshold,
    scaled_sigmoid_mass,
    select_feature,
    sigmoid_mass,
    table_mass,
)
from .evidence import (
    Frame,
    MassFunction,
    argmax_focal,
    belief,
    combine,
    combine_all,
)

Sample = tuple[Sequence[float], int]
MaybeRow = Sequence[float | None]

EMAIL_SIGNALS = (1, 2, 3, 4)


@dataclass(frozen=True)
class Prediction:
    """A label, the fused mass function behind it, and a decision trace."""

    label: str
    mass: MassFunction
    trace: Mapping[str, object]

    def __post_init__(self) -> None:
        if self.label not in self.mass.frame.labels:
            raise ValueError(f"label {self.label!r} is not a frame singleton")

    def to_json_dict(self, record_id: int | None = None) -> dict:
        masses = {
            self.mass.frame.describe(subset.bits): value for subset, value in self.mass.items()
        }
        return {"id": record_id, "label": self.label, "masses": masses, "trace": dict(self.trace)}


@dataclass(frozen=True)
class BinaryModel:
    """One sigmoid threshold per feature, over the {normal, abnormal} frame."""

    bpas: tuple[SigmoidBpa, ...]
    normal_fraction: float

    @property
    def n_features(self) -> int:
        return len(self.bpas)


def train_binary(rows: Sequence[MaybeRow], labels: Sequence[int]) -> BinaryModel:
    """Fit per-feature thresholds from labelled rows (label 1 = abnormal).

    Missing cells (None) are dropped from their feature column; the
    threshold rank scales with the values actually present.
    """
    if len(rows) != len(labels):
        raise ValueError(f"{len(rows)} rows vs {len(labels)} labels")
    total = len(labels)
    normal = sum(1 for y in labels if y == 0)
    if normal in (0, total):
        raise ValueError("training data must contain both normal and abnormal records")
    n_features = len(rows[0])
    bpas = []
    for f in range(n_features):
        values = [row[f] for row in rows if row[f] is not None]
        if not values:
            raise ValueError(f"feature {f} has no non-missing training values")
        bpas.append(SigmoidBpa(modified_median_threshold(values, normal, total)))
    return BinaryModel(tuple(bpas), normal / total)


def classify_binary(
    record: MaybeRow, model: BinaryModel, features: Sequence[int] | None = None
) -> Prediction:
    """Fuse one sigmoid mass per selected non-missing feature and compare
    the two singleton masses; ties go to normal."""
    selected = range(model.n_features) if features is None else features
    if not selected:
        raise ValueError("feature subset must be nonempty")
    used = [f for f in selected if record[f] is not None]
    if not used:
        raise ValueError("record has no value for any selected feature")
    combined = combine_all([sigmoid_mass(record[f], model.bpas[f]) for f in used])
    label = "abnormal" if combined.mass_bits(2) > combined.mass_bits(1) else "normal"
    return Prediction(label, combined, {"features": used})


@dataclass(frozen=True)
class ThreeClassModel:
    """Range boundaries, per-feature class means, and the per-group feature picks."""

    frame: Frame
    boundaries: BoundaryModel
    means: tuple[tuple[float, ...], ...]
    selected: Mapping[int, int] = field(hash=False)

    def __post_init__(self) -> None:
        if self.frame.size != 3:
            raise ValueError("three-class model needs a frame of exactly 3 labels")
        if len(self.means) != self.boundaries.n_features:
            raise ValueError("means and boundaries must cover the same features")


def train_three_class(samples: Sequence[Sample], frame: Frame) -> ThreeClassModel:
    """Fit boundaries, class means, and the per-class-group feature choices."""
    n_features = len(samples[0][0])
    boundaries = fit_boundaries(samples, n_features, 3)
    means = []
    for f in range(n_features):
        per_class = []
        for c in range(3):
            values = [feats[f] for feats, label in samples if label == c]
            per_class.append(sum(values) / len(values))
        means.append(tuple(per_class))
    groups = ((0, 1), (0, 2), (1, 2), (0, 1, 2))
    selected = {
        sum(1 << c for c in group): select_feature(samples, group) for group in groups
    }
    return ThreeClassModel(frame, boundaries, tuple(means), selected)


def classify_three_class(record: Sequence[float], model: ThreeClassModel) -> Prediction:
    """Classify in up to three steps.

    Step 1 fuses the per-feature boundary masses and takes the focal
    element of greatest mass (ignoring the frame); a singleton decides
    immediately. Otherwise step 2 assigns a nearest-mean mass on the
    feature selected for the candidate group, and step 3 fuses it with the
    step-1 result and picks the singleton with the highest belief.
    """
    frame = model.frame
    step1 = combine_all(
        [
            boundary_mass(record[f], model.boundaries.feature_bounds(f), frame)
            for f in range(model.boundaries.n_features)
        ]
    )
    candidate = argmax_focal(step1, exclude_theta=True)
    if candidate.is_singleton:
        return Prediction(candidate.labels[0], step1, {"decided": "step1"})
    group_bits = frame.full_mask if candidate.is_theta else candidate.bits
    feature = model.selected[group_bits]
    step2 = distance_mass(record[feature], DistanceModel(feature, model.means[feature]), frame)
    final = combine(step1, step2)
    beliefs = [belief(final, frame.singleton(label)) for label in frame.labels]
    winner = max(range(3), key=lambda c: (beliefs[c], -c))
    return Prediction(
        frame.labels[winner],
        final,
        {"decided": "step3", "feature": feature, "group": list(candidate.labels)},
    )


@dataclass(frozen=True)
class EmailModel:
    """Expert-set mass assignments for the four email signals."""

    interval_bpa: ScaledSigmoidBpa
    spoofed_bpa: TableBpa
    dangerous_bpa: TableBpa
    benign_bpa: TableBpa
    signals: frozenset[int] = frozenset(EMAIL_SIGNALS)

    def __post_init__(self) -> None:
        if not self.signals or not self.signals <= set(EMAIL_SIGNALS):
            raise ValueError(f"active signals must be a nonempty subset of {EMAIL_SIGNALS}")


def email_model_default() -> EmailModel:
    """The stock email model: sigmoid interval signal plus three table signals."""
    return EmailModel(
        interval_bpa=ScaledSigmoidBpa(threshold=30.0, floor=0.3, ceiling=0.7, theta_mass=0.01),
        spoofed_bpa=TableBpa(((0.9, 0.09, 0.01), (0.1, 0.89, 0.01))),
        dangerous_bpa=TableBpa(((0.8, 0.19, 0.01), (0.2, 0.79, 0.01))),
        benign_bpa=TableBpa(((0.6, 0.39, 0.01), (0.4, 0.59, 0.01))),
    )


def email_signal_mass(message: Sequence[float], signal: int, model: EmailModel) -> MassFunction:
    """The mass one signal assigns to one message."""
    interval, spoofed, dangerous, benign = message
    if signal == 1:
        return scaled_sigmoid_mass(interval, model.interval_bpa)
    if signal == 2:
        return table_mass(int(spoofed), model.spoofed_bpa)
    if signal == 3:
        return table_mass(int(dangerous), model.dangerous_bpa)
    if signal == 4:
        return table_mass(int(benign), model.benign_bpa)
    raise ValueError(f"unknown signal {signal}")


def classify_email(
    message: Sequence[float], model: EmailModel, signals: Sequence[int] | None = None
) -> Prediction:
    """Fuse the active signals' masses; abnormal wins only on strictly
    greater mass."""
    active = sorted(model.signals) if signals is None else sorted(set(signals))
    if not active or any(s not in EMAIL_SIGNALS for s in active):
        raise ValueError(f"signals must be a nonempty subset of {EMAIL_SIGNALS}, got {signals}")
    combined = combine_all([email_signal_mass(message, s, model) for s in active])
    label = "abnormal" if combined.mass_bits(2) > combined.mass_bits(1) else "normal"
    return Prediction(label, combined, {"signals": active})


Classifier = BinaryModel | ThreeClassModel | EmailModel


def classifier_to_dict(model: Classifier) -> dict:
    """JSON-ready dict for a classifier: a kind tag plus its bpa models."""
    if isinstance(model, BinaryModel):
        return {
            "kind": "binary",
            "bpas": [bpa_to_dict(b) for b in model.bpas],
            "normal_fraction": model.normal_fraction,
        }
    if isinstance(model, ThreeClassModel):
        return {
            "kind": "three_class",
            "labels": list(model.frame.labels),
            "boundaries": bpa_to_dict(model.boundaries),
            "means": [list(row) for row in model.means],
            "selected": {str(bits): f for bits, f in sorted(model.selected.items())},
        }
    if isinstance(model, EmailModel):
        return {
            "kind": "email",
            "interval": bpa_to_dict(model.interval_bpa),
            "spoofed": bpa_to_dict(model.spoofed_bpa),
            "dangerous": bpa_to_dict(model.dangerous_bpa),
            "benign": bpa_to_dict(model.benign_bpa),
            "signals": sorted(model.signals),
        }
    raise TypeError(f"not a classifier: {type(model).__name__}")


def classifier_from_dict(data: Mapping) -> Classifier:
    """Inverse of :func:`classifier_to_dict`."""
    kind = data.get("kind")
    if kind == "binary":
        bpas = tuple(bpa_from_dict(b) for b in data["bpas"])
        return BinaryModel(bpas, float(data["normal_fraction"]))  # type: ignore[arg-type]
    if kind == "three_class":
        from .evidence import make_frame

        return ThreeClassModel(
            make_frame(data["labels"]),
            bpa_from_dict(data["boundaries"]),  # type: ignore[arg-type]
            tuple(tuple(float(v) for v in row) for row in data["means"]),
            {int(bits): int(f) for bits, f in data["selected"].items()},
        )
    if kind == "email":
        return EmailModel(
            bpa_from_dict(data["interval"]),  # type: ignore[arg-type]
            bpa_from_dict(data["spoofed"]),  # type: ignore[arg-type]
            bpa_from_dict(data["dangerous"]),  # type: ignore[arg-type]
            bpa_from_dict(data["benign"]),  # type: ignore[arg-type]
            frozenset(data["signals"]),
        )
    raise ValueError(f"unknown classifier kind {kind!r}")

"""Inter-annotator reliability: confusion matrices, Cohen's kappa, and bands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from panelscope.corpus import LABELS, N_LABELS, AnnotationRecord
from panelscope.errors import (
    DegenerateDistributionError,
    EmptyInputError,
    ValidationError,
)

# (upper bound, band name); kappa <= 0 is "no agreement", upper ends inclusive
_BANDS = [
    (0.20, "none to slight"),
    (0.40, "fair"),
    (0.60, "moderate"),
    (0.80, "substantial"),
    (1.00, "almost perfect"),
]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square count matrix; rows are rater A's labels, columns rater B's."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValidationError(f"confusion matrix must be square, got {c.shape}")
        if (c < 0).any():
            raise ValidationError("confusion counts must be non-negative")
        object.__setattr__(self, "counts", c.astype(np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class KappaScore:
    kappa: float
    observed_agreement: float
    expected_agreement: float
    band: str


def build_confusion(
    a: list[AnnotationRecord], b: list[AnnotationRecord]
) -> ConfusionMatrix:
    """Cross-tabulate two raters' labels on the pairs they both annotated."""
    a_labels = {r.pair: r.label for r in a}
    b_labels = {r.pair: r.label for r in b}
    overlap = set(a_labels) & set(b_labels)
    if not overlap:
        raise EmptyInputError(
            "no overlapping pairs between raters; check the evaluation-set assignment"
        )
    counts = np.zeros((N_LABELS, N_LABELS), dtype=np.int64)
    for pair in overlap:
        counts[a_labels[pair].index, b_labels[pair].index] += 1
    return ConfusionMatrix(counts)


def cohen_kappa(m: ConfusionMatrix) -> KappaScore:
    """Chance-corrected agreement between two raters from their confusion matrix."""
    total = m.total
    if total <= 0:
        raise EmptyInputError("confusion matrix has zero total")
    counts = m.counts.astype(float)
    p_o = float(np.trace(counts)) / total
    row = counts.sum(axis=1)
    col = counts.sum(axis=0)
    p_e = float(row @ col) / (total * total)
    if p_e >= 1.0:
        raise DegenerateDistributionError(
            "kappa undefined: both raters are constant on the same single label"
        )
    kappa = (p_o - p_e) / (1.0 - p_e)
    return KappaScore(kappa, p_o, p_e, interpret_kappa(kappa))


def interpret_kappa(kappa: float) -> str:
    """Agreement band for a kappa value (boundaries inclusive on the upper end)."""
    if not -1.0 <= kappa <= 1.0:
        raise ValidationError(f"kappa must lie in [-1, 1], got {kappa}")
    if kappa <= 0:
        return "no agreement"
    for upper, band in _BANDS:
        if kappa <= upper:
            return band
    return _BANDS[-1][1]


def pairwise_report(
    records_by_rater: dict[str, list[AnnotationRecord]],
) -> list[tuple[str, str, KappaScore]]:
    """Kappa for every rater pair with a non-empty overlap."""
    raters = list(records_by_rater)
    out = []
    for i, ra in enumerate(raters):
        for rb in raters[i + 1 :]:
            try:
                m = build_confusion(records_by_rater[ra], records_by_rater[rb])
            except EmptyInputError:
                continue
            out.append((ra, rb, cohen_kappa(m)))
    return out


def label_names() -> list[str]:
    return [label.name for label in LABELS]

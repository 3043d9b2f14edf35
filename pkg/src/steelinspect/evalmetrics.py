"""Segmentation scoring: pixel confusion counts and PI/SI/DSC indices."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConfusionCounts",
    "MethodReport",
    "confusion",
    "scores",
    "compare",
    "FIELD_REFERENCE_SCORES",
]

# Reference scores measured on a 231-image field survey; kept as display
# fixtures only (the source imagery is not distributable), never recomputed.
FIELD_REFERENCE_SCORES = {
    ("Proposed", "normal"): {"PI": 0.9360, "SI": 0.6507, "DSC": 0.7677},
    ("Proposed", "low"): {"PI": 0.0079, "SI": 0.7365, "DSC": 0.0156},
    ("S-P", "normal"): {"PI": 0.9210, "SI": 0.8555, "DSC": 0.8871},
    ("S-P", "low"): {"PI": 0.7679, "SI": 0.8831, "DSC": 0.8215},
    ("Otsu", "normal"): {"PI": 0.0076, "SI": 0.9734, "DSC": 0.0151},
    ("Otsu", "low"): {"PI": 0.0089, "SI": 0.8836, "DSC": 0.0177},
}


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("counts must be non-negative")

    @property
    def area(self):
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MethodReport:
    method: str
    lighting: str
    pi: float
    si: float
    dsc: float
    counts: ConfusionCounts


def confusion(pred, gt) -> ConfusionCounts:
    """Per-pixel tally of a predicted mask against ground truth."""
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise ValueError(f"mask dimensions differ: {pred.shape} vs {gt.shape}")
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    tn = int(np.count_nonzero(~pred & ~gt))
    return ConfusionCounts(tp, fp, fn, tn)


def _ratio(num, den, gt_empty):
    # 0/0: vacuous success when the ground truth is empty, else failure.
    if den == 0:
        return 1.0 if gt_empty else 0.0
    return num / den


def scores(c: ConfusionCounts):
    """(PI, SI, DSC) = precision, sensitivity, Dice overlap."""
    gt_empty = (c.tp + c.fn) == 0
    pi = _ratio(c.tp, c.tp + c.fp, gt_empty)
    si = _ratio(c.tp, c.tp + c.fn, gt_empty)
    dsc = _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, gt_empty)
    return pi, si, dsc


def compare(rows):
    """Score (method, lighting, pred, gt) rows into reports plus a text table.

    Returns (reports, table_text); `json_report` serializes the same data.
    """
    reports = []
    for method, lighting, pred, gt in rows:
        c = confusion(pred, gt)
        pi, si, dsc = scores(c)
        reports.append(MethodReport(method, lighting, pi, si, dsc, c))

    header = f"{'Method':<16}{'Lighting':<10}{'PI':>8}{'SI':>8}{'DSC':>8}"
    lines = [header, "-" * len(header)]
    for r in reports:
        lines.append(
            f"{r.method:<16}{r.lighting:<10}{r.pi:>8.4f}{r.si:>8.4f}{r.dsc:>8.4f}"
        )
    return reports, "\n".join(lines)


def json_report(reports):
    return json.dumps(
        [
            {
                "method": r.method,
                "lighting": r.lighting,
                "PI": r.pi,
                "SI": r.si,
                "DSC": r.dsc,
                "counts": {"TP": r.counts.tp, "FP": r.counts.fp,
                           "FN": r.counts.fn, "TN": r.counts.tn},
            }
            for r in reports
        ],
        indent=2,
    )

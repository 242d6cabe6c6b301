"""Discrimination and reliability metrics.

ROC construction, AUC, the Youden-optimal operating point, coefficient
of variation, and two-way ANOVA intraclass correlation. ROC areas and
Youden scans are accumulated over integer counts and divided once at
the end, so they agree exactly with brute-force pair counting.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import (
    DataError,
    DegenerateRocError,
    DegenerateSignalError,
    InsufficientDataError,
    ParameterError,
)

log = logging.getLogger(__name__)

ICC_FORMS = ("two_way_random_single", "two_way_mixed_single")

# Reliability label boundaries: below 0.5 poor, then moderate, good from
# 0.75, excellent from 0.9.
ICC_LABEL_EDGES = ((0.9, "excellent"), (0.75, "good"), (0.5, "moderate"))


def population_sd(values) -> float:
    """Standard deviation with the population (1/N) convention."""
    v = np.asarray(values, dtype=float)
    return float(np.sqrt(np.mean((v - v.mean()) ** 2)))


@dataclass(frozen=True)
class LabeledScores:
    """Scores split into negative (baseline) and positive (task) classes."""

    negatives: list
    positives: list

    def __post_init__(self):
        neg = [float(v) for v in self.negatives]
        pos = [float(v) for v in self.positives]
        if not all(np.isfinite(neg)) or not all(np.isfinite(pos)):
            raise DataError("metrics.LabeledScores", "scores must be finite")
        object.__setattr__(self, "negatives", neg)
        object.__setattr__(self, "positives", pos)


@dataclass(frozen=True)
class RocCurve:
    """ROC curve over descending thresholds, (0,0) to (1,1).

    ``fp_counts``/``tp_counts`` keep the raw per-threshold counts so
    downstream areas can be computed without rate rounding; curves built
    by hand may omit them.
    """

    thresholds: np.ndarray
    tpr: np.ndarray
    fpr: np.ndarray
    fp_counts: np.ndarray | None = None
    tp_counts: np.ndarray | None = None
    n_neg: int | None = None
    n_pos: int | None = None


def roc(scores: LabeledScores) -> RocCurve:
    """Build the ROC curve of baseline-vs-task scores.

    Thresholds are the midpoints between adjacent distinct pooled
    scores, bracketed by +-inf sentinels; a sample classifies positive
    when its score is >= the threshold.

    Raises
    ------
    DegenerateRocError
        If either class is empty.
    """
    neg = np.sort(np.asarray(scores.negatives, dtype=float))
    pos = np.sort(np.asarray(scores.positives, dtype=float))
    if neg.size == 0 or pos.size == 0:
        raise DegenerateRocError(
            "metrics.roc",
            f"both classes must be nonempty (got {neg.size} negatives, {pos.size} positives)",
        )
    pooled = np.unique(np.concatenate([neg, pos]))
    mids = (pooled[:-1] + pooled[1:]) / 2.0
    thresholds = np.concatenate(([np.inf], mids[::-1], [-np.inf]))
    fp = neg.size - np.searchsorted(neg, thresholds, side="left")
    tp = pos.size - np.searchsorted(pos, thresholds, side="left")
    return RocCurve(
        thresholds=thresholds,
        tpr=tp / pos.size,
        fpr=fp / neg.size,
        fp_counts=fp.astype(float),
        tp_counts=tp.astype(float),
        n_neg=int(neg.size),
        n_pos=int(pos.size),
    )


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under a ROC curve.

    Equals the Mann-Whitney statistic P(pos > neg) + 0.5 P(pos = neg).
    When the curve carries counts the sum is accumulated in integers and
    divided once, matching pair counting to the last bit.
    """
    if curve.fp_counts is not None and curve.tp_counts is not None:
        fp, tp = curve.fp_counts, curve.tp_counts
        num = float(np.sum(np.diff(fp) * (tp[:-1] + tp[1:])))
        return num / (2.0 * curve.n_neg * curve.n_pos)
    return float(np.trapezoid(curve.tpr, curve.fpr))


def youden_optimal(scores: LabeledScores) -> tuple[float, float, float]:
    """Find the threshold maximizing Youden's J = tpr - fpr.

    Returns
    -------
    (j, bacc, threshold)
        Maximum J, the balanced accuracy (J + 1) / 2 at that same
        threshold, and the midpoint threshold achieving it. Ties go to
        the smallest threshold.
    """
    curve = roc(scores)
    tp, fp = curve.tp_counts, curve.fp_counts
    n_pos, n_neg = curve.n_pos, curve.n_neg
    # J numerators over the common denominator n_pos * n_neg; exact in floats.
    j_num = tp * n_neg - fp * n_pos
    best = 0
    best_thr = curve.thresholds[0]
    for num, thr in zip(j_num, curve.thresholds):
        if num >= best:  # later thresholds are smaller, so >= prefers them
            best = num
            best_thr = thr
    j = float(best) / (n_pos * n_neg)
    return j, (j + 1.0) / 2.0, float(best_thr)


def coefficient_of_variation(values) -> float:
    """Population standard deviation divided by the mean.

    Raises
    ------
    DegenerateSignalError
        Zero mean.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise DegenerateSignalError("metrics.coefficient_of_variation", "empty input")
    mean = float(v.mean())
    if mean == 0:
        raise DegenerateSignalError(
            "metrics.coefficient_of_variation", "mean is zero; CV undefined"
        )
    return population_sd(v) / mean


def icc_label(value: float) -> str:
    """Map an ICC value to its reliability label."""
    for edge, name in ICC_LABEL_EDGES:
        if value >= edge:
            return name
    return "poor"


def icc(matrix, form: str = "two_way_random_single") -> tuple[float, str]:
    """Intraclass correlation from a subjects-by-measurements grid.

    Rows with missing cells (NaN) are dropped listwise. Mean squares
    come from a two-way ANOVA over rows (subjects) and columns
    (measurements):

    - ``two_way_random_single``: absolute agreement,
      (MSR - MSE) / (MSR + (k-1) MSE + (k/n)(MSC - MSE))
    - ``two_way_mixed_single``: consistency,
      (MSR - MSE) / (MSR + (k-1) MSE)

    Returns
    -------
    (icc, label)
        The coefficient and its reliability label (poor below 0.5, then
        moderate, good from 0.75, excellent from 0.9).

    Raises
    ------
    InsufficientDataError
        Fewer than 2 complete rows or 2 columns.
    DegenerateSignalError
        A constant matrix, where the ANOVA is undefined.
    """
    if form not in ICC_FORMS:
        raise ParameterError(
            "metrics.icc", f"unknown form {form!r} (expected one of {ICC_FORMS})"
        )
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise ParameterError("metrics.icc", f"matrix must be 2-D, got shape {m.shape}")
    complete = ~np.isnan(m).any(axis=1)
    m = m[complete]
    n, k = m.shape if m.size else (0, 0)
    if n < 2 or k < 2:
        raise InsufficientDataError(
            "metrics.icc",
            f"need >= 2 complete rows and >= 2 columns, have {n} x {k}",
        )
    grand = m.mean()
    row_means = m.mean(axis=1)
    col_means = m.mean(axis=0)
    ss_rows = k * float(np.sum((row_means - grand) ** 2))
    ss_cols = n * float(np.sum((col_means - grand) ** 2))
    ss_total = float(np.sum((m - grand) ** 2))
    ss_err = max(ss_total - ss_rows - ss_cols, 0.0)
    msr = ss_rows / (n - 1)
    msc = ss_cols / (k - 1)
    mse = ss_err / ((n - 1) * (k - 1))
    if form == "two_way_random_single":
        denom = msr + (k - 1) * mse + (k / n) * (msc - mse)
    else:
        denom = msr + (k - 1) * mse
    if denom == 0:
        raise DegenerateSignalError(
            "metrics.icc", "matrix has no variance; ICC undefined"
        )
    value = (msr - mse) / denom
    return float(value), icc_label(float(value))

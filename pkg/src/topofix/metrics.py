"""Overlap and topology metrics for segmentation masks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import FOREGROUND_CLASSES, LabelMask
from .priors import BettiPrior, prior_from_mask


def dsc(truth: LabelMask, pred: LabelMask, klass: int) -> float:
    """Dice coefficient of one class; two empty masks count as 1."""
    if truth.shape != pred.shape:
        raise ValueError(f"shape mismatch {truth.shape} vs {pred.shape}")
    x = truth.labels == klass
    y = pred.labels == klass
    total = int(x.sum()) + int(y.sum())
    if total == 0:
        return 1.0
    return 2.0 * int((x & y).sum()) / total


def mean_dsc(truth: LabelMask, pred: LabelMask) -> float:
    """Dice averaged over the three foreground classes."""
    return float(np.mean([dsc(truth, pred, k) for k in FOREGROUND_CLASSES]))


def topologically_correct(mask: LabelMask, prior: BettiPrior) -> bool:
    return prior_from_mask(mask) == prior


@dataclass(frozen=True)
class ClassStats:
    mean: float
    std: float  # population standard deviation


@dataclass(frozen=True)
class SuiteReport:
    """Aggregate quality of predicted masks against ground truth."""

    n: int
    per_class: tuple[ClassStats, ...]  # one entry per foreground class
    mean_overlap: float  # mean over cases of the foreground-average Dice
    topo_rate: float  # fraction of cases whose mask satisfies the prior
    delta_overlap: float | None  # mean_overlap minus the reference's, if given


def evaluate_suite(
    truths,
    preds,
    prior: BettiPrior,
    reference=None,
) -> SuiteReport:
    """Score predictions case by case.

    `reference` is an optional third sequence of masks (typically the
    unprocessed predictions) used to report the overlap change.
    """
    truths = list(truths)
    preds = list(preds)
    if len(truths) != len(preds) or not truths:
        raise ValueError("need equally many truths and predictions, at least one")
    per_class_scores = np.array(
        [[dsc(t, p, k) for k in FOREGROUND_CLASSES] for t, p in zip(truths, preds)]
    )
    case_means = per_class_scores.mean(axis=1)
    topo = np.array([topologically_correct(p, prior) for p in preds])

    delta = None
    if reference is not None:
        reference = list(reference)
        if len(reference) != len(truths):
            raise ValueError("reference length mismatch")
        ref_means = np.array([mean_dsc(t, r) for t, r in zip(truths, reference)])
        delta = float(case_means.mean() - ref_means.mean())

    return SuiteReport(
        n=len(truths),
        per_class=tuple(
            ClassStats(mean=float(col.mean()), std=float(col.std()))
            for col in per_class_scores.T
        ),
        mean_overlap=float(case_means.mean()),
        topo_rate=float(topo.mean()),
        delta_overlap=delta,
    )

"""Differentiable topological loss against a Betti prior.

For every class union i,j (j >= i) and dimension d, the ranked barcode of
the union probability map is split at the prior count B: the top B bars are
matched (they should persist for the whole unit interval, costing
B - sum of their lifetimes) and everything below rank B is spurious
(costing its lifetime). The loss is piecewise linear in the pixel
probabilities, so its gradient is a sparse field of +/-1 contributions at
the critical vertices of the ranked bars:

    matched bar:  -1 at its birth vertex, +1 at its death vertex
    spurious bar: +1 at its birth vertex, -1 at its death vertex

Essential bars have no death cell and contribute only the birth term.
Union maps for i != j are the clamped channel sums; pixels where the raw
sum exceeds 1 pass no gradient. The background channel never enters a
union, so its gradient is identically zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import MultiClassProb, N_CLASSES, ProbMap
from .persistence import barcode_of
from .priors import PAIR_ORDER, BettiPrior

SINGLE_PAIRS = ((1, 1), (2, 2), (3, 3))


@dataclass(frozen=True)
class LossEntry:
    """One (i, j, d) row: target count B, matched mass A, spurious mass Z."""

    i: int
    j: int
    d: int
    target: int
    matched: float
    spurious: float

    @property
    def contribution(self) -> float:
        return self.target - self.matched + self.spurious


@dataclass(frozen=True)
class LossBreakdown:
    entries: tuple[LossEntry, ...]
    total: float


@dataclass(frozen=True)
class GradField:
    """d(total)/d(probability), shape (4, H, W); background channel is 0."""

    channels: np.ndarray


def union_prob(y: MultiClassProb, i: int, j: int) -> ProbMap:
    """Probability of the union of classes i and j: the channel itself when
    i == j, otherwise the channel sum clamped to [0, 1]."""
    raw = _union_raw(y.channels.astype(np.float64), i, j)
    return ProbMap(np.clip(raw, 0.0, 1.0).astype(np.float32))


def _union_raw(channels: np.ndarray, i: int, j: int) -> np.ndarray:
    if not (1 <= i <= j <= 3):
        raise ValueError(f"union indices must satisfy 1 <= i <= j <= 3, got ({i}, {j})")
    if i == j:
        return channels[i]
    return channels[i] + channels[j]


def topo_loss(y: MultiClassProb, prior: BettiPrior) -> tuple[LossBreakdown, GradField]:
    """Loss and gradient over all six class unions."""
    breakdown, grad = _loss_raw(y.channels.astype(np.float64), prior, PAIR_ORDER)
    return breakdown, GradField(grad)


def topo_loss_single(y: MultiClassProb, prior: BettiPrior) -> tuple[LossBreakdown, GradField]:
    """Single-label variant: only the i == j unions contribute."""
    breakdown, grad = _loss_raw(y.channels.astype(np.float64), prior, SINGLE_PAIRS)
    return breakdown, GradField(grad)


def topo_loss_raw(
    channels: np.ndarray, prior: BettiPrior, single: bool = False
) -> tuple[LossBreakdown, GradField]:
    """Loss on a bare (4, H, W) channel stack in [0, 1].

    Unlike topo_loss this skips the sum-to-one requirement, which is what a
    finite-difference probe of one channel at a time needs.
    """
    arr = np.asarray(channels, dtype=np.float64)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("channel values must lie in [0, 1]")
    breakdown, grad = _loss_raw(arr, prior, SINGLE_PAIRS if single else PAIR_ORDER)
    return breakdown, GradField(grad)


def _loss_raw(
    channels: np.ndarray, prior: BettiPrior, pairs
) -> tuple[LossBreakdown, np.ndarray]:
    """Core loss on a raw (4, H, W) float64 channel stack.

    Channels need not sum to one here; finite-difference checks perturb a
    single channel and rely on that.
    """
    if channels.ndim != 3 or channels.shape[0] != N_CLASSES:
        raise ValueError(f"expected (4, H, W) channels, got {channels.shape}")
    h, w = channels.shape[1:]
    grad = np.zeros_like(channels)
    entries = []
    total = 0.0
    for i, j in pairs:
        raw = _union_raw(channels, i, j)
        if i == j:
            u = raw
            passthrough = None
        else:
            u = np.minimum(raw, 1.0)
            passthrough = raw <= 1.0  # clamped pixels block the chain rule
        bc = barcode_of(u)
        gmap = np.zeros(h * w, dtype=np.float64)
        for d in (0, 1):
            b = prior.get(i, j, d)
            idx = bc.ranked(d)
            lams = bc.births[idx] - bc.deaths[idx]
            matched = float(lams[:b].sum())
            spurious = float(lams[b:].sum())
            entries.append(
                LossEntry(i=i, j=j, d=d, target=b, matched=matched, spurious=spurious)
            )
            total += b - matched + spurious
            sign = np.where(np.arange(idx.size) < b, -1.0, 1.0)
            bflat = bc.birth_r[idx] * w + bc.birth_c[idx]
            np.add.at(gmap, bflat, sign)
            has_death = bc.death_r[idx] >= 0
            dflat = bc.death_r[idx][has_death] * w + bc.death_c[idx][has_death]
            np.add.at(gmap, dflat, -sign[has_death])
        gmap = gmap.reshape(h, w)
        if passthrough is not None:
            gmap = gmap * passthrough
        grad[i] += gmap
        if j != i:
            grad[j] += gmap
    return LossBreakdown(entries=tuple(entries), total=float(total)), grad

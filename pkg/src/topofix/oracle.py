"""Brute-force persistence oracle, kept independent of the fast path.

Barcodes are reconstructed purely from explicit thresholdings of the map:
for every pair of thresholds a >= c the rank of the inclusion-induced map
H_d(K_a) -> H_d(K_c) is counted directly on binarised images (component
labels for dim 0, bounded 8-connected background components for dim 1 via
planar duality), and bar multiplicities follow from inclusion-exclusion
over those ranks. Labeling uses scipy.ndimage so none of the union-find
code under test is shared.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .grids import ProbMap

_FOUR = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=int)
_EIGHT = np.ones((3, 3), dtype=int)


def _fg_labels(fg: np.ndarray) -> np.ndarray:
    labels, _ = ndimage.label(fg, structure=_FOUR)
    return labels


def _bg_labels(fg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(labels, bounded) for 8-connected background components.

    The image is padded with a background ring first, so the component
    touching the ring is the unbounded one. `labels` is unpadded;
    `bounded[l]` says whether component l is a hole.
    """
    padded = np.pad(fg, 1, constant_values=False)
    labels, count = ndimage.label(~padded, structure=_EIGHT)
    outer = labels[0, 0]
    bounded = np.ones(count + 1, dtype=bool)
    bounded[0] = False
    bounded[outer] = False
    return labels[1:-1, 1:-1], bounded


def betti_binary(fg: np.ndarray) -> tuple[int, int]:
    """(b0, b1) of a binary image: 4-connected foreground components and
    bounded 8-connected background components."""
    fg = np.asarray(fg, dtype=bool)
    _, b0 = ndimage.label(fg, structure=_FOUR)
    _, bounded = _bg_labels(fg)
    return int(b0), int(np.count_nonzero(bounded))


def _rank_h0(fg_a: np.ndarray, labels_c: np.ndarray) -> int:
    hit = labels_c[fg_a]
    return int(np.unique(hit).size)


def _rank_h1(bg_a, bounded_a, bg_c, bounded_c) -> int:
    sel = bounded_c[bg_c]  # pixels inside holes of the later (larger) mask
    if not sel.any():
        return 0
    a_labs = np.unique(bg_a[sel])
    return int(np.count_nonzero(bounded_a[a_labs]))


def brute_barcode(m: ProbMap) -> list[tuple[int, float, float]]:
    """Positive-lifetime bars (dim, birth, death) of the superlevel
    filtration, from thresholdings alone.

    Bars still open once every pixel has entered are assigned death 0.
    """
    vals = m.values.astype(np.float64)
    thresholds = np.unique(vals)[::-1]
    n = thresholds.size
    masks = [vals >= t for t in thresholds]
    fg_lab = [_fg_labels(mk) for mk in masks]
    bg = [_bg_labels(mk) for mk in masks]

    # g[d][a][c] = rank of H_d(K_a) -> H_d(K_c), 0-indexed, a <= c
    g = np.zeros((2, n + 1, n + 1), dtype=np.int64)
    for a in range(n):
        for c in range(a, n):
            g[0, a + 1, c + 1] = _rank_h0(masks[a], fg_lab[c])
            g[1, a + 1, c + 1] = _rank_h1(bg[a][0], bg[a][1], bg[c][0], bg[c][1])

    bars: list[tuple[int, float, float]] = []
    for d in range(2):
        for a in range(1, n + 1):
            born_here = lambda c: g[d, a, c] - g[d, a - 1, c]
            for c in range(a + 1, n + 1):
                mu = born_here(c - 1) - born_here(c)
                assert mu >= 0, "negative bar multiplicity"
                bars.extend([(d, float(thresholds[a - 1]), float(thresholds[c - 1]))] * mu)
            mu_essential = born_here(n)
            assert mu_essential >= 0
            bars.extend([(d, float(thresholds[a - 1]), 0.0)] * mu_essential)
    return [b for b in bars if b[1] > b[2]]


def brute_betti_at(bars: list[tuple[int, float, float]], p: float, d: int) -> int:
    if not (0.0 < p <= 1.0):
        raise ValueError(f"threshold must lie in (0, 1], got {p}")
    return sum(1 for dim, birth, death in bars if dim == d and death < p <= birth)

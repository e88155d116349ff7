"""Mask-level topology utilities and the connected-component baseline."""
from __future__ import annotations

import numpy as np

from .grids import FOREGROUND_CLASSES, LabelMask


class UnionFind:
    """Array-backed union-find with path compression."""

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.n_components = n

    def find(self, x: int) -> int:
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # keep the smaller index as root so roots are deterministic
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.n_components -= 1
        return True


def _binary(mask: LabelMask | np.ndarray) -> np.ndarray:
    arr = mask.labels if isinstance(mask, LabelMask) else np.asarray(mask)
    return arr != 0


def label_components(fg: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected components of a boolean image.

    Returns (labels, count); labels are 1..count in order of first
    row-major pixel, 0 on background.
    """
    fg = np.asarray(fg, dtype=bool)
    h, w = fg.shape
    uf = UnionFind(h * w)
    flat = fg.ravel()
    idx = np.flatnonzero(flat)
    for i in idx:
        r, c = divmod(int(i), w)
        if c + 1 < w and flat[i + 1]:
            uf.union(int(i), int(i) + 1)
        if r + 1 < h and flat[i + w]:
            uf.union(int(i), int(i) + w)
    labels = np.zeros(h * w, dtype=np.int32)
    count = 0
    roots: dict[int, int] = {}
    for i in idx:
        root = uf.find(int(i))
        lab = roots.get(root)
        if lab is None:
            count += 1
            roots[root] = lab = count
        labels[i] = lab
    return labels.reshape(h, w), count


def betti_mask(mask: LabelMask | np.ndarray) -> tuple[int, int]:
    """(b0, b1) of a binary mask under foreground 4-connectivity.

    b0 counts 4-connected components; b1 = b0 - chi with
    chi = V - E + F over the V-construction cells of the foreground.
    """
    fg = _binary(mask)
    _, b0 = label_components(fg)
    v = int(np.count_nonzero(fg))
    e = int(np.count_nonzero(fg[:, :-1] & fg[:, 1:])) + int(
        np.count_nonzero(fg[:-1, :] & fg[1:, :])
    )
    f = int(
        np.count_nonzero(fg[:-1, :-1] & fg[:-1, 1:] & fg[1:, :-1] & fg[1:, 1:])
    )
    chi = v - e + f
    b1 = b0 - chi
    assert b1 >= 0, "Euler characteristic exceeded component count"
    return b0, b1


def cca_clean(mask: LabelMask) -> LabelMask:
    """Keep, per foreground class, only the largest 4-connected component.

    Size ties go to the component whose first pixel comes earliest in
    row-major order. Dropped components are relabelled background. Cannot
    repair holes or missing adjacency: it only ever removes components.
    """
    labels = mask.labels.copy()
    for cls in FOREGROUND_CLASSES:
        comp, count = label_components(labels == cls)
        if count <= 1:
            continue
        flat = comp.ravel()
        sizes = np.bincount(flat, minlength=count + 1)
        # first row-major pixel of every component, as the tie key
        first = np.full(count + 1, flat.size, dtype=np.int64)
        occupied = np.flatnonzero(flat)
        np.minimum.at(first, flat[occupied], occupied)
        keep = min(range(1, count + 1), key=lambda l: (-int(sizes[l]), int(first[l])))
        labels[(comp != keep) & (comp != 0)] = 0
    return LabelMask(labels)

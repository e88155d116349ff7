"""Filtered cubical complexes over 2-D probability maps.

Pixels are vertices; edges join 4-adjacent pixels; unit squares span 2x2
blocks. A cell's filtration value is the minimum over its vertices, so
thresholding the complex at p reproduces foreground 4-connectivity of the
binarised image. Cells are ordered by descending value, ties broken by
(ascending dimension, row-major anchor, horizontal before vertical), which
puts every face before its cofaces.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import LabelMask, ProbMap

ORIENT_NONE = -1
ORIENT_H = 0
ORIENT_V = 1


@dataclass(frozen=True)
class Cell:
    dim: int
    anchor: tuple[int, int]
    orientation: int  # ORIENT_H / ORIENT_V for edges, ORIENT_NONE otherwise
    value: float
    critical_vertex: tuple[int, int]


@dataclass
class FilteredComplex:
    """Cell arrays in layout order plus the filtration permutation.

    Layout order is: all vertices row-major, then edges grouped by anchor
    (horizontal first), then squares row-major. `order` indexes into the
    layout so that cells appear in filtration order.
    """

    values_2d: np.ndarray  # (H, W) float64 pixel values
    dims: np.ndarray  # (n,) int8
    anchor_r: np.ndarray  # (n,) int32
    anchor_c: np.ndarray
    orientation: np.ndarray  # (n,) int8
    values: np.ndarray  # (n,) float64 cell filtration values
    crit_r: np.ndarray  # (n,) int32 critical vertex of each cell
    crit_c: np.ndarray
    order: np.ndarray  # (n,) filtration permutation over layout indices
    _edge_lookup: np.ndarray = field(repr=False, default=None)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values_2d.shape

    @property
    def n_vertices(self) -> int:
        h, w = self.shape
        return h * w

    @property
    def n_edges(self) -> int:
        h, w = self.shape
        return h * (w - 1) + (h - 1) * w

    @property
    def n_squares(self) -> int:
        h, w = self.shape
        return (h - 1) * (w - 1)

    def __len__(self) -> int:
        return self.values.size

    def cell(self, i: int) -> Cell:
        return Cell(
            dim=int(self.dims[i]),
            anchor=(int(self.anchor_r[i]), int(self.anchor_c[i])),
            orientation=int(self.orientation[i]),
            value=float(self.values[i]),
            critical_vertex=(int(self.crit_r[i]), int(self.crit_c[i])),
        )

    def cells(self):
        """Cells in filtration order."""
        for i in self.order:
            yield self.cell(int(i))

    def faces_of(self, i: int) -> list[int]:
        """Layout indices of the codimension-1 faces of cell i."""
        h, w = self.shape
        d = int(self.dims[i])
        r, c = int(self.anchor_r[i]), int(self.anchor_c[i])
        if d == 0:
            return []
        if d == 1:
            if int(self.orientation[i]) == ORIENT_H:
                return [r * w + c, r * w + c + 1]
            return [r * w + c, (r + 1) * w + c]
        # square: its four edges, via the edge lookup table
        return [
            self._edge_index(r, c, ORIENT_H),
            self._edge_index(r + 1, c, ORIENT_H),
            self._edge_index(r, c, ORIENT_V),
            self._edge_index(r, c + 1, ORIENT_V),
        ]

    def _edge_index(self, r: int, c: int, orient: int) -> int:
        h, w = self.shape
        j = int(self._edge_lookup[(r * w + c) * 2 + orient])
        assert j >= 0, "no such edge"
        return j

    def subcomplex_counts(self, p: float) -> tuple[int, int, int]:
        """(V, E, F) cell counts of the p-superlevel subcomplex."""
        alive = self.values >= p
        return (
            int(np.count_nonzero(alive & (self.dims == 0))),
            int(np.count_nonzero(alive & (self.dims == 1))),
            int(np.count_nonzero(alive & (self.dims == 2))),
        )


def build_complex(m: ProbMap) -> FilteredComplex:
    vals = m.values.astype(np.float64)
    h, w = vals.shape
    n_v = h * w

    idx = np.arange(n_v, dtype=np.int32)
    vr, vc = idx // w, idx % w

    # edges interleaved per anchor, horizontal slot before vertical slot
    slot_anchor = np.repeat(idx, 2)
    slot_orient = np.tile(np.array([ORIENT_H, ORIENT_V], dtype=np.int8), n_v)
    ar, ac = slot_anchor // w, slot_anchor % w
    valid = np.where(slot_orient == ORIENT_H, ac < w - 1, ar < h - 1)
    e_anchor = slot_anchor[valid]
    e_orient = slot_orient[valid]
    er, ec = e_anchor // w, e_anchor % w
    other_r = np.where(e_orient == ORIENT_H, er, er + 1)
    other_c = np.where(e_orient == ORIENT_H, ec + 1, ec)
    v_a = vals[er, ec]
    v_b = vals[other_r, other_c]
    e_vals = np.minimum(v_a, v_b)
    # ties resolve to the anchor, the row-major smaller endpoint
    take_anchor = v_a <= v_b
    e_crit_r = np.where(take_anchor, er, other_r).astype(np.int32)
    e_crit_c = np.where(take_anchor, ec, other_c).astype(np.int32)

    edge_lookup = np.full(n_v * 2, -1, dtype=np.int64)
    edge_lookup[np.flatnonzero(valid)] = n_v + np.arange(e_vals.size)

    if h > 1 and w > 1:
        sr, sc = np.meshgrid(
            np.arange(h - 1, dtype=np.int32),
            np.arange(w - 1, dtype=np.int32),
            indexing="ij",
        )
        sr, sc = sr.ravel(), sc.ravel()
        corners = np.stack(
            [vals[sr, sc], vals[sr, sc + 1], vals[sr + 1, sc], vals[sr + 1, sc + 1]]
        )
        s_vals = corners.min(axis=0)
        which = corners.argmin(axis=0)  # first minimum, row-major corner order
        s_crit_r = (sr + (which >= 2)).astype(np.int32)
        s_crit_c = (sc + (which % 2)).astype(np.int32)
    else:
        sr = sc = np.zeros(0, dtype=np.int32)
        s_vals = np.zeros(0)
        s_crit_r = s_crit_c = np.zeros(0, dtype=np.int32)

    dims = np.concatenate(
        [
            np.zeros(n_v, dtype=np.int8),
            np.ones(e_vals.size, dtype=np.int8),
            np.full(s_vals.size, 2, dtype=np.int8),
        ]
    )
    anchor_r = np.concatenate([vr, er, sr]).astype(np.int32)
    anchor_c = np.concatenate([vc, ec, sc]).astype(np.int32)
    orientation = np.concatenate(
        [
            np.full(n_v, ORIENT_NONE, dtype=np.int8),
            e_orient,
            np.full(s_vals.size, ORIENT_NONE, dtype=np.int8),
        ]
    )
    cell_vals = np.concatenate([vals.ravel(), e_vals, s_vals])
    crit_r = np.concatenate([vr, e_crit_r, s_crit_r]).astype(np.int32)
    crit_c = np.concatenate([vc, e_crit_c, s_crit_c]).astype(np.int32)

    # stable sort on descending value; layout order realizes the tie-break
    order = np.argsort(-cell_vals, kind="stable")

    return FilteredComplex(
        values_2d=vals,
        dims=dims,
        anchor_r=anchor_r,
        anchor_c=anchor_c,
        orientation=orientation,
        values=cell_vals,
        crit_r=crit_r,
        crit_c=crit_c,
        order=order,
        _edge_lookup=edge_lookup,
    )


def binarise(m: ProbMap, p: float) -> LabelMask:
    """Foreground mask of the p-superlevel set: 1 iff value >= p."""
    if not (np.isfinite(p) and 0.0 <= p <= 1.0):
        raise ValueError(f"threshold must lie in [0, 1], got {p}")
    # compare in float64 so the threshold is not quantized to float32
    return LabelMask((m.values.astype(np.float64) >= float(p)).astype(np.uint8))

"""Persistence barcodes of superlevel filtrations on 2-D grids.

Pairs are produced by elder-rule union-find, which is the boundary-matrix
reduction with clearing specialized to 2-D V-construction complexes:

* dim 0: vertices and edges are swept in the exact filtration order
  (descending value; ties vertex-before-edge, row-major anchor, horizontal
  before vertical). An edge merging two components kills the younger one.
* dim 1: (edge, square) pairs are read off the planar dual. Dual nodes are
  squares plus one outer node; dual edges are the primal edges. Sweeping
  dual edges in exact reverse filtration order, a merge kills the younger
  dual component, whose birth square is where the corresponding hole fills.

Both sweeps are O(n alpha(n)) and jitted, so barcodes stay cheap inside the
refinement loop. Every pair is retained, including zero-lifetime ones; the
ranked views used by losses and reports exclude zero lifetimes and sort by
(lifetime desc, birth desc, row-major birth vertex).

Conventions: each cell's value is attributed to its minimal vertex (ties
row-major); the one essential dim-0 class gets death 0 and no death vertex.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .cubical import FilteredComplex
from .grids import ProbMap


@dataclass(frozen=True)
class PersistencePair:
    dim: int
    birth: float
    death: float
    birth_vertex: tuple[int, int]
    death_vertex: tuple[int, int] | None  # None for the essential class

    @property
    def lifetime(self) -> float:
        return self.birth - self.death


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def _sweep_h0(order, vals, e_a, e_b, n_v):
    """Union-find sweep over vertices+edges in filtration order.

    Returns (birth_vertex, death_vertex) flat indices for the n_v dim-0
    pairs; death_vertex is -1 for the essential class.
    """
    parent = np.full(n_v, -1, dtype=np.int64)
    birth = np.empty(n_v, dtype=np.int64)
    out_b = np.empty(n_v, dtype=np.int64)
    out_d = np.empty(n_v, dtype=np.int64)
    m = 0
    for k in range(order.size):
        cell = order[k]
        if cell < n_v:
            parent[cell] = cell
            birth[cell] = cell
            continue
        e = cell - n_v
        a = e_a[e]
        b = e_b[e]
        ra = _find(parent, a)
        rb = _find(parent, b)
        if ra == rb:
            continue
        ba = birth[ra]
        bb = birth[rb]
        # elder component: higher birth value, then smaller row-major vertex
        if vals[ba] > vals[bb] or (vals[ba] == vals[bb] and ba < bb):
            elder, young = ra, rb
        else:
            elder, young = rb, ra
        # the merging edge's critical vertex: min endpoint, row-major tie
        if vals[a] < vals[b] or (vals[a] == vals[b] and a < b):
            dv = a
        else:
            dv = b
        out_b[m] = birth[young]
        out_d[m] = dv
        m += 1
        parent[young] = elder
    root = _find(parent, order[0])  # order[0] is the first, highest vertex
    out_b[m] = birth[root]
    out_d[m] = -1
    return out_b, out_d


@njit(cache=True)
def _sweep_h1(eorder, edge_vals, e_a, e_b, f1, f2, sq_vals, vals, n_sq):
    """Dual union-find sweep in reverse filtration order.

    Node n_sq is the outer face and is elder than everything. Returns flat
    (birth_vertex, death_square) plus bar values for the n_sq dim-1 pairs.
    """
    parent = np.arange(n_sq + 1, dtype=np.int64)
    birth = np.arange(n_sq + 1, dtype=np.int64)
    out_bv = np.empty(n_sq, dtype=np.int64)
    out_ds = np.empty(n_sq, dtype=np.int64)
    out_birth = np.empty(n_sq, dtype=np.float64)
    out_death = np.empty(n_sq, dtype=np.float64)
    m = 0
    for k in range(eorder.size):
        t = eorder[k]
        r1 = _find(parent, f1[t])
        r2 = _find(parent, f2[t])
        if r1 == r2:
            continue
        b1 = birth[r1]
        b2 = birth[r2]
        # dual-elder: outer node first, then smaller square value, then
        # larger row-major anchor (reverse of the primal tie order)
        if b1 == n_sq:
            elder, young = r1, r2
        elif b2 == n_sq:
            elder, young = r2, r1
        elif sq_vals[b1] < sq_vals[b2] or (sq_vals[b1] == sq_vals[b2] and b1 > b2):
            elder, young = r1, r2
        else:
            elder, young = r2, r1
        ys = birth[young]
        a = e_a[t]
        b = e_b[t]
        if vals[a] < vals[b] or (vals[a] == vals[b] and a < b):
            bv = a
        else:
            bv = b
        out_bv[m] = bv
        out_ds[m] = ys
        out_birth[m] = edge_vals[t]
        out_death[m] = sq_vals[ys]
        m += 1
        parent[young] = elder
    return out_bv, out_ds, out_birth, out_death


class _ShapeTables:
    """Per-shape constant index arrays shared by every barcode call."""

    def __init__(self, h: int, w: int):
        n_v = h * w
        anchors = np.repeat(np.arange(n_v, dtype=np.int64), 2)
        orient = np.tile(np.array([0, 1], dtype=np.int64), n_v)  # 0=h, 1=v
        ar, ac = anchors // w, anchors % w
        valid = np.where(orient == 0, ac < w - 1, ar < h - 1)
        fa = anchors[valid]
        fo = orient[valid]
        self.h0_ea = fa
        self.h0_eb = fa + np.where(fo == 0, 1, w)

        # reverse layout: anchors descending, vertical slot before horizontal
        r_anchors = np.repeat(np.arange(n_v - 1, -1, -1, dtype=np.int64), 2)
        r_orient = np.tile(np.array([1, 0], dtype=np.int64), n_v)
        rr, rc = r_anchors // w, r_anchors % w
        r_valid = np.where(r_orient == 0, rc < w - 1, rr < h - 1)
        ra = r_anchors[r_valid]
        ro = r_orient[r_valid]
        self.h1_ea = ra
        self.h1_eb = ra + np.where(ro == 0, 1, w)

        n_sq = (h - 1) * (w - 1)
        self.n_sq = n_sq
        err, erc = ra // w, ra % w
        outer = n_sq
        # faces of a horizontal edge: squares above/below; vertical: left/right
        sq_up = np.where(err >= 1, (err - 1) * (w - 1) + erc, outer)
        sq_down = np.where(err <= h - 2, err * (w - 1) + erc, outer)
        sq_left = np.where(erc >= 1, err * (w - 1) + (erc - 1), outer)
        sq_right = np.where(erc <= w - 2, err * (w - 1) + erc, outer)
        self.h1_f1 = np.where(ro == 0, sq_up, sq_left).astype(np.int64)
        self.h1_f2 = np.where(ro == 0, sq_down, sq_right).astype(np.int64)

        if n_sq > 0:
            sr, sc = np.divmod(np.arange(n_sq, dtype=np.int64), w - 1)
            self.sq_corners = np.stack(
                [sr * w + sc, sr * w + sc + 1, (sr + 1) * w + sc, (sr + 1) * w + sc + 1]
            )
        else:
            self.sq_corners = np.zeros((4, 0), dtype=np.int64)


_tables: dict[tuple[int, int], _ShapeTables] = {}


def _tables_for(h: int, w: int) -> _ShapeTables:
    key = (h, w)
    tab = _tables.get(key)
    if tab is None:
        tab = _tables[key] = _ShapeTables(h, w)
    return tab


@dataclass
class Barcode:
    """All persistence pairs of one map, as flat arrays.

    Zero-lifetime pairs are kept (indices into the arrays never lie) but
    every ranked accessor filters them out.
    """

    shape: tuple[int, int]
    dims: np.ndarray
    births: np.ndarray
    deaths: np.ndarray
    birth_r: np.ndarray
    birth_c: np.ndarray
    death_r: np.ndarray  # -1 where no death cell exists
    death_c: np.ndarray
    _ranked_cache: dict = field(default_factory=dict, repr=False)

    def ranked(self, d: int) -> np.ndarray:
        """Indices of positive-lifetime dim-d pairs, in ranked order:
        lifetime desc, then birth desc, then row-major birth vertex."""
        cached = self._ranked_cache.get(d)
        if cached is not None:
            return cached
        life = self.births - self.deaths
        sel = np.flatnonzero((self.dims == d) & (life > 0))
        w = self.shape[1]
        flat = self.birth_r[sel] * w + self.birth_c[sel]
        order = np.lexsort((flat, -self.births[sel], -life[sel]))
        out = sel[order]
        self._ranked_cache[d] = out
        return out

    def lifetimes(self, d: int) -> np.ndarray:
        idx = self.ranked(d)
        return self.births[idx] - self.deaths[idx]

    def lifetime(self, d: int, l: int) -> float:
        """l-th largest positive lifetime in dimension d (1-based); 0 if
        there are fewer than l pairs."""
        if l < 1:
            raise ValueError("rank l is 1-based")
        lt = self.lifetimes(d)
        return float(lt[l - 1]) if l <= lt.size else 0.0

    def betti_at(self, p: float, d: int) -> int:
        """Number of dim-d classes alive at threshold p, i.e. bars whose
        interval (death, birth] contains p."""
        if not (0.0 < p <= 1.0):
            raise ValueError(f"threshold must lie in (0, 1], got {p}")
        return int(
            np.count_nonzero((self.dims == d) & (self.deaths < p) & (p <= self.births))
        )

    @property
    def pairs(self) -> list[PersistencePair]:
        """Ranked positive-lifetime pairs, dim 0 first."""
        out = []
        for d in (0, 1):
            for i in self.ranked(d):
                dv = None
                if self.death_r[i] >= 0:
                    dv = (int(self.death_r[i]), int(self.death_c[i]))
                out.append(
                    PersistencePair(
                        dim=int(self.dims[i]),
                        birth=float(self.births[i]),
                        death=float(self.deaths[i]),
                        birth_vertex=(int(self.birth_r[i]), int(self.birth_c[i])),
                        death_vertex=dv,
                    )
                )
        return out

    def value_triples(self) -> list[tuple[int, float, float]]:
        """Positive-lifetime (dim, birth, death) triples, for oracle
        comparison."""
        return [
            (int(self.dims[i]), float(self.births[i]), float(self.deaths[i]))
            for d in (0, 1)
            for i in self.ranked(d)
        ]


def barcode_of(values) -> Barcode:
    """Barcode of a 2-D value grid (ProbMap or array)."""
    vals = values.values if isinstance(values, ProbMap) else values
    vals = np.ascontiguousarray(np.asarray(vals, dtype=np.float64))
    h, w = vals.shape
    flat = vals.ravel()
    tab = _tables_for(h, w)
    n_v = h * w

    h0_evals = np.minimum(flat[tab.h0_ea], flat[tab.h0_eb])
    comb = np.concatenate([flat, h0_evals])
    order = np.argsort(-comb, kind="stable")
    b0_v, d0_v = _sweep_h0(order, flat, tab.h0_ea, tab.h0_eb, n_v)

    if tab.n_sq > 0:
        h1_evals = np.minimum(flat[tab.h1_ea], flat[tab.h1_eb])
        eorder = np.argsort(h1_evals, kind="stable")
        corner_vals = flat[tab.sq_corners]
        sq_vals = corner_vals.min(axis=0)
        which = corner_vals.argmin(axis=0)  # first min = row-major tie
        sq_crit = tab.sq_corners[which, np.arange(tab.n_sq)]
        b1_v, d1_s, b1_val, d1_val = _sweep_h1(
            eorder, h1_evals, tab.h1_ea, tab.h1_eb, tab.h1_f1, tab.h1_f2,
            sq_vals, flat, tab.n_sq,
        )
        d1_v = sq_crit[d1_s]
    else:
        b1_v = d1_v = np.zeros(0, dtype=np.int64)
        b1_val = d1_val = np.zeros(0, dtype=np.float64)

    dims = np.concatenate(
        [np.zeros(n_v, dtype=np.int8), np.ones(b1_v.size, dtype=np.int8)]
    )
    births = np.concatenate([flat[b0_v], b1_val])
    essential = d0_v < 0
    d0_val = np.where(essential, 0.0, flat[np.where(essential, 0, d0_v)])
    deaths = np.concatenate([d0_val, d1_val])
    birth_flat = np.concatenate([b0_v, b1_v])
    death_flat = np.concatenate([d0_v, d1_v])  # -1 marks the essential pair
    birth_r = (birth_flat // w).astype(np.int32)
    birth_c = (birth_flat % w).astype(np.int32)
    death_r = np.where(death_flat >= 0, death_flat // w, -1).astype(np.int32)
    death_c = np.where(death_flat >= 0, death_flat % w, -1).astype(np.int32)

    return Barcode(
        shape=(h, w),
        dims=dims,
        births=births,
        deaths=deaths,
        birth_r=birth_r,
        birth_c=birth_c,
        death_r=death_r,
        death_c=death_c,
    )


def compute_barcode(fc: FilteredComplex) -> Barcode:
    return barcode_of(fc.values_2d)


def betti_at(barcode: Barcode, p: float, d: int) -> int:
    return barcode.betti_at(p, d)


def lifetime(barcode: Barcode, d: int, l: int) -> float:
    return barcode.lifetime(d, l)

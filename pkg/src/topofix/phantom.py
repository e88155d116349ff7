"""Synthetic short-axis phantoms and topology-violating corruptions.

The base phantom is a concentric pair (lv disk inside a my annulus) with an
rv crescent hugging the annulus from outside, which realizes every entry of
short_axis_prior(). Corruptions edit the probability field so that a
documented subset of prior entries breaks; edited pixels get a moderate
confidence, the way a segmentation network is typically wrong.

All randomness flows through numpy's default_rng (PCG64), seeded from the
spec, so identical seeds reproduce identical fields bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grids import (
    CLASS_LV,
    CLASS_MY,
    CLASS_RV,
    FOREGROUND_CLASSES,
    LabelMask,
    MultiClassProb,
)
from .priors import BettiPrior, prior_from_mask, short_axis_prior

ARC_SPAN = np.deg2rad(150.0)  # angular width of the rv crescent
LOGIT_NOISE_SIGMA = 0.05  # logit jitter of softened fields; breaks value ties

KIND_SPURIOUS = "spurious_component"
KIND_HOLE = "punched_hole"
KIND_BROKEN_RING = "broken_ring"
KIND_ADJACENCY = "adjacency_break"
KIND_SOFTEN = "soften"
KINDS = (KIND_SPURIOUS, KIND_HOLE, KIND_BROKEN_RING, KIND_ADJACENCY, KIND_SOFTEN)

_PLACEMENT_ATTEMPTS = 100


class GeometryError(ValueError):
    """Phantom parameters do not realize the prior on the grid."""


class CorruptionError(ValueError):
    """The requested corruption cannot be placed or is a topological no-op."""


@dataclass(frozen=True)
class PhantomSpec:
    size: int = 96
    lv_radius: float = 12.0
    my_thickness: float = 6.0
    rv_extent: float = 9.0  # radial thickness of the crescent
    jitter: float = 2.0  # center perturbation scale, pixels
    temperature: float = 0.25  # softening of the one-hot output
    noise_sigma: float = LOGIT_NOISE_SIGMA
    seed: int = 0


@dataclass(frozen=True)
class CorruptionSpec:
    kind: str
    klass: int | None = None
    size: int = 9  # approximate footprint area in pixels
    confidence: float = 0.6  # probability written on edited pixels
    gap: int = 2  # broken_ring: gap width in pixels
    shift: int = 2  # adjacency_break: outward translation in pixels
    temperature: float = 0.6  # soften: new softening temperature
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown corruption kind {self.kind!r}")
        if self.kind in (KIND_SPURIOUS, KIND_HOLE):
            if self.klass not in FOREGROUND_CLASSES:
                raise ValueError(f"{self.kind} needs a foreground class")
            if self.size < 1:
                raise CorruptionError(f"{self.kind} with size {self.size} changes nothing")
        if self.kind == KIND_BROKEN_RING and self.gap < 1:
            raise CorruptionError("broken_ring with zero gap changes nothing")
        if self.kind == KIND_ADJACENCY and self.shift < 1:
            raise CorruptionError("adjacency_break with zero shift changes nothing")
        if not (0.0 < self.confidence < 1.0):
            raise ValueError("confidence must lie strictly inside (0, 1)")

    @classmethod
    def spurious_component(cls, klass: int, size: int = 9, confidence: float = 0.6, seed: int = 0):
        return cls(kind=KIND_SPURIOUS, klass=klass, size=size, confidence=confidence, seed=seed)

    @classmethod
    def punched_hole(cls, klass: int, size: int = 4, seed: int = 0):
        return cls(kind=KIND_HOLE, klass=klass, size=size, seed=seed)

    @classmethod
    def broken_ring(cls, gap: int = 2, seed: int = 0):
        return cls(kind=KIND_BROKEN_RING, gap=gap, seed=seed)

    @classmethod
    def adjacency_break(cls, shift: int = 2, seed: int = 0):
        return cls(kind=KIND_ADJACENCY, shift=shift, seed=seed)

    @classmethod
    def soften(cls, temperature: float = 0.6, seed: int = 0):
        return cls(kind=KIND_SOFTEN, temperature=temperature, seed=seed)

    def violated_entries(self) -> frozenset[tuple[int, int, int]]:
        """Prior entries (i, j, d) this corruption breaks."""
        k = self.klass
        if self.kind == KIND_SPURIOUS:
            return frozenset((min(k, o), max(k, o), 0) for o in FOREGROUND_CLASSES)
        if self.kind == KIND_HOLE:
            return frozenset((min(k, o), max(k, o), 1) for o in FOREGROUND_CLASSES)
        if self.kind == KIND_BROKEN_RING:
            return frozenset({(CLASS_MY, CLASS_MY, 1), (CLASS_RV, CLASS_MY, 1)})
        if self.kind == KIND_ADJACENCY:
            return frozenset({(CLASS_RV, CLASS_MY, 0)})
        return frozenset()


@dataclass(frozen=True)
class CorruptionResult:
    prob: MultiClassProb
    footprint: np.ndarray  # bool (H, W): pixels the corruption may touch
    violated: frozenset


def soften_mask(
    mask: LabelMask,
    temperature: float,
    noise_sigma: float = 0.0,
    rng: np.random.Generator | None = None,
) -> MultiClassProb:
    """Temperature-softened one-hot field; argmax always recovers the mask.

    Softmax of one-hot logits scaled by 1/temperature, with optional Gaussian
    logit jitter so that no two pixels share an exact probability value (a
    network head never emits exact ties, and downstream value-ordering should
    not have to resolve them). temperature 0 gives the exact one-hot field.
    """
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    lab = mask.labels
    if temperature == 0:
        channels = np.zeros((4,) + lab.shape, dtype=np.float64)
        for c in range(4):
            channels[c][lab == c] = 1.0
        return MultiClassProb(channels.astype(np.float32))
    logits = np.zeros((4,) + lab.shape, dtype=np.float64)
    for c in range(4):
        logits[c][lab == c] = 1.0 / temperature
    if noise_sigma > 0:
        if rng is None:
            rng = np.random.default_rng(0)
        # kept well below the one-hot logit gap, so argmax is untouched
        logits += noise_sigma * rng.standard_normal(logits.shape)
    logits -= logits.max(axis=0, keepdims=True)
    e = np.exp(logits)
    channels = e / e.sum(axis=0, keepdims=True)
    return MultiClassProb(channels.astype(np.float32))


def generate(spec: PhantomSpec) -> tuple[LabelMask, MultiClassProb]:
    """Ground-truth mask plus its softened probability field.

    The generated mask is checked to satisfy short_axis_prior() exactly;
    parameter combinations that fail (overflow, broken adjacency) raise
    GeometryError rather than returning a wrong phantom.
    """
    rng = np.random.default_rng(spec.seed)
    h = w = int(spec.size)
    cy = (h - 1) / 2.0 + rng.uniform(-spec.jitter, spec.jitter)
    cx = (w - 1) / 2.0 + rng.uniform(-spec.jitter, spec.jitter)
    arc_center = rng.uniform(0.0, 2.0 * np.pi)

    r_my = spec.lv_radius + spec.my_thickness
    r_rv = r_my + spec.rv_extent
    if r_rv + max(abs(cy - (h - 1) / 2), abs(cx - (w - 1) / 2)) >= min(h, w) / 2.0 - 1.0:
        raise GeometryError("phantom does not fit inside the grid")

    rr, cc = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    dist = np.hypot(rr - cy, cc - cx)
    ang = np.arctan2(rr - cy, cc - cx)
    dang = np.abs(_wrap_angle(ang - arc_center))

    labels = np.zeros((h, w), dtype=np.uint8)
    labels[dist <= r_rv] = np.uint8(0)
    labels[(dist > r_my) & (dist <= r_rv) & (dang <= ARC_SPAN / 2)] = CLASS_RV
    labels[(dist > spec.lv_radius) & (dist <= r_my)] = CLASS_MY
    labels[dist <= spec.lv_radius] = CLASS_LV
    mask = LabelMask(labels)

    if prior_from_mask(mask) != short_axis_prior():
        raise GeometryError(
            "generated mask violates the target prior; adjust radii/jitter"
        )
    return mask, soften_mask(mask, spec.temperature, spec.noise_sigma, rng)


def corrupt(mask: LabelMask, prob: MultiClassProb, c: CorruptionSpec) -> MultiClassProb:
    return corrupt_with_info(mask, prob, c).prob


def corrupt_with_info(mask: LabelMask, prob: MultiClassProb, c: CorruptionSpec) -> CorruptionResult:
    """Apply a corruption and verify it breaks exactly the documented
    prior entries (checked through the argmax of the edited field)."""
    rng = np.random.default_rng(c.seed)
    base_prior = prior_from_mask(mask)
    for _ in range(_PLACEMENT_ATTEMPTS):
        out = _apply_once(mask, prob, c, rng)
        if out is None:
            continue
        channels, footprint = out
        new_prob = MultiClassProb(channels.astype(np.float32))
        if _violations(new_prob, base_prior) == c.violated_entries():
            return CorruptionResult(
                prob=new_prob, footprint=footprint, violated=c.violated_entries()
            )
    raise CorruptionError(
        f"could not place corruption {c.kind!r} on this phantom"
    )


def _violations(prob: MultiClassProb, base: BettiPrior) -> frozenset:
    got = prior_from_mask(_argmax(prob))
    return frozenset(
        key for key, want in base.entries() if got.get(*key) != want
    )


def _argmax(prob: MultiClassProb) -> LabelMask:
    return LabelMask(np.argmax(prob.channels, axis=0).astype(np.uint8))


def _wrap_angle(a: np.ndarray) -> np.ndarray:
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def _stamp(channels: np.ndarray, where: np.ndarray, klass: int, confidence: float) -> None:
    """Overwrite class probability at `where` pixels, rescaling the rest."""
    rest = channels[:, where]
    rest[klass] = 0.0
    total = rest.sum(axis=0)
    rest *= (1.0 - confidence) / total
    rest[klass] = confidence
    channels[:, where] = rest


def _disk(h: int, w: int, center: tuple[int, int], radius: float) -> np.ndarray:
    rr, cc = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    return np.hypot(rr - center[0], cc - center[1]) <= radius


def _disk_extent(radius: float) -> int:
    """Chebyshev extent of the pixel footprint of a radius-`radius` disk."""
    n = int(np.ceil(radius))
    off = np.arange(-n, n + 1)
    dr, dc = np.meshgrid(off, off, indexing="ij")
    inside = np.hypot(dr, dc) <= radius
    return int(np.max(np.maximum(np.abs(dr), np.abs(dc))[inside]))


def _box_clear(occupied: np.ndarray, margin: int) -> np.ndarray:
    """Pixels whose Chebyshev `margin`-neighbourhood avoids `occupied`."""
    clear = ~occupied
    out = clear.copy()
    for _ in range(margin):
        inner = out
        out = inner.copy()
        out[1:, :] &= inner[:-1, :]
        out[:-1, :] &= inner[1:, :]
        out[:, 1:] &= inner[:, :-1]
        out[:, :-1] &= inner[:, 1:]
        out[1:, 1:] &= inner[:-1, :-1]
        out[:-1, :-1] &= inner[1:, 1:]
        out[1:, :-1] &= inner[:-1, 1:]
        out[:-1, 1:] &= inner[1:, :-1]
    return out


def _apply_once(mask, prob, c, rng):
    """One placement attempt; None when the draw found no room."""
    lab = mask.labels
    h, w = lab.shape
    channels = prob.channels.astype(np.float64)

    if c.kind == KIND_SOFTEN:
        soft = soften_mask(mask, c.temperature, LOGIT_NOISE_SIGMA, rng)
        return soft.channels.astype(np.float64), np.ones((h, w), dtype=bool)

    if c.kind == KIND_SPURIOUS:
        radius = max(1.0, np.sqrt(c.size / np.pi))
        margin = _disk_extent(radius) + 2
        ok = _box_clear(lab != 0, margin)
        ok[: margin + 1, :] = ok[-margin - 1 :, :] = False
        ok[:, : margin + 1] = ok[:, -margin - 1 :] = False
        cand = np.flatnonzero(ok)
        if cand.size == 0:
            return None
        center = divmod(int(rng.choice(cand)), w)
        blob = _disk(h, w, center, radius)
        _stamp(channels, blob, c.klass, c.confidence)
        return channels, blob

    if c.kind == KIND_HOLE:
        radius = max(1.0, np.sqrt(c.size / np.pi))
        margin = _disk_extent(radius) + 1
        ok = _box_clear(lab != c.klass, margin)
        cand = np.flatnonzero(ok)
        if cand.size == 0:
            return None
        center = divmod(int(rng.choice(cand)), w)
        hole = _disk(h, w, center, radius)
        _stamp(channels, hole, 0, c.confidence)
        return channels, hole

    # the remaining kinds need the annulus center
    my_lv = (lab == CLASS_MY) | (lab == CLASS_LV)
    rs, cs = np.nonzero(my_lv)
    cy, cx = rs.mean(), cs.mean()

    if c.kind == KIND_BROKEN_RING:
        my = lab == CLASS_MY
        rr, cc = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
        ang = np.arctan2(rr - cy, cc - cx)
        my_r = np.hypot(rs - cy, cs - cx)
        half = (c.gap / 2.0) / float(np.median(my_r))  # half-angle of the cut
        rv_px = np.nonzero(lab == CLASS_RV)
        rv_angles = np.arctan2(rv_px[0] - cy, rv_px[1] - cx)
        cut_angle = rng.uniform(-np.pi, np.pi)
        if rv_angles.size and np.min(np.abs(_wrap_angle(rv_angles - cut_angle))) < half + 0.35:
            return None  # too close to the crescent, would not break rv-my
        cut = my & (np.abs(_wrap_angle(ang - cut_angle)) <= half)
        if not cut.any():
            return None
        _stamp(channels, cut, 0, c.confidence)
        return channels, cut

    if c.kind == KIND_ADJACENCY:
        rv = lab == CLASS_RV
        rv_px = np.nonzero(rv)
        if rv_px[0].size == 0:
            return None
        vy, vx = rv_px[0].mean() - cy, rv_px[1].mean() - cx
        norm = np.hypot(vy, vx)
        dy, dx = vy / norm, vx / norm
        src_r, src_c = rv_px
        my = lab == CLASS_MY
        # c.shift is the minimum translation; a curved arc end can stay in
        # contact after a rigid shift, so grow until a 4-adjacency gap opens
        for scale in range(c.shift, c.shift + 9):
            oy, ox = int(np.rint(dy * scale)), int(np.rint(dx * scale))
            if oy == 0 and ox == 0:
                continue
            dst_r, dst_c = src_r + oy, src_c + ox
            if dst_r.min() < 0 or dst_r.max() >= h or dst_c.min() < 0 or dst_c.max() >= w:
                return None
            new_rv = np.zeros_like(rv)
            new_rv[dst_r, dst_c] = True
            if (new_rv & (lab != 0) & ~rv).any():
                continue  # crescent would land on another structure
            touching = np.zeros_like(new_rv)
            touching[1:, :] |= new_rv[:-1, :]
            touching[:-1, :] |= new_rv[1:, :]
            touching[:, 1:] |= new_rv[:, :-1]
            touching[:, :-1] |= new_rv[:, 1:]
            if (touching & my).any():
                continue  # still in contact somewhere along the arc
            vacated = rv & ~new_rv
            gained = new_rv & ~rv
            _stamp(channels, vacated, 0, c.confidence)
            _stamp(channels, gained, CLASS_RV, c.confidence)
            return channels, rv | new_rv
        return None

    raise AssertionError(f"unhandled kind {c.kind}")

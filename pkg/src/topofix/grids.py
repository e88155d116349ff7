"""Grid types and the TGRID file format.

Three grid kinds move through the pipeline: a single-channel probability map,
a four-channel class-probability field (background, right ventricle,
myocardium, left ventricle), and an integer label mask. Payloads are stored
exactly as held in memory (float32 / uint8), so save -> load round-trips
bit-for-bit.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

CLASS_BG = 0
CLASS_RV = 1
CLASS_MY = 2
CLASS_LV = 3
CLASS_NAMES = ("bg", "rv", "my", "lv")
FOREGROUND_CLASSES = (CLASS_RV, CLASS_MY, CLASS_LV)
N_CLASSES = 4

# channel sums may drift from 1 by float32 rounding, no further
PROB_SUM_TOL = 1e-6

MAGIC = "TGRID"
VERSION = "v1"
_KIND_CHANNELS = {"prob": 1, "multiclass": N_CLASSES, "label": 1}


class GridFormatError(ValueError):
    """Malformed header, bad payload size, or out-of-range values."""


def _as_float32_grid(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError(f"{name} expects a 2-D array, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class ProbMap:
    """Single-channel probability map, values in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_float32_grid(self.values, "ProbMap")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("ProbMap values must lie in [0, 1]")
        object.__setattr__(self, "values", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __eq__(self, other) -> bool:
        return isinstance(other, ProbMap) and np.array_equal(
            self.values.view(np.uint32), other.values.view(np.uint32)
        )


@dataclass(frozen=True)
class MultiClassProb:
    """(4, H, W) class probabilities; per-pixel channel sum is 1."""

    channels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.channels, dtype=np.float32)
        if arr.ndim != 3 or arr.shape[0] != N_CLASSES:
            raise ValueError(
                f"MultiClassProb expects shape (4, H, W), got {arr.shape}"
            )
        if arr.shape[1] == 0 or arr.shape[2] == 0:
            raise ValueError("MultiClassProb must be non-empty")
        if not np.all(np.isfinite(arr)):
            raise ValueError("MultiClassProb contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("MultiClassProb values must lie in [0, 1]")
        sums = arr.sum(axis=0, dtype=np.float64)
        err = np.abs(sums - 1.0).max()
        if err > PROB_SUM_TOL:
            raise ValueError(
                f"MultiClassProb channels must sum to 1 (max deviation {err:.3g})"
            )
        object.__setattr__(self, "channels", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.channels.shape[1:]

    def channel(self, c: int) -> ProbMap:
        return ProbMap(self.channels[c])

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiClassProb) and np.array_equal(
            self.channels.view(np.uint32), other.channels.view(np.uint32)
        )


@dataclass(frozen=True)
class LabelMask:
    """Integer labels in {0 bg, 1 rv, 2 my, 3 lv}."""

    labels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 2:
            raise ValueError(f"LabelMask expects a 2-D array, got shape {arr.shape}")
        if arr.size == 0:
            raise ValueError("LabelMask must be non-empty")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError("LabelMask requires an integer array")
        if arr.min() < 0 or arr.max() >= N_CLASSES:
            raise ValueError("LabelMask labels must lie in {0, 1, 2, 3}")
        object.__setattr__(self, "labels", arr.astype(np.uint8))

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def __eq__(self, other) -> bool:
        return isinstance(other, LabelMask) and np.array_equal(
            self.labels, other.labels
        )


Grid = ProbMap | MultiClassProb | LabelMask


def _kind_of(grid: Grid) -> str:
    if isinstance(grid, ProbMap):
        return "prob"
    if isinstance(grid, MultiClassProb):
        return "multiclass"
    if isinstance(grid, LabelMask):
        return "label"
    raise TypeError(f"not a grid: {type(grid).__name__}")


def save_grid(grid: Grid, path) -> None:
    """Write `TGRID v1 <kind> <channels> <height> <width>\\n` + raw payload.

    Payload is row-major, channel-major; float32 little-endian for prob and
    multiclass kinds, uint8 for label masks.
    """
    kind = _kind_of(grid)
    h, w = grid.shape
    header = f"{MAGIC} {VERSION} {kind} {_KIND_CHANNELS[kind]} {h} {w}\n"
    if kind == "label":
        payload = grid.labels.astype(np.uint8).tobytes()
    elif kind == "prob":
        payload = grid.values.astype("<f4").tobytes()
    else:
        payload = grid.channels.astype("<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(payload)


def load_grid(path) -> Grid:
    """Read a TGRID file. Out-of-range values are errors, never repaired."""
    with open(path, "rb") as fh:
        header = _read_header_line(fh)
        fields = header.split(" ")
        if len(fields) != 6 or fields[0] != MAGIC or fields[1] != VERSION:
            raise GridFormatError(f"malformed header: {header!r}")
        kind = fields[2]
        if kind not in _KIND_CHANNELS:
            raise GridFormatError(f"unknown grid kind {kind!r}")
        try:
            channels, h, w = (int(f) for f in fields[3:6])
        except ValueError:
            raise GridFormatError(f"non-integer dimensions in header: {header!r}")
        if channels != _KIND_CHANNELS[kind]:
            raise GridFormatError(
                f"kind {kind!r} requires {_KIND_CHANNELS[kind]} channels, header says {channels}"
            )
        if h <= 0 or w <= 0:
            raise GridFormatError(f"non-positive grid size {h}x{w}")
        dtype = np.dtype(np.uint8) if kind == "label" else np.dtype("<f4")
        expected = channels * h * w * dtype.itemsize
        payload = fh.read(expected + 1)
        if len(payload) < expected:
            raise GridFormatError(
                f"truncated payload: expected {expected} bytes, got {len(payload)}"
            )
        if len(payload) > expected:
            raise GridFormatError("oversized payload: trailing bytes after grid data")
    flat = np.frombuffer(payload, dtype=dtype)
    try:
        if kind == "prob":
            return ProbMap(flat.reshape(h, w))
        if kind == "multiclass":
            return MultiClassProb(flat.reshape(channels, h, w))
        return LabelMask(flat.reshape(h, w))
    except ValueError as exc:
        raise GridFormatError(str(exc)) from exc


def _read_header_line(fh: io.BufferedReader) -> str:
    raw = bytearray()
    while True:
        b = fh.read(1)
        if not b:
            raise GridFormatError("missing header line")
        if b == b"\n":
            break
        raw += b
        if len(raw) > 128:
            raise GridFormatError("header line too long")
    try:
        return raw.decode("ascii")
    except UnicodeDecodeError:
        raise GridFormatError("header is not ASCII")

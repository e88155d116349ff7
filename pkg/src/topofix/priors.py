"""Betti-number priors over class unions.

A prior stores B[i][j][d] for foreground classes i <= j (rv=1, my=2, lv=3)
and dimensions d in {0, 1}: twelve numbers specifying how many components
and holes each single class and each pairwise union must exhibit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baseline import betti_mask
from .grids import CLASS_NAMES, FOREGROUND_CLASSES, LabelMask

# the (i, j) pairs a prior covers, in canonical order
PAIR_ORDER = ((1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3))


@dataclass(frozen=True)
class BettiPrior:
    """table[i][j][d] for 1 <= i <= j <= 3, d in {0, 1}."""

    table: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.table, dtype=np.int64)
        if arr.shape != (4, 4, 2):
            raise ValueError(f"prior table must be (4, 4, 2), got {arr.shape}")
        if arr.min() < 0:
            raise ValueError("Betti numbers cannot be negative")
        object.__setattr__(self, "table", arr)

    def get(self, i: int, j: int, d: int) -> int:
        if not (i in FOREGROUND_CLASSES and j in FOREGROUND_CLASSES and i <= j):
            raise ValueError(f"prior entries are indexed by 1 <= i <= j <= 3, got ({i}, {j})")
        if d not in (0, 1):
            raise ValueError(f"dimension must be 0 or 1, got {d}")
        return int(self.table[i, j, d])

    def entries(self):
        """All twelve ((i, j, d), B) entries in canonical order."""
        for i, j in PAIR_ORDER:
            for d in (0, 1):
                yield (i, j, d), int(self.table[i, j, d])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BettiPrior):
            return NotImplemented
        return all(
            self.table[i, j, d] == other.table[i, j, d]
            for i, j in PAIR_ORDER
            for d in (0, 1)
        )


def _prior_from_pairs(pairs: dict[tuple[int, int], tuple[int, int]]) -> BettiPrior:
    table = np.zeros((4, 4, 2), dtype=np.int64)
    for (i, j), (b0, b1) in pairs.items():
        table[i, j, 0] = b0
        table[i, j, 1] = b1
    return BettiPrior(table)


def short_axis_prior() -> BettiPrior:
    """The mid-cavity short-axis anatomy: rv abuts my, my is a ring filled
    by lv, rv and lv stay apart."""
    return _prior_from_pairs(
        {
            (1, 1): (1, 0),  # rv: one blob
            (2, 2): (1, 1),  # my: one ring
            (3, 3): (1, 0),  # lv: one blob
            (1, 2): (1, 1),  # rv touches my, hole retained
            (1, 3): (2, 0),  # rv and lv disjoint
            (2, 3): (1, 0),  # lv fills my's hole
        }
    )


def union_mask(mask: LabelMask, i: int, j: int) -> LabelMask:
    """Binary mask of pixels labelled i or j."""
    lab = mask.labels
    return LabelMask(((lab == i) | (lab == j)).astype(np.uint8))


def prior_from_mask(mask: LabelMask) -> BettiPrior:
    """Read the twelve Betti numbers straight off a label mask."""
    return _prior_from_pairs(
        {(i, j): betti_mask(union_mask(mask, i, j)) for i, j in PAIR_ORDER}
    )


def save_prior(prior: BettiPrior, path) -> None:
    lines = []
    for i, j in PAIR_ORDER:
        lines.append(
            f"{CLASS_NAMES[i]} {CLASS_NAMES[j]} "
            f"{prior.get(i, j, 0)} {prior.get(i, j, 1)}\n"
        )
    with open(path, "w", encoding="ascii") as fh:
        fh.writelines(lines)


def load_prior(path) -> BettiPrior:
    """Parse the six-line `<class_i> <class_j> <b0> <b1>` format; every
    pair must appear exactly once."""
    name_to_idx = {n: k for k, n in enumerate(CLASS_NAMES)}
    seen: dict[tuple[int, int], tuple[int, int]] = {}
    with open(path, "r", encoding="ascii") as fh:
        for ln, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"{path}:{ln}: expected 4 fields, got {len(parts)}")
            ci, cj = parts[0], parts[1]
            if ci not in name_to_idx or cj not in name_to_idx:
                raise ValueError(f"{path}:{ln}: unknown class in {ci!r} {cj!r}")
            i, j = name_to_idx[ci], name_to_idx[cj]
            if not (i in FOREGROUND_CLASSES and j in FOREGROUND_CLASSES and i <= j):
                raise ValueError(f"{path}:{ln}: pair must satisfy rv<=my<=lv ordering")
            if (i, j) in seen:
                raise ValueError(f"{path}:{ln}: duplicate pair {ci} {cj}")
            try:
                b0, b1 = int(parts[2]), int(parts[3])
            except ValueError:
                raise ValueError(f"{path}:{ln}: Betti numbers must be integers")
            if b0 < 0 or b1 < 0:
                raise ValueError(f"{path}:{ln}: Betti numbers must be non-negative")
            seen[(i, j)] = (b0, b1)
    missing = [p for p in PAIR_ORDER if p not in seen]
    if missing:
        names = ", ".join(f"{CLASS_NAMES[i]} {CLASS_NAMES[j]}" for i, j in missing)
        raise ValueError(f"{path}: missing prior entries for: {names}")
    return _prior_from_pairs(seen)

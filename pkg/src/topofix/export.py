"""Barcode serialization: CSV interchange and an SVG diagram."""
from __future__ import annotations

import io

from .persistence import Barcode, PersistencePair

CSV_HEADER = "dim,birth,death,birth_row,birth_col,death_row,death_col"


class BarcodeFormatError(ValueError):
    """Malformed barcode CSV."""


def _pair_rows(pairs):
    for p in pairs:
        if p.death_vertex is None:
            dr = dc = ""
        else:
            dr, dc = str(p.death_vertex[0]), str(p.death_vertex[1])
        yield (
            f"{p.dim},{p.birth!r},{p.death!r},"
            f"{p.birth_vertex[0]},{p.birth_vertex[1]},{dr},{dc}"
        )


def write_barcode_csv(barcode: Barcode | list[PersistencePair], path) -> None:
    """Ranked positive-lifetime pairs, one row per bar.

    Floats are written with repr() so reading the file back reproduces the
    exact double; the essential class leaves its death vertex cells empty.
    """
    pairs = barcode.pairs if isinstance(barcode, Barcode) else barcode
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(CSV_HEADER + "\n")
        for row in _pair_rows(pairs):
            f.write(row + "\n")


def read_barcode_csv(path) -> list[PersistencePair]:
    with open(path, "r", encoding="ascii") as f:
        header = f.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise BarcodeFormatError(f"unexpected header {header!r}")
        out = []
        for lineno, line in enumerate(f, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != 7:
                raise BarcodeFormatError(f"line {lineno}: expected 7 cells")
            try:
                dim = int(cells[0])
                birth, death = float(cells[1]), float(cells[2])
                bv = (int(cells[3]), int(cells[4]))
            except ValueError as e:
                raise BarcodeFormatError(f"line {lineno}: {e}") from e
            if (cells[5] == "") != (cells[6] == ""):
                raise BarcodeFormatError(f"line {lineno}: half-empty death vertex")
            dv = None if cells[5] == "" else (int(cells[5]), int(cells[6]))
            if dim not in (0, 1):
                raise BarcodeFormatError(f"line {lineno}: dimension {dim}")
            out.append(
                PersistencePair(
                    dim=dim, birth=birth, death=death, birth_vertex=bv, death_vertex=dv
                )
            )
        return out


def render_barcode_svg(
    barcode: Barcode | list[PersistencePair],
    path=None,
    min_lifetime: float = 0.0,
    title: str = "",
) -> str:
    """Horizontal bar diagram over the value axis [0, 1].

    Bars run from death to birth, ranked top to bottom within each dimension;
    dim-0 bars are solid, dim-1 bars hollow. Returns the SVG text and writes
    it to `path` when given. `min_lifetime` hides shorter bars, which keeps
    diagrams of noisy fields readable.
    """
    pairs = barcode.pairs if isinstance(barcode, Barcode) else list(barcode)
    shown = [
        [p for p in pairs if p.dim == d and p.lifetime >= min_lifetime]
        for d in (0, 1)
    ]

    width, bar_h, gap, margin, block_gap = 640.0, 7.0, 4.0, 42.0, 26.0
    n_bars = sum(len(s) for s in shown)
    height = 2 * margin + n_bars * (bar_h + gap) + block_gap

    def x_of(v: float) -> float:
        return margin + v * (width - 2 * margin)

    buf = io.StringIO()
    buf.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    buf.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" '
        f'height="{height:g}" viewBox="0 0 {width:g} {height:g}">\n'
    )
    if title:
        buf.write(
            f'  <text x="{margin:g}" y="{margin - 20:g}" '
            f'font-family="sans-serif" font-size="13">{title}</text>\n'
        )
    # value axis with ticks at 0, 0.5, 1
    axis_y = height - margin + 10
    buf.write(
        f'  <line x1="{x_of(0):g}" y1="{axis_y:g}" x2="{x_of(1):g}" '
        f'y2="{axis_y:g}" stroke="black" stroke-width="1"/>\n'
    )
    for v in (0.0, 0.5, 1.0):
        buf.write(
            f'  <line x1="{x_of(v):g}" y1="{axis_y - 3:g}" x2="{x_of(v):g}" '
            f'y2="{axis_y + 3:g}" stroke="black" stroke-width="1"/>\n'
        )
        buf.write(
            f'  <text x="{x_of(v):g}" y="{axis_y + 16:g}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{v:g}</text>\n'
        )

    y = margin
    for d, group in enumerate(shown):
        if group:
            buf.write(
                f'  <text x="{margin:g}" y="{y - 5:g}" font-family="sans-serif" '
                f'font-size="11">dim {d} ({len(group)} bars)</text>\n'
            )
        for p in group:
            x0, x1 = x_of(p.death), x_of(p.birth)
            style = (
                'fill="#1f6fb2"'
                if d == 0
                else 'fill="none" stroke="#b23f1f" stroke-width="1.5"'
            )
            buf.write(
                f'  <rect x="{x0:g}" y="{y:g}" width="{max(x1 - x0, 0.5):g}" '
                f'height="{bar_h:g}" {style}/>\n'
            )
            y += bar_h + gap
        y += block_gap
    buf.write("</svg>\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    return text

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from topofix.export import (
    BarcodeFormatError,
    read_barcode_csv,
    render_barcode_svg,
    write_barcode_csv,
)
from topofix.persistence import barcode_of

from conftest import random_prob


@pytest.fixture(scope="module")
def barcode():
    return barcode_of(random_prob(np.random.default_rng(8), 14, 14, 8))


class TestCsv:
    def test_round_trip_is_exact(self, barcode, tmp_path):
        p = tmp_path / "bars.csv"
        write_barcode_csv(barcode, p)
        assert read_barcode_csv(p) == barcode.pairs

    def test_essential_bar_has_empty_death_vertex_cells(self, barcode, tmp_path):
        p = tmp_path / "bars.csv"
        write_barcode_csv(barcode, p)
        essential = [
            line for line in p.read_text().strip().split("\n")[1:] if line.endswith(",,")
        ]
        assert len(essential) == 1

    def test_header_checked(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("dim,birth,death\n")
        with pytest.raises(BarcodeFormatError):
            read_barcode_csv(p)

    def test_cell_count_checked(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text(
            "dim,birth,death,birth_row,birth_col,death_row,death_col\n0,0.5,0.0,1\n"
        )
        with pytest.raises(BarcodeFormatError):
            read_barcode_csv(p)

    def test_half_empty_death_vertex_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text(
            "dim,birth,death,birth_row,birth_col,death_row,death_col\n"
            "0,0.5,0.0,1,1,2,\n"
        )
        with pytest.raises(BarcodeFormatError):
            read_barcode_csv(p)

    def test_bad_dimension_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text(
            "dim,birth,death,birth_row,birth_col,death_row,death_col\n"
            "2,0.5,0.0,1,1,,\n"
        )
        with pytest.raises(BarcodeFormatError):
            read_barcode_csv(p)


class TestSvg:
    def test_wellformed_and_one_rect_per_bar(self, barcode):
        svg = render_barcode_svg(barcode)
        root = ET.fromstring(svg)
        rects = root.findall(".//{http://www.w3.org/2000/svg}rect")
        assert len(rects) == len(barcode.pairs)

    def test_min_lifetime_filters_bars(self, barcode):
        cutoff = 0.2
        svg = render_barcode_svg(barcode, min_lifetime=cutoff)
        root = ET.fromstring(svg)
        rects = root.findall(".//{http://www.w3.org/2000/svg}rect")
        kept = [p for p in barcode.pairs if p.lifetime >= cutoff]
        assert len(rects) == len(kept)

    def test_writes_file(self, barcode, tmp_path):
        p = tmp_path / "bars.svg"
        text = render_barcode_svg(barcode, p, title="demo")
        assert p.read_text() == text
        assert "demo" in text

    def test_dim0_solid_dim1_hollow(self, barcode):
        svg = render_barcode_svg(barcode)
        root = ET.fromstring(svg)
        rects = root.findall(".//{http://www.w3.org/2000/svg}rect")
        fills = {r.get("fill") for r in rects}
        assert "none" in fills  # hollow dim-1 bars
        assert any(f and f.startswith("#") for f in fills)

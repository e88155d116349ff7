"""CLI subcommands, driven in-process through main()."""
import numpy as np
import pytest

from topofix.cli import main
from topofix.export import read_barcode_csv
from topofix.grids import LabelMask, MultiClassProb, load_grid, save_grid
from topofix.metrics import mean_dsc
from topofix.priors import save_prior, short_axis_prior

SIZE = "64"  # smallest grid the default geometry fits comfortably


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    rc = main(
        [
            "phantom",
            "--truth", str(d / "truth.tgrid"),
            "--prob", str(d / "prob.tgrid"),
            "--size", SIZE,
            "--seed", "3",
            "--corrupt", "spurious_component",
            "--klass", "lv",
            "--corrupt-seed", "4",
        ]
    )
    assert rc == 0
    return d


class TestPhantom:
    def test_writes_both_grids(self, workdir):
        truth = load_grid(workdir / "truth.tgrid")
        prob = load_grid(workdir / "prob.tgrid")
        assert isinstance(truth, LabelMask)
        assert isinstance(prob, MultiClassProb)
        assert truth.shape == (64, 64)

    def test_corruption_shows_up_in_the_field(self, workdir):
        truth = load_grid(workdir / "truth.tgrid")
        prob = load_grid(workdir / "prob.tgrid")
        am = np.argmax(prob.channels, axis=0)
        assert (am != truth.labels).any()

    def test_missing_klass_for_spurious_fails(self, tmp_path):
        with pytest.raises(SystemExit):
            main(
                [
                    "phantom",
                    "--truth", str(tmp_path / "t.tgrid"),
                    "--prob", str(tmp_path / "p.tgrid"),
                    "--size", SIZE,
                    "--corrupt", "spurious_component",
                ]
            )


class TestBarcode:
    def test_csv_output(self, workdir):
        out = workdir / "bars.csv"
        rc = main(["barcode", str(workdir / "prob.tgrid"), "--ci", "lv", "--csv", str(out)])
        assert rc == 0
        pairs = read_barcode_csv(out)
        assert pairs and all(p.lifetime > 0 for p in pairs)

    def test_svg_output(self, workdir):
        out = workdir / "bars.svg"
        rc = main(
            [
                "barcode", str(workdir / "prob.tgrid"),
                "--ci", "rv", "--cj", "my",
                "--svg", str(out), "--min-lifetime", "0.05",
            ]
        )
        assert rc == 0
        assert out.read_text().startswith("<?xml")

    def test_rejects_label_input(self, workdir):
        with pytest.raises(SystemExit):
            main(["barcode", str(workdir / "truth.tgrid")])


class TestLossAndRefine:
    def test_loss_prints_a_total(self, workdir, capsys):
        rc = main(["loss", str(workdir / "prob.tgrid")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "total" in out
        assert float(out.strip().split()[-1]) > 0

    def test_refine_repairs_and_reports(self, workdir, capsys):
        out = workdir / "refined.tgrid"
        maskout = workdir / "refined_mask.tgrid"
        hist = workdir / "hist.csv"
        rc = main(
            [
                "refine", str(workdir / "prob.tgrid"),
                "--out", str(out),
                "--mask-out", str(maskout),
                "--history", str(hist),
            ]
        )
        assert rc == 0
        assert "prior satisfied: True" in capsys.readouterr().out
        truth = load_grid(workdir / "truth.tgrid")
        refined_mask = load_grid(maskout)
        assert mean_dsc(truth, refined_mask) > 0.99
        assert hist.read_text().startswith("iteration,topo,similarity,total")

    def test_custom_prior_file(self, workdir, tmp_path):
        prior_path = tmp_path / "prior.txt"
        save_prior(short_axis_prior(), prior_path)
        rc = main(["loss", str(workdir / "prob.tgrid"), "--prior", str(prior_path)])
        assert rc == 0


class TestCcaAndMetrics:
    def test_cca_writes_a_mask(self, workdir):
        out = workdir / "cca.tgrid"
        rc = main(["cca", str(workdir / "prob.tgrid"), "--out", str(out)])
        assert rc == 0
        assert isinstance(load_grid(out), LabelMask)

    def test_metrics_reports_dice_lines(self, workdir, capsys):
        rc = main(
            [
                "metrics",
                "--truth", str(workdir / "truth.tgrid"),
                "--pred", str(workdir / "truth.tgrid"),
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "dice[mean] = 1.000000" in out
        assert "prior satisfied: True" in out

    def test_missing_file_is_a_clean_error(self, tmp_path, capsys):
        rc = main(["loss", str(tmp_path / "nope.tgrid")])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

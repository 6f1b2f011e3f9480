import json

import numpy as np
import pytest

from sdn import BinaryImage, load_image, load_model, pixel_error, save_pgm
from sdn.cli_app import main, format_histogram_table, render_overlay_svg
from sdn import SdnModel, SimilarityDomain, sigma_histogram


def disk_image(size=16, r=5):
    yy, xx = np.mgrid[0:size, 0:size]
    c = size // 2
    return BinaryImage(size, size, ((xx - c) ** 2 + (yy - c) ** 2 <= r * r).astype(np.uint8))


def two_blob_image():
    yy, xx = np.mgrid[0:32, 0:32]
    mask = ((xx - 8) ** 2 + (yy - 8) ** 2 <= 9) | ((xx - 24) ** 2 + (yy - 24) ** 2 <= 16)
    return BinaryImage(32, 32, mask.astype(np.uint8))


@pytest.fixture()
def disk_pgm(tmp_path):
    path = tmp_path / "disk.pgm"
    save_pgm(disk_image(), path)
    return path


@pytest.fixture()
def trained(tmp_path, disk_pgm, capsys):
    out = tmp_path / "out"
    code = main(["train", str(disk_pgm), "--out-dir", str(out)])
    capsys.readouterr()
    assert code == 0
    return out / "disk.sdn"


class TestTrain:
    def test_success_reports_metrics(self, tmp_path, disk_pgm, capsys):
        out = tmp_path / "run"
        code = main(["train", str(disk_pgm), "--T", "0.05", "--out-dir", str(out)])
        stdout = capsys.readouterr().out
        assert code == 0
        assert "pixel_error=0" in stdout
        assert (out / "disk.sdn").exists()

    def test_manifest_matches_model(self, tmp_path, disk_pgm, capsys):
        out = tmp_path / "run"
        main(["train", str(disk_pgm), "--out-dir", str(out)])
        capsys.readouterr()
        manifest = json.loads((out / "disk.manifest.json").read_text())
        model = load_model(out / "disk.sdn")
        assert manifest["metrics"]["k"] == model.k
        fg = sum(1 for d in model.domains if d.label == 1)
        assert manifest["metrics"]["s1"] == fg
        assert manifest["metrics"]["s2"] == model.k - fg
        assert manifest["metrics"]["pixel_error"] == pixel_error(
            model, load_image(disk_pgm)
        )
        for name in manifest["outputs"]:
            assert (out / name.split("/")[-1]).exists()
        assert manifest["config"]["T"] == 0.05

    def test_identical_runs_are_byte_identical(self, tmp_path, disk_pgm, capsys):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["train", str(disk_pgm), "--out-dir", str(out1)])
        main(["train", str(disk_pgm), "--out-dir", str(out2)])
        capsys.readouterr()
        assert (out1 / "disk.sdn").read_bytes() == (out2 / "disk.sdn").read_bytes()

    def test_single_class_image_exits_3(self, tmp_path, capsys):
        path = tmp_path / "blank.pgm"
        save_pgm(BinaryImage(4, 4, np.zeros((4, 4), dtype=np.uint8)), path)
        code = main(["train", str(path), "--out-dir", str(tmp_path / "o")])
        assert code == 3
        assert "error" in capsys.readouterr().err

    def test_missing_file_exits_5(self, tmp_path, capsys):
        code = main(["train", str(tmp_path / "nope.pgm")])
        capsys.readouterr()
        assert code == 5

    def test_usage_error_exits_3(self, capsys):
        code = main(["train"])  # missing the image argument
        capsys.readouterr()
        assert code == 3

    def test_verbose_reports_solver_progress(self, tmp_path, disk_pgm, capsys):
        code = main(["train", str(disk_pgm), "--verbose",
                     "--out-dir", str(tmp_path / "v")])
        err = capsys.readouterr().err
        assert code == 0
        assert "iter=" in err and "gap=" in err

    def test_config_file_precedence(self, tmp_path, disk_pgm, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"T": 0.1, "C": 500.0}))
        out = tmp_path / "o"
        main(["train", str(disk_pgm), "--config", str(cfg), "--T", "0.05",
              "--out-dir", str(out)])
        capsys.readouterr()
        model = load_model(out / "disk.sdn")
        assert model.T == 0.05  # flag wins
        assert model.C == 500.0  # config file beats the built-in default


class TestReconstruct:
    def test_zero_error_against_reference(self, tmp_path, trained, disk_pgm, capsys):
        code = main(["reconstruct", str(trained), "--reference", str(disk_pgm),
                     "--out-dir", str(tmp_path / "r")])
        stdout = capsys.readouterr().out
        assert code == 0
        assert "pixel_error=0" in stdout
        recon = load_image(tmp_path / "r" / "disk.recon.pgm")
        assert recon == disk_image()

    def test_mismatched_reference_exits_2(self, tmp_path, trained, capsys):
        other = tmp_path / "other.pgm"
        img = disk_image()
        flipped = img.pixels.copy()
        flipped[0, 0] ^= 1
        save_pgm(BinaryImage(16, 16, flipped), other)
        code = main(["reconstruct", str(trained), "--reference", str(other),
                     "--out-dir", str(tmp_path / "r")])
        capsys.readouterr()
        assert code == 2

    def test_allow_error_suppresses_exit_2(self, tmp_path, trained, capsys):
        other = tmp_path / "other.pgm"
        img = disk_image()
        flipped = img.pixels.copy()
        flipped[0, 0] ^= 1
        save_pgm(BinaryImage(16, 16, flipped), other)
        code = main(["reconstruct", str(trained), "--reference", str(other),
                     "--allow-error", "--out-dir", str(tmp_path / "r")])
        capsys.readouterr()
        assert code == 0


class TestOneClassAndTransform:
    def test_oneclass_writes_render(self, tmp_path, trained, capsys):
        code = main(["oneclass", str(trained), "--out-dir", str(tmp_path / "o")])
        capsys.readouterr()
        assert code == 0
        assert (tmp_path / "o" / "disk.oneclass.pgm").exists()

    def test_identity_transform_equals_oneclass(self, tmp_path, trained, capsys):
        script = tmp_path / "id.txt"
        script.write_text("GROUP 0 SCALE 1 SHIFT 0 0\n")
        main(["oneclass", str(trained), "--out-dir", str(tmp_path / "o")])
        code = main(["transform", str(trained), str(script),
                     "--out-dir", str(tmp_path / "t")])
        capsys.readouterr()
        assert code == 0
        assert (tmp_path / "t" / "disk.transformed.pgm").read_bytes() == (
            tmp_path / "o" / "disk.oneclass.pgm"
        ).read_bytes()

    def test_bad_script_line_exits_5(self, tmp_path, trained, capsys):
        script = tmp_path / "bad.txt"
        script.write_text("GROUP 0 SCALE 1 SHIFT 0 0\nGROUP 1 NOPE\n")
        code = main(["transform", str(trained), str(script),
                     "--out-dir", str(tmp_path / "t")])
        err = capsys.readouterr().err
        assert code == 5
        assert "line 2" in err

    def test_unknown_group_exits_3(self, tmp_path, trained, capsys):
        script = tmp_path / "ghost.txt"
        script.write_text("GROUP 9 SCALE 1 SHIFT 0 0\n")
        code = main(["transform", str(trained), str(script),
                     "--out-dir", str(tmp_path / "t")])
        capsys.readouterr()
        assert code == 3


class TestGroupsAndInspect:
    def test_two_blob_groups(self, tmp_path, capsys):
        pgm = tmp_path / "blobs.pgm"
        save_pgm(two_blob_image(), pgm)
        out = tmp_path / "o"
        main(["train", str(pgm), "--out-dir", str(out)])
        capsys.readouterr()
        code = main(["groups", str(out / "blobs.sdn")])
        stdout = capsys.readouterr().out
        assert code == 0
        assert "groups=2" in stdout

    def test_inspect_reports_counts(self, trained, capsys):
        code = main(["inspect", str(trained)])
        stdout = capsys.readouterr().out
        assert code == 0
        model = load_model(trained)
        assert f"k={model.k}" in stdout
        assert "Bin Center:" in stdout


class TestSkeletonCommand:
    def test_outputs_and_histogram(self, tmp_path, trained, capsys):
        code = main(["skeleton", str(trained), "--out-dir", str(tmp_path / "s")])
        stdout = capsys.readouterr().out
        assert code == 0
        assert stdout.startswith("Bin Center:")
        assert "Total Counts:" in stdout
        skel = (tmp_path / "s" / "disk.skeleton.txt").read_text()
        assert skel.startswith("NODE 0 ")
        svg = (tmp_path / "s" / "disk.skeleton.svg").read_text()
        assert "<svg" in svg and "generated by sdn" in svg

    def test_threshold_above_max_exits_3(self, tmp_path, trained, capsys):
        code = main(["skeleton", str(trained), "--threshold", "1e9",
                     "--out-dir", str(tmp_path / "s")])
        err = capsys.readouterr().err
        assert code == 3
        assert "lower threshold" in err

    def test_model_stored_radius_factor_wins_over_default(self, tmp_path, disk_pgm, capsys):
        out = tmp_path / "o"
        main(["train", str(disk_pgm), "--a", "3.5", "--out-dir", str(out)])
        model = out / "disk.sdn"
        main(["skeleton", str(model), "--out-dir", str(tmp_path / "sa")])
        main(["skeleton", str(model), "--a", "3.5", "--out-dir", str(tmp_path / "sb")])
        capsys.readouterr()
        assert (tmp_path / "sa" / "disk.skeleton.txt").read_bytes() == (
            tmp_path / "sb" / "disk.skeleton.txt"
        ).read_bytes()

    def test_skeleton_outputs_deterministic(self, tmp_path, trained, capsys):
        main(["skeleton", str(trained), "--out-dir", str(tmp_path / "s1")])
        main(["skeleton", str(trained), "--out-dir", str(tmp_path / "s2")])
        capsys.readouterr()
        for name in ("disk.skeleton.txt", "disk.skeleton.svg"):
            assert (tmp_path / "s1" / name).read_bytes() == (
                tmp_path / "s2" / name
            ).read_bytes()


class TestHistogramTable:
    def test_layout_matches_bins(self):
        domains = tuple(
            SimilarityDomain((float(i), 0.0), float(v), 1.0, 1)
            for i, v in enumerate(range(1, 11))
        )
        model = SdnModel(domains, 0.05, 1000.0, 2.85, 16, 16)
        table = format_histogram_table(sigma_histogram(model, 10))
        center_row, count_row = table.splitlines()
        assert center_row.startswith("Bin Center:")
        assert count_row.startswith("Total Counts:")
        centers = [float(tok) for tok in center_row.split(":")[1].split()]
        counts = [int(tok) for tok in count_row.split(":")[1].split()]
        assert counts == [1] * 10
        width = 0.9
        assert centers == [round(1 + width * (i + 0.5), 2) for i in range(10)]


class TestSvgRenderer:
    def test_deterministic_and_well_formed(self):
        img = disk_image()
        domains = (
            SimilarityDomain((8.0, 8.0), 4.0, 1.0, 1),
            SimilarityDomain((3.0, 3.0), 1.0, 0.5, -1),
        )
        one = render_overlay_svg(img, domains, a=2.85)
        two = render_overlay_svg(img, domains, a=2.85)
        assert one == two
        assert one.count("<circle") == 4  # one outline + one center dot each
        assert one.count("<line") == 2  # radius ticks
        assert "</svg>" in one

from __future__ import annotations

import json
from pathlib import Path

import pytest

from momentmap.cli import main
from momentmap.synth import generate_dataset


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_data")
    generate_dataset(root, days=1, hours_per_day=0.5)
    return root


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestArgHandling:
    def test_missing_required_flag_exits_1_naming_it(self, capsys):
        code, _, err = run(capsys, "bundle", "--gps", "g.csv", "--images", "i/",
                           "--out", "b/")
        assert code == 1
        assert "--hr" in err

    def test_unknown_flag_exits_1_with_usage(self, capsys):
        code, _, err = run(capsys, "ingest", "--frobnicate")
        assert code == 1
        assert "usage" in err.lower()

    def test_bad_size_flag(self, capsys, dataset_dir):
        code, _, err = run(capsys, "heatmap", "--gps", str(dataset_dir / "gps.csv"),
                           "--images", str(dataset_dir / "images"), "--size", "big")
        assert code == 1
        assert "WxH" in err

    def test_missing_input_file_exits_1(self, capsys, tmp_path):
        code, _, err = run(capsys, "ingest", "--hr", str(tmp_path / "absent.csv"))
        assert code == 1


class TestIngestCommand:
    def test_reports_on_stderr(self, capsys, dataset_dir):
        code, out, err = run(capsys, "ingest", "--hr", str(dataset_dir / "hr.csv"))
        assert code == 0
        assert "hr: accepted=" in err

    def test_json_report_matches_parse_counts(self, capsys, dataset_dir):
        code, out, _ = run(
            capsys, "ingest",
            "--hr", str(dataset_dir / "hr.csv"),
            "--gps", str(dataset_dir / "gps.csv"),
            "--images", str(dataset_dir / "images"),
            "--report", "json",
        )
        assert code == 0
        summary = json.loads(out)
        assert summary["reports"]["hr"]["accepted"] == summary["counts"]["hr"]
        assert summary["reports"]["gps"]["accepted"] == summary["counts"]["gps"]
        assert summary["reports"]["images"]["accepted"] == summary["counts"]["images"]
        assert summary["reports"]["hr"]["rejected"] == 0

    def test_nothing_to_ingest(self, capsys):
        code, _, err = run(capsys, "ingest")
        assert code == 1


class TestPipelineCommands:
    def test_fuse_writes_windows_csv(self, capsys, dataset_dir, tmp_path):
        out = tmp_path / "fused"
        code, _, err = run(capsys, "fuse", "--hr", str(dataset_dir / "hr.csv"),
                           "--out", str(out))
        assert code == 0
        header = (out / "windows.csv").read_text().splitlines()[0]
        assert header == "window_start,mean_bpm,n_samples"

    def test_moments_csv_to_stdout(self, capsys, dataset_dir):
        code, out, _ = run(capsys, "moments", "--hr", str(dataset_dir / "hr.csv"))
        assert code == 0
        assert out.splitlines()[0] == "start,end,peak_delta,n_frames,label"

    def test_heatmap_writes_png(self, capsys, dataset_dir, tmp_path):
        png = tmp_path / "map.png"
        code, _, _ = run(capsys, "heatmap",
                         "--gps", str(dataset_dir / "gps.csv"),
                         "--images", str(dataset_dir / "images"),
                         "--size", "96x64", "--radius-px", "5",
                         "--out", str(png))
        assert code == 0
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_bundle_end_to_end(self, capsys, dataset_dir, tmp_path):
        out = tmp_path / "bundle"
        code, stdout, err = run(
            capsys, "bundle",
            "--hr", str(dataset_dir / "hr.csv"),
            "--gps", str(dataset_dir / "gps.csv"),
            "--images", str(dataset_dir / "images"),
            "--size", "128x96", "--radius-px", "6",
            "--out", str(out), "--report", "json",
        )
        assert code == 0
        assert (out / "manifest.json").is_file()
        summary = json.loads(stdout)
        manifest = json.loads((out / "manifest.json").read_text())
        assert summary["episodes"] == len(manifest["episodes"])
        assert summary["windows"] == len(manifest["windows"])
        assert summary["reports"] == manifest["reports"]

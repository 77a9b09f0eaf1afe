from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from momentmap.ingest import (
    ParseError,
    blur_score,
    gps_to_csv,
    heart_rate_to_csv,
    parse_gps_csv,
    parse_heart_rate_csv,
    parse_timestamp,
    scan_images,
)

from oracles import laplacian_variance


def hr_csv(rows: list[str]) -> str:
    return "time,bpm\n" + "".join(r + "\n" for r in rows)


def gps_csv(rows: list[str]) -> str:
    return "time,lat,lon\n" + "".join(r + "\n" for r in rows)


class TestParseTimestamp:
    def test_bare_time_of_day_anchors_to_epoch_day(self):
        assert parse_timestamp("06:00:00", 0) == 6 * 3600

    def test_full_datetime(self):
        assert parse_timestamp("1970-01-02T00:00:10", 0) == 86410

    def test_tz_offset_subtracted(self):
        # device records local 06:00 at UTC+9 -> 21:00 UTC the previous day
        assert parse_timestamp("06:00:00", 9 * 3600) == 6 * 3600 - 9 * 3600


class TestHeartRateParser:
    def test_two_simple_rows(self):
        samples, report = parse_heart_rate_csv(hr_csv(["06:00:00,72", "06:00:01,74"]))
        assert [(s.t, s.bpm) for s in samples] == [(21600, 72), (21601, 74)]
        assert report.line() == "accepted=2 rejected=0 duplicates=0"

    def test_full_recording_span(self):
        # 1 Hz for 6 h 26 m = 23160 rows
        n = 6 * 3600 + 26 * 60
        rows = [f"2017-04-02T{6 + i // 3600:02d}:{i // 60 % 60:02d}:{i % 60:02d},70" for i in range(n)]
        samples, report = parse_heart_rate_csv(hr_csv(rows))
        assert len(samples) == 23160
        assert report.accepted == 23160

    def test_out_of_range_bpm_rejected_not_clamped(self):
        samples, report = parse_heart_rate_csv(hr_csv(["06:00:00,300"]))
        assert samples == []
        assert report.rejected == 1

    def test_bpm_bounds_inclusive(self):
        samples, _ = parse_heart_rate_csv(hr_csv(["06:00:00,25", "06:00:01,250"]))
        assert [s.bpm for s in samples] == [25, 250]
        samples, report = parse_heart_rate_csv(hr_csv(["06:00:00,24", "06:00:01,251"]))
        assert samples == [] and report.rejected == 2

    def test_non_increasing_rows_dropped(self):
        samples, report = parse_heart_rate_csv(
            hr_csv(["06:00:02,70", "06:00:02,71", "06:00:01,72", "06:00:03,73"])
        )
        assert [s.t for s in samples] == [21602, 21603]
        assert report.rejected == 2
        assert report.duplicates == 1

    def test_malformed_header_is_hard_error(self):
        with pytest.raises(ParseError):
            parse_heart_rate_csv("when,pulse\n06:00:00,72\n")

    def test_empty_body_is_not_an_error(self):
        samples, report = parse_heart_rate_csv("time,bpm\n")
        assert samples == [] and report.accepted == 0

    def test_missing_header_is_hard_error(self):
        with pytest.raises(ParseError):
            parse_heart_rate_csv("")

    def test_unparseable_rows_skipped_and_counted(self):
        samples, report = parse_heart_rate_csv(
            hr_csv(["06:00:00,72", "garbage", "06:00:01,72.5", "06:00:02,74"])
        )
        assert len(samples) == 2
        assert report.rejected == 2


class TestGpsParser:
    def test_simple_fix(self):
        fixes, _ = parse_gps_csv(gps_csv(["06:00:00,33.8940,130.8400"]))
        assert len(fixes) == 1
        assert fixes[0].lat == 33.894 and fixes[0].lon == 130.84

    def test_duplicate_timestamp_keeps_first(self):
        fixes, report = parse_gps_csv(
            gps_csv(["06:00:00,33.0,130.0", "06:00:00,34.0,131.0"])
        )
        assert len(fixes) == 1
        assert fixes[0].lat == 33.0
        assert report.duplicates == 1
        assert report.line() == "accepted=1 rejected=1 duplicates=1"

    def test_out_of_bounds_dropped(self):
        fixes, report = parse_gps_csv(
            gps_csv(["06:00:00,91.0,0.0", "06:00:01,0.0,181.0", "06:00:02,0.0,0.0"])
        )
        assert len(fixes) == 1
        assert report.rejected == 2

    def test_parser_sorts(self):
        fixes, _ = parse_gps_csv(gps_csv(["06:00:05,1.0,1.0", "06:00:01,2.0,2.0"]))
        assert [f.t for f in fixes] == [21601, 21605]


bpm_rows = st.lists(
    st.tuples(st.integers(0, 200_000), st.integers(-10, 400)), max_size=60
)


@given(bpm_rows)
def test_hr_parser_deterministic_and_conserves_rows(rows):
    text = hr_csv([f"{'1970-01-01T'}{t // 3600 % 24:02d}:{t // 60 % 60:02d}:{t % 60:02d},{bpm}"
                   for t, bpm in rows])
    first, report1 = parse_heart_rate_csv(text)
    second, report2 = parse_heart_rate_csv(text)
    assert first == second
    assert report1 == report2
    assert report1.accepted + report1.rejected == len(rows)
    assert report1.duplicates <= report1.rejected


@given(st.lists(st.tuples(st.integers(0, 10**6), st.integers(25, 250)), max_size=50))
def test_hr_round_trip(rows):
    rows = sorted({t: bpm for t, bpm in rows}.items())
    text = hr_csv([f"1970-01-0{1 + t // 86400}T{t // 3600 % 24:02d}:{t // 60 % 60:02d}:{t % 60:02d},{bpm}"
                   for t, bpm in rows if t < 2 * 86400])
    samples, _ = parse_heart_rate_csv(text)
    reparsed, report = parse_heart_rate_csv(heart_rate_to_csv(samples))
    assert reparsed == samples
    assert report.rejected == 0


@given(
    st.lists(
        st.tuples(
            st.integers(0, 86399),
            st.floats(-90, 90, allow_nan=False),
            st.floats(-180, 180, allow_nan=False),
        ),
        max_size=40,
    )
)
def test_gps_round_trip(rows):
    text = gps_csv([f"{t // 3600:02d}:{t // 60 % 60:02d}:{t % 60:02d},{lat!r},{lon!r}"
                    for t, lat, lon in rows])
    fixes, _ = parse_gps_csv(text)
    reparsed, report = parse_gps_csv(gps_to_csv(fixes))
    assert reparsed == fixes
    assert report.rejected == 0


class TestBlurScore:
    def test_constant_image_scores_zero(self):
        assert blur_score(np.full((10, 12), 137.0)) == 0.0

    def test_single_white_dot_matches_conv_oracle(self):
        raster = np.zeros((7, 7))
        raster[3, 3] = 255.0
        expected = laplacian_variance(raster.tolist())
        assert blur_score(raster) == pytest.approx(expected, rel=1e-12)

    def test_checkerboard_sharper_than_blurred_copy(self):
        side = 16
        checker = np.indices((side, side)).sum(axis=0) % 2 * 255.0
        # crude 3x3 box blur as the smoothing stand-in
        padded = np.pad(checker, 1, mode="edge")
        blurred = sum(
            padded[dy : dy + side, dx : dx + side] for dy in range(3) for dx in range(3)
        ) / 9.0
        score_sharp = laplacian_variance(checker.tolist())
        score_blurred = laplacian_variance(blurred.tolist())
        assert score_sharp > score_blurred
        assert blur_score(checker) == pytest.approx(score_sharp, rel=1e-12)
        assert blur_score(blurred) == pytest.approx(score_blurred, rel=1e-12)

    def test_too_small_raster_rejected(self):
        with pytest.raises(ValueError):
            blur_score(np.zeros((2, 5)))

    @given(
        st.integers(3, 12),
        st.integers(3, 12),
        st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=50)
    def test_mirror_invariance(self, h, w, seed):
        rng = np.random.default_rng(seed)
        raster = rng.integers(0, 256, size=(h, w)).astype(np.float64)
        base = blur_score(raster)
        assert blur_score(raster[:, ::-1]) == pytest.approx(base, rel=1e-12)
        assert blur_score(raster[::-1, :]) == pytest.approx(base, rel=1e-12)


class TestScanImages:
    def write_image(self, path, sharp=True, size=(32, 24)):
        rng = np.random.default_rng(hash(path.name) % 2**32)
        if sharp:
            pixels = rng.integers(0, 256, size=size[::-1]).astype(np.uint8)
        else:
            pixels = np.full(size[::-1], 128, dtype=np.uint8)
        Image.fromarray(pixels, "L").save(path)

    def test_empty_directory(self, tmp_path):
        records, report = scan_images(tmp_path)
        assert records == [] and report.accepted == 0

    def test_filename_pattern_decodes_to_epoch(self, tmp_path):
        self.write_image(tmp_path / "20170402_060030.jpg")
        records, _ = scan_images(tmp_path)
        assert len(records) == 1
        assert records[0].t == 1491112830  # 2017-04-02 06:00:30 UTC
        assert records[0].id == "20170402_060030"

    def test_eight_hour_day_produces_960_records(self, tmp_path):
        # 8 h at one frame per 30 s
        for i in range(960):
            t = 6 * 3600 + i * 30
            name = f"19700101_{t // 3600:02d}{t // 60 % 60:02d}{t % 60:02d}.jpg"
            self.write_image(tmp_path / name, sharp=(i % 2 == 0))
        records, report = scan_images(tmp_path)
        assert len(records) == 960
        assert report.accepted == 960
        assert [r.t for r in records] == sorted(r.t for r in records)

    def test_non_matching_files_reported_not_fatal(self, tmp_path):
        self.write_image(tmp_path / "20170402_060000.jpg")
        self.write_image(tmp_path / "holiday-photo.jpg")
        (tmp_path / "notes.txt").write_text("not an image")
        records, report = scan_images(tmp_path)
        assert len(records) == 1
        assert report.rejected == 2

    def test_unreadable_file_skipped(self, tmp_path):
        self.write_image(tmp_path / "20170402_060000.jpg")
        (tmp_path / "20170402_060030.jpg").write_bytes(b"not a jpeg")
        records, report = scan_images(tmp_path)
        assert len(records) == 1
        assert report.rejected == 1

    def test_missing_directory_is_hard_error(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            scan_images(tmp_path / "nope")

    def test_sharpness_gate_and_threshold(self, tmp_path):
        self.write_image(tmp_path / "20170402_060000.jpg", sharp=True)
        self.write_image(tmp_path / "20170402_060030.png", sharp=False)
        records, _ = scan_images(tmp_path, sharpness_threshold=100.0)
        by_id = {r.id: r for r in records}
        assert by_id["20170402_060000"].sharp
        assert not by_id["20170402_060030"].sharp
        # threshold is tunable: everything passes at 0.0
        records, _ = scan_images(tmp_path, sharpness_threshold=0.0)
        assert all(r.sharp for r in records)

    def test_parallel_scan_matches_serial(self, tmp_path):
        for i in range(12):
            self.write_image(tmp_path / f"20170402_0600{i:02d}.jpg", sharp=(i % 3 > 0))
        serial, report_serial = scan_images(tmp_path, workers=1)
        parallel, report_parallel = scan_images(tmp_path, workers=4)
        assert serial == parallel
        assert report_serial == report_parallel

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from momentmap.synth import generate_dataset  # noqa: E402


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when != "call":
        return
    module = report.nodeid.split("::", 1)[0]
    if module.endswith("test_acceptance.py"):
        outcome = "PASS" if report.passed else "FAIL"
        print(f"\n[ACCEPTANCE {outcome}] {report.nodeid.split('::')[-1]}", flush=True)


@pytest.fixture(scope="session")
def two_day_dataset(tmp_path_factory) -> tuple[Path, object]:
    """The synthetic 2-day dataset, materialized once per test session."""
    root = tmp_path_factory.mktemp("twoday")
    truth = generate_dataset(root, days=2, hours_per_day=4.0)
    return root, truth

import json

import pytest

from helpers import DATA_DIR


@pytest.fixture
def enacted_fixture():
    with open(DATA_DIR / "enacted_co.json", encoding="utf-8") as fh:
        return json.load(fh)


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else "FAIL"
        print(f"\n[acceptance] {name}: {outcome}", flush=True)

import numpy as np
import pytest

from ztwemo.synth import SyntheticSpec, synthesize


@pytest.fixture(scope="session")
def vowel_100():
    """1 s of a 100 Hz vowel with 0.2 s of silence either side, plus its true GCIs."""
    spec = SyntheticSpec(f0_start=100.0, f0_end=100.0, duration=1.0, lead_silence=0.2,
                         trail_silence=0.2, seed=3)
    return synthesize(spec)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE: dict = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.split("::")[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        num = int(name.split("_")[2])
        ok = report.outcome == "passed"
        prev = _ACCEPTANCE.get(num, (True, name))
        _ACCEPTANCE[num] = (prev[0] and ok, prev[1].split("[")[0])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        ok, name = _ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  ({name})")

from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"

# (criterion, passed, detail) rows appended by test_acceptance.py
ACCEPTANCE_LOG: list[tuple[str, bool, str]] = []


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LOG:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")

from pathlib import Path

import numpy as np
import pytest

from postsel.data_io import load_csv

WINE = Path(__file__).resolve().parents[1] / "data" / "winequality-red.csv"

_CRITERIA: list[str] = []


@pytest.fixture(scope="session")
def wine():
    return load_csv(WINE, "quality")


@pytest.fixture(scope="session")
def wine_path():
    return WINE


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""

    def _report(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" :: {detail}" if detail else "")
        _CRITERIA.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)


def orthonormal_columns(n, p, seed):
    """Centered columns, mutually orthonormal (test helper)."""
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, p))
    G -= G.mean(axis=0)
    return np.linalg.qr(G)[0]

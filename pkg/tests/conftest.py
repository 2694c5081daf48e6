import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20201018)


@pytest.fixture
def price_csv(tmp_path):
    def write(prices, name="prices.csv", sep=",", dates=True):
        path = tmp_path / name
        lines = [sep.join(["Date", "Close"]) if dates else "Close"]
        for k, p in enumerate(prices):
            lines.append(sep.join([f"2020-01-{k + 1:02d}" if k < 31 else f"2021-{k:05d}",
                                   str(p)]) if dates else str(p))
        path.write_text("\n".join(lines) + "\n")
        return path
    return write


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

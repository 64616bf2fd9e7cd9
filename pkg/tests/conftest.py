import os
from pathlib import Path

import numpy as np
import pytest

from courtspace.ingest import Frame

GOLDEN = Path(__file__).parent / "golden"
UPDATE_GOLDENS = os.environ.get("UPDATE_GOLDENS") == "1"


def make_frame(points, t_ms=0, tags=None):
    tags = tags or [str(i + 1) for i in range(len(points))]
    return Frame(t_ms, {str(t): (float(x), float(y)) for t, (x, y) in zip(tags, points)})


def check_golden(name: str, text: str):
    path = GOLDEN / name
    if UPDATE_GOLDENS:
        path.write_text(text, encoding="utf-8", newline="\n")
    assert path.exists(), f"missing golden {name}; run with UPDATE_GOLDENS=1 and review the diff"
    assert path.read_text(encoding="utf-8") == text, f"golden mismatch for {name}"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA: dict[int, str] = {}


class Criterion:
    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        _CRITERIA[number] = f"criterion {number:>2}: FAIL  {title} (did not finish)"

    def check(self, ok: bool, detail: str = ""):
        line = f"criterion {self.number:>2}: {'PASS' if ok else 'FAIL'}  {self.title} [{detail}]"
        _CRITERIA[self.number] = line
        print(line)
        assert ok, line


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])

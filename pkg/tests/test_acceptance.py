"""The ten acceptance criteria, each printed as one PASS/FAIL line."""

from pathlib import Path

import pytest

from nilkl.acceptance import CRITERIA

PAPER = Path(__file__).resolve().parents[1] / "paper.md"


@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1))
def test_criterion(number, capsys):
    check = CRITERIA[number - 1]
    result = check(PAPER if PAPER.exists() else None) if number == 1 else check()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail

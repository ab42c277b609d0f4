"""One test per acceptance criterion; each prints a single PASS/FAIL line."""
import pytest

from sdiffgeo.acceptance import CRITERIA, SEEDED


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    kwargs = {"seed": 42} if number in SEEDED else {}
    result = CRITERIA[number](**kwargs)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()

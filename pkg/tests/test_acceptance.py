"""Runs the ten acceptance criteria at their stated tolerances and time limits."""
import pytest

from iwamod.acceptance import CRITERIA, run_criteria


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    (result,) = run_criteria([number])
    with capsys.disabled():
        print("\n" + result.line())
    assert result.ok, result.failures

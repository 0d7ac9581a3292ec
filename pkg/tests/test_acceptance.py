"""The ten acceptance criteria, one test each; a PASS/FAIL line per criterion is printed in the summary."""
import pytest

from schurkit import acceptance

RESULTS = {}


@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda c: c.__name__)
def test_criterion(criterion):
    result = criterion()
    RESULTS[result.number] = result
    assert result.passed, result.line()

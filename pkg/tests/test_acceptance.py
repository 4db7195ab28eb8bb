"""Acceptance suite: every criterion at its stated tolerance, one result line each."""

import pytest

from artin_relhyp.acceptance import CRITERIA, AcceptanceConfig
from artin_relhyp.relhyp import BIGON_BOUND

CFG = AcceptanceConfig()

# [DERIVED] maxima observed on the default E7 (3, 1) ball, seed 0, frozen as regression fixtures
E7_VERTEX_MAX = 2
E7_CLAIM_MAX = 4


def _fields(result):
    return dict(part.split("=", 1) for part in result.observed.split(";") if "=" in part)


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    result = CRITERIA[number](CFG)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed is True, result.line() + " " + " | ".join(result.notes)
    if number == 5:
        f = _fields(result)
        assert int(f["vertex_max"]) == E7_VERTEX_MAX
        assert int(f["claim_max"]) == E7_CLAIM_MAX
        assert int(f["claim_max"]) <= BIGON_BOUND

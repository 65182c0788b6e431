"""Acceptance criteria at their stated tolerances, one test each.

Each test prints one PASS/FAIL line with the measured values and the
tolerances, then asserts the criterion and its runtime limit.
"""

import pytest

from abdiffract.acceptance import CRITERIA


@pytest.mark.parametrize("cid", list(CRITERIA))
def test_criterion(cid):
    r = CRITERIA[cid]()
    print(r.line())
    print(f"elapsed {r.elapsed_s:.2f} s, limit {r.runtime_limit_s}")
    assert r.passed, r.line()
    if r.runtime_limit_s is not None:
        assert r.elapsed_s <= r.runtime_limit_s

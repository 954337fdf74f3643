"""Acceptance gate: every external claim re-verified at its stated tolerance.

The suite runs twice with the same seed (once for the criteria, once for the
byte-reproducibility check); both passes are shared module-wide so the cost
is paid a single time.  Each criterion gets its own test so `pytest -v`
prints one pass/fail line per claim.
"""

import pytest

from clonesim import acceptance

CRITERIA = [name for name, _, _ in acceptance._CRITERIA]


@pytest.fixture(scope="module")
def suite_pair():
    first = acceptance.run_all(seed=0)
    second = acceptance.run_all(seed=0)
    return first, second


@pytest.mark.parametrize("name", CRITERIA)
def test_criterion(name, suite_pair):
    first, _ = suite_pair
    result = next(c for c in first.criteria if c.name == name)
    assert result.passed, f"{name}: {result.details}"


def test_criterion_reproducibility(suite_pair):
    first, second = suite_pair
    b1 = acceptance.suite_bytes(first)
    b2 = acceptance.suite_bytes(second)
    result = acceptance.reproducibility_criterion(b1, b2)
    assert result.passed, f"suites differ: {len(b1)} vs {len(b2)} bytes"


def test_runtime_budgets_respected(suite_pair):
    first, _ = suite_pair
    budgets = {name: budget for name, _, budget in acceptance._CRITERIA
               if budget is not None}
    for crit in first.criteria:
        if crit.name in budgets:
            assert crit.duration < budgets[crit.name], (
                f"{crit.name} took {crit.duration:.1f}s")


def test_suite_serialization_shape(suite_pair):
    first, _ = suite_pair
    doc = acceptance.suite_dict(first)
    assert [c["name"] for c in doc["criteria"]] == CRITERIA
    assert doc["passed"] is True
    table = acceptance.format_table(list(first.criteria))
    assert table.count("\n") == len(CRITERIA)    # one line each plus the verdict

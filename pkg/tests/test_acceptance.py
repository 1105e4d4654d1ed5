"""One test per acceptance criterion, each backed by the matching verification suite.

Each test prints a single ``PASS``/``FAIL`` line; the lines are also collected
into the terminal summary.  Run ``python tests/test_acceptance.py`` to print
them without pytest.
"""

import os

import pytest

from artifact import suites

SEED = int(os.environ.get("PINWHEEL_SEED", "7"))
SCALE = float(os.environ.get("ACCEPTANCE_SCALE", "1.0"))
LINES: dict[int, str] = {}


@pytest.mark.parametrize("criterion", range(1, 13))
def test_criterion(criterion):
    result = suites.run_suite(criterion, seed=SEED, scale=SCALE)
    LINES[criterion] = result.line()
    print(result.line())
    for case in result.failures[:5]:
        print(f"    {case.label}: {case.detail}")
    for note in result.notes:
        print(f"    note: {note}")
    if not result.passed:
        pytest.fail(result.line(), pytrace=False)


if __name__ == "__main__":
    for r in suites.run_all(seed=SEED, scale=SCALE):
        print(r.line())

"""One test per registered acceptance criterion.

Each test delegates to the package's own self-check registry so the suite
and the command-line ``selftest`` agree by construction. The assertion
message carries the measured numbers for the failing criterion.
"""

import numpy as np
import pytest

from gaussvol.acceptance import CriterionResult, criterion_numbers, run_criterion


def test_result_passed_is_plain_bool():
    # numpy comparisons inside criteria yield np.bool_; the result must
    # normalise it so CSV reports format the flag as 0/1, not "True".
    result = CriterionResult(
        number=0,
        title="coercion",
        passed=np.bool_(True),
        detail="",
        elapsed_seconds=0.0,
    )
    assert result.passed is True

_TITLES = {
    1: "anchors",
    2: "black-scholes",
    3: "ode-oracle",
    4: "wishart-oracle",
    5: "mc-bracketing",
    6: "covariance-closed-form",
    7: "trace-cross-check",
    8: "property-suite",
    9: "calibration-round-trip",
    10: "skew-regime",
}


@pytest.mark.parametrize(
    "number",
    criterion_numbers(),
    ids=[f"C{n:02d}-{_TITLES[n]}" for n in criterion_numbers()],
)
def test_acceptance_criterion(number):
    result = run_criterion(number)
    assert result.passed, f"criterion {number} failed: {result.detail}"

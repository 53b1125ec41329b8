"""Acceptance gate: every exit criterion at its pinned tolerance.

One test per criterion; each prints its pass/fail line (visible with -s or on
failure). The criteria themselves live in chiralkit.selftest so the CLI
`chiralkit selftest` runs exactly the same checks.
"""

import pytest

from chiralkit import selftest


@pytest.mark.parametrize(
    "key,title", [(k, t) for k, t, _ in selftest.CRITERIA], ids=[k for k, _, _ in selftest.CRITERIA]
)
def test_acceptance_criterion(key, title):
    result = selftest.run_criterion(key)
    status = "PASS" if result.passed else "FAIL"
    print(f"[{status}] {result.key} {title} ({result.seconds:.1f}s): {result.detail}")
    assert result.passed, f"{result.key} {title}: {result.detail}"

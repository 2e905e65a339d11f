"""Acceptance criteria 1-9, one test each.

Each test prints a single ``PASS``/``FAIL`` line with the criterion number,
its name and its wall time, then asserts the verdict.
"""
import pytest

from liquidvote.golden import ITEMS, run_item

BUDGET_SECONDS = {1: 1, 2: 10, 3: 10, 4: 5, 5: 5, 6: 180, 7: 5, 8: 5, 9: 300}


@pytest.mark.parametrize("k", range(1, len(ITEMS) + 1))
def test_criterion(k, capsys):
    item = run_item(k)
    verdict = "PASS" if item.passed else "FAIL"
    with capsys.disabled():
        print(f"\n{verdict} criterion {k}: {item.name} ({item.seconds:.1f} s, "
              f"budget {BUDGET_SECONDS[k]} s)")
        for f in item.failures:
            print(f"    failed check: {f}")
    assert item.passed, "; ".join(item.failures)

import pytest


def pytest_runtest_makereport(item, call):
    """One visible PASS/FAIL line per acceptance criterion."""
    if call.when != "call" or "test_acceptance" not in str(item.fspath):
        return
    name = item.name
    outcome = "PASS" if call.excinfo is None else "FAIL"
    print(f"\n[{outcome}] acceptance: {name}")

import numpy as np
import pytest

from corrspec import kernels

ACCEPTANCE_PREFIX = "test_criterion"


@pytest.fixture(autouse=True)
def _restore_backend():
    """Tests may flip the kernel backend; always restore it."""
    before = kernels.get_backend()
    yield
    kernels.set_backend(before)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when != "call":
        return
    name = report.location[2]
    if "test_acceptance" in report.location[0] and name.startswith(ACCEPTANCE_PREFIX):
        outcome = "PASS" if report.passed else "FAIL"
        print(f"\n[acceptance] {name}: {outcome}", flush=True)

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("afderiv", max_examples=25, deadline=None)
settings.load_profile("afderiv")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def haar(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])

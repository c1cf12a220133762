import warnings

import numpy as np
import pytest
from scipy import integrate


def quad(f, lo, hi):
    """scipy QUADPACK, used as a second opinion next to the package's own quadrature."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion, then assert."""
    def check(tag, ok, detail):
        ACCEPTANCE_LINES.append(f"{tag} {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"{tag}: {detail}"
    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

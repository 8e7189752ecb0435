import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ioncavity import SystemParams

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def anti_node_params():
    """Weak-regime parameter set used for cavity squeezing (rates in rad/s)."""
    return SystemParams(Delta=3e6, lambda1=3e5, lambda2=3e5, Omega_abs=3e5, delta=6e4,
                        nu=5e5, eta=0.1, varphi=np.pi / 2)


@pytest.fixture
def strong_params():
    """Strong-regime set with xi_ii = -i|xi_ii| so (a + a^dag)/2 is the squeezed quadrature."""
    return SystemParams(Delta=3e5, lambda1=3e5, lambda2=3e5, Omega_abs=3e6, phi_drive=1.5 * np.pi,
                        nu=5e5, eta=0.1)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Context manager recording one acceptance criterion as a PASS/FAIL line."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    @contextmanager
    def record(number, title, budget_seconds):
        start = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            in_budget = elapsed <= budget_seconds
            status = "PASS" if ok and in_budget else "FAIL"
            line = f"ACCEPTANCE {number}: {status} {title} ({elapsed:.2f} s, budget {budget_seconds:g} s)"
            lines.append(line)
            sys.__stdout__.write("\n" + line + "\n")
        assert in_budget, f"criterion {number} took {elapsed:.2f} s > {budget_seconds:g} s"

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)

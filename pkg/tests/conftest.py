import sys
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hoqo.rng import make_rng

settings.register_profile(
    "hoqo",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("hoqo")

_START = time.perf_counter()


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for name, mod in list(sys.modules.items()):
        if name.rsplit(".", 1)[-1] == "test_acceptance":
            lines = getattr(mod, "RESULTS", [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
    passed = sum(line.startswith("[PASS]") for line in lines)
    elapsed = time.perf_counter() - _START
    terminalreporter.write_line(
        f"{passed}/{len(lines)} criteria recorded as passing; session time {elapsed:.0f} s"
    )

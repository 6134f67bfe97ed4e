import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from repgame import Memory1Strategy, Memory2Strategy

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

prob = st.floats(0, 1, allow_nan=False)
m1 = st.tuples(*[prob] * 5).map(lambda v: Memory1Strategy(*v))
m2 = st.lists(prob, min_size=21, max_size=21).map(Memory2Strategy.from_sequence)
stop_w = st.floats(1e-6, 1, allow_nan=False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance report ------------------------------------------------------------------

def pytest_configure(config):
    config._acceptance = {}


@pytest.fixture
def acceptance(request):
    """Record one verdict line per acceptance criterion."""
    report = request.config._acceptance

    def record(n, ok, detail):
        report[n] = (ok, detail)
    return record


def pytest_terminal_summary(terminalreporter, config):
    report = getattr(config, "_acceptance", {})
    if not report:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(report):
        ok, detail = report[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

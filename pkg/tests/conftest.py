import math
import time

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from lenscontact.contact_form import from_periods
from lenscontact.lens_atlas import make_lens

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SQRT2 = math.sqrt(2.0)


@st.composite
def lenses(draw, ps=(1, 2, 3, 5, 7, 8)):
    p = draw(st.sampled_from(ps))
    q = draw(st.integers(-p, 2 * p).filter(lambda q: math.gcd(p, q) == 1))
    return make_lens(p, q)


# periods in [1, 2] keep the ratio within [1/2, 2], where the default profile
# always exists (see profile escalation tests for the limits)
periods = st.floats(1.0, 2.0, allow_nan=False)


@st.composite
def forms(draw):
    return from_periods(draw(lenses()), draw(periods), draw(periods))


@pytest.fixture(scope="session")
def l73():
    return from_periods(make_lens(7, 3), 1.0, SQRT2)


@pytest.fixture(scope="session")
def l10_23():
    return from_periods(make_lens(1, 0), 2.0, 3.0)


@pytest.fixture(scope="session")
def hopf():
    return from_periods(make_lens(1, 0), 1.0, 1.0)


_SESSION_START = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    elapsed = time.perf_counter() - _SESSION_START
    mark = "PASS" if elapsed < 120 else "FAIL"
    terminalreporter.write_line(f"criterion 8 (full suite time): {mark} {elapsed:.1f}s (< 120s)")

import numpy as np
import pytest

from dissipative_hopfield import MediumParams


@pytest.fixture
def medium():
    """Omega = 1, g = 3/2: n = sqrt(13)/2."""
    return MediumParams(1.0, 1.5)


@pytest.fixture
def medium_56():
    """Omega = 1, g = 5/6: n = sqrt(61)/6."""
    return MediumParams(1.0, 5.0 / 6.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------- acceptance verdicts

_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


@pytest.fixture
def verdict(request):
    """Record one acceptance criterion and assert it; the summary prints one line per criterion."""

    def record(number, title, ok, detail):
        request.config.stash[_VERDICTS].append((number, title, bool(ok), detail))
        assert ok, f"criterion {number} ({title}): {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = sorted(config.stash.get(_VERDICTS, []), key=lambda r: r[0])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in rows:
        terminalreporter.write_line(f"{number:>2}. {'PASS' if ok else 'FAIL'}  {title}: {detail}")

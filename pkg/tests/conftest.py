import math

import numpy as np
import pytest

SQRT2 = math.sqrt(2.0)

_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    number, title = getattr(report, "criterion", (None, None))
    if number is not None:
        _criteria.append((number, title, report.outcome, report.duration))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report.criterion = marker.args


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, duration in sorted(_criteria):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {title} ({duration:.1f}s)")


@pytest.fixture
def unit_square():
    return np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@pytest.fixture
def equilateral():
    return np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])


def random_clouds(count=200, seed=2024):
    """Seeded corpus of small clouds: n in [3, 12], d in [1, 4], uniform or Gaussian."""
    rng = np.random.default_rng(seed)
    clouds = []
    for i in range(count):
        n = int(rng.integers(3, 13))
        d = int(rng.integers(1, 5))
        if i % 2:
            clouds.append(rng.standard_normal((n, d)))
        else:
            clouds.append(rng.uniform(size=(n, d)))
    return clouds


def random_orthogonal(d, rng):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def with_spectrum(singular_values, n, d, rng):
    """Matrix whose column-centered singular values are exactly ``singular_values``."""
    s = np.asarray(singular_values, dtype=float)
    k = len(s)
    a = rng.standard_normal((n, k))
    a -= a.mean(axis=0)
    u, _ = np.linalg.qr(a)
    v, _ = np.linalg.qr(rng.standard_normal((d, k)))
    return (u * s) @ v.T

import pytest
from hypothesis import HealthCheck, settings

from kext.dynsys import SQRT38, integrate

settings.register_profile(
    "kext", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("kext")


_CRITERIA = {}


def pytest_runtest_logreport(report):
    label = getattr(report, "_criterion", None)
    if label is None:
        return
    if report.when == "call" or report.outcome != "passed":
        entry = _CRITERIA.setdefault(label[0], [label[1], True])
        entry[1] = entry[1] and report.outcome == "passed"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        report._criterion = mark.args


def _sort_key(label):
    head = label.rstrip("abcdefgh")
    return (int(head), label)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=_sort_key):
        text, ok = _CRITERIA[label]
        tr.write_line(f"criterion {label:<3} {'PASS' if ok else 'FAIL'}  {text}")


@pytest.fixture(scope="session")
def traj_sqrt38():
    return integrate(SQRT38, 50.0, 1e-12)


@pytest.fixture(scope="session")
def traj_half():
    return integrate(0.5, 50.0, 1e-12)


@pytest.fixture(scope="session")
def traj_one():
    return integrate(1.0, 20.0, 1e-10)


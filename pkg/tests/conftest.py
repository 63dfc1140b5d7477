import numpy as np
import pytest

from dstoch.stochastic import random_doubly_stochastic, random_probability_vector


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_chain(rng, d, length):
    x = random_probability_vector(d, rng)
    steps = tuple(random_doubly_stochastic(d, rng) for _ in range(length))
    return x, steps


# acceptance criteria report: one line per criterion in the terminal summary
_criteria: dict[str, tuple[str, float]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        name = report.nodeid.split("::")[-1]
        prev = _criteria.get(name, ("PASS", 0.0))[0]
        status = "PASS" if report.outcome == "passed" and prev == "PASS" else "FAIL"
        _criteria[name] = (status, getattr(report, "duration", 0.0))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria):
        status, duration = _criteria[name]
        number = int(name.split("_")[2])
        label = " ".join(name.split("_")[3:])
        terminalreporter.write_line(f"criterion {number:2d} {status}  {label} ({duration:.2f}s)")

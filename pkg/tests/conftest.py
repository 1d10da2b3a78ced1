import pytest
from hypothesis import HealthCheck, settings

from gamedefend.game import GameFrame, UtilityProfile
from gamedefend.protocol import parse_protocol

settings.register_profile("thorough", max_examples=1000, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])

NG_SOURCE = ("(node Alice (stop (outcome w0)) "
             "(sign (node Bob (stop (outcome w1)) (sign (outcome w2)))))")


@pytest.fixture
def ng():
    return GameFrame.build(["Alice", "Bob"], [["stop", "sign"], ["stop", "sign"]],
                           ["w0", "w1", "w2"], ["w0", "w0", "w1", "w2"])


@pytest.fixture
def ng_tree():
    return parse_protocol(NG_SOURCE)


@pytest.fixture
def ng_u():
    # both agents: w2 best, then w0, then w1
    return UtilityProfile.cardinal([[1, 0, 2], [1, 0, 2]])


def matching_pennies():
    f = GameFrame.injective(2, 2)
    return f, UtilityProfile.cardinal([[1, -1, -1, 1], [-1, 1, 1, -1]])


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1].removeprefix("test_").replace("_", " ")
        _acceptance.append((report.outcome.upper(), name, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance")
    for outcome, name, seconds in _acceptance:
        terminalreporter.write_line(f"{outcome:6} {name} ({seconds:.1f} s)")

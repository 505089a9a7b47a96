import random

import pytest

from deamarket.market import Marketplace, Registry
from deamarket.store import MemoryBlobStore
from deamarket.tangle import Ledger


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def ledger():
    return Ledger(difficulty=4, seed=7, clock=iter(range(1000, 10**9)).__next__)


@pytest.fixture
def market(ledger):
    return Marketplace(ledger, MemoryBlobStore(), Registry())


# -- acceptance summary: one PASS/FAIL line per criterion ----------------------

_acceptance: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid or "test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("test_criterion_")[1]
    number = int(name.split("_")[0])
    entry = _acceptance.setdefault(number, {"passed": True, "details": [], "name": name.split("[")[0]})
    if report.failed:
        entry["passed"] = False
    for key, value in report.user_properties:
        if key == "detail" and report.when == "call":
            entry["details"].append(value)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        e = _acceptance[number]
        status = "PASS" if e["passed"] else "FAIL"
        detail = " | ".join(e["details"])
        terminalreporter.write_line(f"criterion {number} {status}: {e['name'][2:]} -- {detail}")

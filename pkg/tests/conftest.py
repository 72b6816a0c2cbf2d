import os
import sys
from importlib import resources

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from biobeta.parser import parse_spec  # noqa: E402
from biobeta.reduction import ReactiveSystem  # noqa: E402


def corpus_path() -> str:
    return str(resources.files("biobeta") / "data" / "membrane-traffic.biob")


@pytest.fixture(scope="session")
def corpus_file():
    return corpus_path()


@pytest.fixture(scope="session")
def corpus_text(corpus_file):
    with open(corpus_file, encoding="utf-8") as f:
        return f.read()


@pytest.fixture(scope="session")
def spec(corpus_text):
    return parse_spec(corpus_text)


@pytest.fixture(scope="session")
def traffic(spec):
    return ReactiveSystem(spec)


@pytest.fixture(scope="session")
def main_state(traffic):
    return traffic.initial("Main")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

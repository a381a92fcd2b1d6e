import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sumhis.fixture import fixture_path  # noqa: E402


@pytest.fixture
def fixture_corpus():
    return fixture_path()


@pytest.fixture
def fixture_config():
    return fixture_path().with_name("fixture.cfg")


def write_jsonl(path, records):
    import json

    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

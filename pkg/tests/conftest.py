from __future__ import annotations

from pathlib import Path

import pytest

from aslk.parser import SourceFile, parse_spec

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def example_text() -> str:
    return (FIXTURES / "example.yaml").read_text(encoding="utf-8")


@pytest.fixture
def write_spec(tmp_path):
    """Write ``<name>.yaml`` with a matching ``spec`` node and return its path."""

    def write(name: str, body: str = "", *, target: str = "t.c", directory: Path | None = None) -> Path:
        directory = directory or tmp_path
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{name}.yaml"
        path.write_text(f"spec: {name.upper()}\nfor: {target}\n{body}", encoding="utf-8")
        return path

    return write


def parse(text: str, name: str = "t.yaml"):
    return parse_spec(SourceFile(name, text))


def codes(diagnostics) -> list[str]:
    return [d.code for d in diagnostics]


_criteria: dict[str, list[str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for value in {v for k, v in report.user_properties if k == "criterion"}:
        _criteria.setdefault(value, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda n: int(n.split()[0])):
        verdict = "PASS" if all(o == "passed" for o in _criteria[name]) else "FAIL"
        terminalreporter.write_line(f"{verdict}  criterion {name}")

import pytest

from cegprop import reference
from cegprop.positions import build_transporter_ceg

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def example_tree():
    return reference.example1_tree()


@pytest.fixture
def example_ceg(example_tree):
    return build_transporter_ceg(example_tree)


@pytest.fixture
def example_obs(example_ceg):
    return reference.example2_observation(example_ceg)


@pytest.fixture
def acceptance_line():
    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

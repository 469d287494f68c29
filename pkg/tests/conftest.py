import numpy as np
import pytest

_ACCEPTANCE_LINES = []


def record_acceptance(number: int, description: str, passed: bool,
                      detail: str = "") -> None:
    """Collect one pass/fail line per acceptance criterion."""
    status = "PASS" if passed else "FAIL"
    line = f"[criterion {number:02d}] {status}  {description}"
    if detail:
        line += f"  ({detail})"
    _ACCEPTANCE_LINES.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


class ReplayStream:
    """Deterministic uniform stream shared between backends in tests."""

    def __init__(self, values):
        self.values = list(values)
        self.i = 0

    def random(self, size=None):
        if size is not None:
            out = np.array(self.values[self.i:self.i + int(size)])
            self.i += int(size)
            return out
        v = self.values[self.i]
        self.i += 1
        return v


class ForcedOutcomes:
    """Feeds selection draws as 0.0 and outcome draws from a bit list.

    Only usable when every gate/measurement fires (p = 1), where vector
    draws are selection masks and scalar draws are outcomes; bit 1 forces
    outcome -1.
    """

    def __init__(self, bits):
        self.bits = list(bits)
        self.i = 0

    def random(self, size=None):
        if size is not None:
            return np.zeros(int(size))
        v = 0.75 if self.bits[self.i] else 0.25
        self.i += 1
        return v


@pytest.fixture
def replay_factory():
    return ReplayStream


@pytest.fixture
def forced_factory():
    return ForcedOutcomes

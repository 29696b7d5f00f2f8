import numpy as np
import pytest

SQRT2 = np.sqrt(2.0)


@pytest.fixture
def irrational_pair():
    from levyreach.measures import Atomic
    return Atomic([1.0, -SQRT2], [1.0, 1.0])


def pytest_terminal_summary(terminalreporter):
    from instances import ACCEPTANCE_LINES
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

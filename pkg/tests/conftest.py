import numpy as np
import pytest

from tetduffy.geometry import Tetrahedron

TA_V = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
TB_V = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0.3, 0.4, -1.03]]
TC_V = [[0, 0, 0], [0, 0, 1], [-0.04, -1.09, -0.05], [0.3, -0.4, -1.09]]

TA = Tetrahedron(TA_V)
TB = Tetrahedron(TB_V)
TC = Tetrahedron(TC_V)

# (T_A, T') pairs with 4, 3 and 2 common vertices
TABLE_PAIRS = {4: (TA, TA), 3: (TA, TB), 2: (TA, TC)}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rel(a, b) -> float:
    return abs(a - b) / abs(b)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)

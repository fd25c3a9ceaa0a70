import itertools

import mpmath
import pytest

ACCEPTANCE_LINES = []


def record(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def literal_partition(rows, cols, beta, field, coupling=1.0):
    """Sum of exp(-beta H) over every configuration, with H written site by site.

    H = -J sum_{i,j} s[i,j] (s[i+1,j] + s[i,j+1]) - h sum s, indices periodic.
    Evaluated in mpmath, independent of the package's histogram code.
    """
    mpmath.mp.dps = 30
    beta = mpmath.mpf(beta)
    field = mpmath.mpc(field)
    total = mpmath.mpc(0)
    for flat in itertools.product((1, -1), repeat=rows * cols):
        s = [flat[i * cols:(i + 1) * cols] for i in range(rows)]
        bonds = 0
        mag = 0
        for i in range(rows):
            for j in range(cols):
                bonds += s[i][j] * (s[(i + 1) % rows][j] + s[i][(j + 1) % cols])
                mag += s[i][j]
        total += mpmath.exp(beta * (coupling * bonds + field * mag))
    return complex(total)

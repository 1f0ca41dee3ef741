import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from starspec import forward  # noqa: E402
from starspec.model import CosineSeries, GraphProblem  # noqa: E402

ACCEPTANCE_LINES: dict[int, str] = {}


def random_series(rng, modes):
    r = np.sqrt(rng.uniform(0, 1, modes))
    return CosineSeries(r * np.exp(1j * rng.uniform(0, 2 * np.pi, modes)))


@pytest.fixture(scope="session")
def star3():
    """h = (0, 1, 2) with random five-mode densities and 300 forward shells."""
    rng = np.random.default_rng(20261016)
    problem = GraphProblem.create([0, 1, 2], [random_series(rng, 5) for _ in range(3)])
    return problem, forward.eigenvalues(problem, 300)


@pytest.fixture(scope="session")
def complex_problem():
    return GraphProblem.create([0, 1, 2 - 1j], [[0.3, 0.2j], [0.1, -0.4, 0.2], [0.5j]])


@pytest.fixture(scope="session")
def double_problem():
    """h = (0, 1, 2) with densities tuned so that 5.3 + 0.2i is a double eigenvalue.

    The characteristic function is affine in the constant density modes, so
    the two linear conditions (value and lam-derivative vanish) fix them.
    """
    lam0 = 5.3 + 0.2j
    base = [np.array([0.3, 0.1j, 0.2]), np.array([0, 0.2, 0.1]), np.array([0.1, 0, 0.3j])]

    def shifted(a, b):
        p = [c.astype(complex) for c in base]
        p[0][0] += a
        p[1][0] += b
        return GraphProblem.create([0, 1, 2], p)

    def F(a, b):
        pr = shifted(a, b)
        return np.array([forward.delta(pr, lam0), forward.delta_dlambda(pr, lam0)])

    f0 = F(0, 0)
    J = np.stack([F(1, 0) - f0, F(0, 1) - f0], axis=1)
    a, b = np.linalg.solve(J, -f0)
    return shifted(a, b)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])

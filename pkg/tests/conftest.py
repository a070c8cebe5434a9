import numpy as np
import pytest

from wormising.graph import complete_graph, cycle_graph, grid_graph, path_graph

TEST_GRAPHS = {
    "k2": lambda: complete_graph(2),
    "k3": lambda: complete_graph(3),
    "k4": lambda: complete_graph(4),
    "path4": lambda: path_graph(4),
    "cycle5": lambda: cycle_graph(5),
    "grid2x3": lambda: grid_graph(2, 3),
}
TEST_XS = (0.1, 0.5, 0.9)

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(params=sorted(TEST_GRAPHS))
def named_graph(request):
    return request.param, TEST_GRAPHS[request.param]()


def asymptotic_variance(P, pi, f):
    """Exact long-run variance of time averages of f, via the fundamental matrix."""
    fb = f - pi @ f
    Z = np.linalg.inv(np.eye(len(pi)) - P + np.outer(np.ones(len(pi)), pi))
    return 2 * pi @ (fb * (Z @ fb)) - pi @ (fb * fb)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")

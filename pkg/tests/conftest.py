import numpy as np
import pytest
import threadpoolctl

# the element matrices are tiny; threaded BLAS only adds contention
threadpoolctl.threadpool_limits(1)

acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


def star_polygon(rng, n_vertices, min_gap=0.35, max_gap=2.4, radius_range=(0.65, 1.0)):
    """Random star-shaped polygon about the origin (radial construction).

    Angular gaps are kept in [min_gap, max_gap] so the shapes satisfy the
    usual edge-length and star-shape regularity assumptions; without the gap
    cap a sliver triangle can defeat any polynomial basis at high degree.
    """
    while True:
        ang = np.sort(rng.uniform(0.0, 2.0 * np.pi, n_vertices))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2.0 * np.pi]]))
        if gaps.min() > min_gap and gaps.max() < max_gap:
            break
    rad = rng.uniform(*radius_range, n_vertices)
    return np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def unit_square():
    return np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])

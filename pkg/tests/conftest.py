import pytest

from coverlab import (
    WeightedGraph,
    build_cover,
    finite_permutation_action,
    free_group_action,
    lattice_action,
)


@pytest.fixture
def triangle():
    return WeightedGraph([1.0, 1.0, 1.0], [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])


@pytest.fixture
def k4():
    return WeightedGraph(
        [1.0] * 4,
        [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)],
    )


@pytest.fixture
def triangle_cover(triangle):
    """Triangle unrolled along Z through one voltaged edge."""
    return build_cover(triangle, lattice_action(1), {(0, 1): (1,)})


@pytest.fixture
def tree_cover(k4):
    """K4 with the three non-tree edges voltaged freely: the 3-regular tree."""
    return build_cover(
        k4, free_group_action(3), {(1, 2): (1,), (1, 3): (2,), (2, 3): (3,)}
    )


@pytest.fixture
def trivial_cover(triangle):
    """A one-point fiber: the cover is the base itself."""
    return build_cover(triangle, finite_permutation_action([], 1), {})

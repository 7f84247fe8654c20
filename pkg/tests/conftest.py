import pytest

import dualsched as ds

LINE7_LINKS = [(i, i + 1, 1.0) for i in range(1, 7)]


@pytest.fixture
def line7():
    """Six unit-capacity links in a row, one end-to-end flow and one inner flow."""
    return ds.Network.build(
        [1, 2, 3, 4, 5, 6, 7],
        LINE7_LINKS,
        [(1, 7, "log1p", 1.0), (2, 5, "log1p", 1.0)],
    )


@pytest.fixture
def star5():
    """Four links sharing one center node; they all conflict pairwise."""
    return ds.Network.build([1, 2, 3, 4, 5], [(1, i, 1.0) for i in (2, 3, 4, 5)])


@pytest.fixture
def diamond():
    """Two equal-length routes from 1 to 4."""
    return ds.Network.build(
        [1, 2, 3, 4],
        [(1, 2, 1.0), (1, 3, 1.0), (2, 4, 1.0), (3, 4, 1.0)],
        [(1, 4, "log1p", 1.0)],
    )

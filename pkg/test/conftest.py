import numpy as np
import pytest

from ukblab.harness.catalog import block_diagonal_algebra, catalog_algebra
from ukblab.linalg.kernel import DEFAULT_TOLERANCES


@pytest.fixture
def tol():
    return DEFAULT_TOLERANCES


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def m2():
    return catalog_algebra("M2")


@pytest.fixture(scope="session")
def m2m3():
    """M_2 ⊕ M_3 in block-diagonal position inside M_5"""
    return catalog_algebra("M2+M3")


@pytest.fixture(scope="session")
def m2x2():
    return catalog_algebra("M2x2")


@pytest.fixture(scope="session")
def d3():
    return catalog_algebra("D3")


@pytest.fixture(scope="session")
def m1m2():
    """C ⊕ M_2 inside M_3"""
    return block_diagonal_algebra([1, 2])


@pytest.fixture(scope="session")
def m3():
    return catalog_algebra("M3")

import numpy as np
import pytest

from richlab.sparse import SparseMatrix


def random_spd(n, rng, density=1.0):
    """Random dense SPD matrix as a SparseMatrix."""
    M = rng.standard_normal((n, n))
    if density < 1.0:
        mask = rng.random((n, n)) < density
        M = M * (mask | mask.T)
    A = M @ M.T + n * np.eye(n)
    return SparseMatrix.from_scipy(A)


def random_sparse(n, rng, density=0.4):
    M = rng.standard_normal((n, n))
    mask = rng.random((n, n)) < density
    M = M * mask
    np.fill_diagonal(M, np.abs(M.diagonal()) + 1.0)
    return SparseMatrix.from_scipy(M)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

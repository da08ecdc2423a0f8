import numpy as np
import pytest

SWAP = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1]], dtype=complex)


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    """Full-rank (by default) random state from a Ginibre square."""
    rank = d if rank is None else rank
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(G)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (G + G.conj().T) / 2.0


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260818)

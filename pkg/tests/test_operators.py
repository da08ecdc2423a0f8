import numpy as np
import pytest
import scipy.linalg

from noncp.operators import (
    ContractViolation,
    DimensionError,
    assert_density,
    assert_hermitian,
    assert_unitary,
    eig_hermitian,
    generator_basis,
    min_eigenvalue,
    partial_trace,
    tensor,
    trace_distance,
    unitary_evolve,
)

from conftest import SWAP, random_density, random_hermitian, random_unitary

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def test_generator_basis_d2_is_pauli_in_order():
    gx, gy, gz = generator_basis(2)
    assert np.abs(gx - SX).max() == 0
    assert np.abs(gy - SY).max() == 0
    assert np.abs(gz - SZ).max() == 0


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_generator_basis_orthogonality(d):
    basis = generator_basis(d)
    assert len(basis) == d * d - 1
    for i, gi in enumerate(basis):
        assert np.abs(gi - gi.conj().T).max() < 1e-14
        assert abs(np.trace(gi)) < 1e-14
        for j, gj in enumerate(basis):
            want = 2.0 if i == j else 0.0
            assert abs(np.trace(gi @ gj) - want) < 1e-13


def test_generator_basis_d3_diagonal_entries():
    basis = generator_basis(3)
    # last element is the deepest diagonal generator
    want = np.sqrt(1.0 / 3.0) * np.diag([1.0, 1.0, -2.0])
    assert np.abs(basis[-1] - want).max() < 1e-15
    # third element is diag(1, -1, 0)
    assert np.abs(basis[2] - np.diag([1.0, -1.0, 0.0])).max() < 1e-15


def test_generator_basis_rejects_bad_dimension():
    with pytest.raises(DimensionError):
        generator_basis(1)
    with pytest.raises(DimensionError):
        generator_basis(2.0)


def test_tensor_ordering():
    # first factor slow: (sigma_z x sigma_x)[0:2, 0:2] = +sigma_x
    T = tensor(SZ, SX)
    assert np.abs(T[:2, :2] - SX).max() == 0
    assert np.abs(T[2:, 2:] + SX).max() == 0


def test_partial_trace_of_product(rng):
    rho = random_density(rng, 2)
    omega = random_density(rng, 3)
    joint = tensor(rho, omega)
    assert np.abs(partial_trace(joint, (2, 3), "A") - rho).max() < 1e-13
    assert np.abs(partial_trace(joint, (2, 3), "B") - omega).max() < 1e-13
    assert np.abs(partial_trace(joint, (2, 3), 0) - rho).max() < 1e-13


def test_partial_trace_after_swap(rng):
    rho = random_density(rng, 2)
    omega = random_density(rng, 2)
    out = SWAP @ tensor(rho, omega) @ SWAP.conj().T
    # swap exchanges the factors, so what survives on A is omega
    assert np.abs(partial_trace(out, (2, 2), "A") - omega).max() < 1e-13
    assert np.abs(partial_trace(out, (2, 2), "B") - rho).max() < 1e-13


def test_partial_trace_dimension_checks():
    with pytest.raises(DimensionError):
        partial_trace(np.eye(6), (2, 2), "B")
    with pytest.raises(DimensionError):
        partial_trace(np.eye(4), (2, 2), "C")


def test_eig_hermitian_ascending_and_reconstructs(rng):
    H = random_hermitian(rng, 5)
    w, V = eig_hermitian(H)
    assert np.all(np.diff(w) >= -1e-14)
    assert np.abs((V * w) @ V.conj().T - H).max() < 1e-12
    assert min_eigenvalue(H) == pytest.approx(w[0], abs=1e-14)


def test_eig_hermitian_rejects_nonhermitian():
    with pytest.raises(ContractViolation):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_unitary_evolve_matches_expm(rng):
    H = random_hermitian(rng, 4)
    t = 0.37
    U = unitary_evolve(H, t)
    assert np.abs(U - scipy.linalg.expm(-1j * H * t)).max() < 1e-12
    assert_unitary(U)


def test_unitary_evolve_z_rotation():
    # exp(-i sigma_z t) = diag(e^{-it}, e^{it})
    t = 0.81
    U = unitary_evolve(SZ, t)
    want = np.diag([np.exp(-1j * t), np.exp(1j * t)])
    assert np.abs(U - want).max() < 1e-14


def test_trace_distance_known_values():
    ket0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    plus = np.full((2, 2), 0.5, dtype=complex)
    # difference has eigenvalues +-1/sqrt(2)
    assert trace_distance(ket0, plus) == pytest.approx(np.sqrt(2.0), abs=1e-14)
    ket1 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
    assert trace_distance(ket0, ket1) == pytest.approx(2.0, abs=1e-14)
    assert trace_distance(ket0, ket0) == 0.0


def test_trace_distance_unitary_invariance(rng):
    rho = random_density(rng, 3)
    omega = random_density(rng, 3)
    U = random_unitary(rng, 3)
    d0 = trace_distance(rho, omega)
    d1 = trace_distance(U @ rho @ U.conj().T, U @ omega @ U.conj().T)
    assert abs(d0 - d1) < 1e-12


def test_validators():
    with pytest.raises(ContractViolation):
        assert_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ContractViolation):
        assert_density(np.diag([0.7, 0.7]))
    with pytest.raises(ContractViolation):
        assert_density(np.diag([1.5, -0.5]))
    with pytest.raises(ContractViolation):
        assert_unitary(np.diag([1.0, 2.0]))
    with pytest.raises(DimensionError):
        assert_hermitian(np.zeros((2, 3)))
    # exact states pass
    assert_density(np.diag([0.25, 0.75]))

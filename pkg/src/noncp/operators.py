"""Operator primitives shared by every module: generator bases, tensor and
partial-trace helpers, Hermitian eigensolving, and validated constructors.

Conventions, fixed once here and relied on everywhere:

* composite systems order the first factor slow: an operator on A x B
  carries row index a * d_b + b;
* generator bases satisfy tr(g_i g_j) = 2 delta_ij, and for d = 2 the
  basis is exactly (sigma_x, sigma_y, sigma_z);
* validation tolerances are absolute on the max entry deviation, 1e-12
  unless a caller passes its own.
"""
from __future__ import annotations

import numpy as np

HERM_TOL = 1e-12
#: default relative floor for calling a Choi eigenvalue "negative"
CP_TOL = 1e-9


class ContractViolation(RuntimeError):
    """An input violated a documented precondition."""


class DimensionError(ContractViolation):
    """Operator shapes or factor dimensions are inconsistent."""


def dag(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def assert_square(M, name: str = "operator") -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {M.shape}")
    return M


def assert_hermitian(M, tol: float = HERM_TOL, name: str = "operator") -> np.ndarray:
    M = assert_square(M, name)
    dev = np.abs(M - dag(M)).max()
    if dev > tol:
        raise ContractViolation(f"{name} is not Hermitian (max deviation {dev:.3e})")
    return M


def assert_unitary(U, tol: float = HERM_TOL, name: str = "unitary") -> np.ndarray:
    U = assert_square(U, name)
    dev = np.abs(dag(U) @ U - np.eye(U.shape[0])).max()
    if dev > tol:
        raise ContractViolation(f"{name} is not unitary (max deviation {dev:.3e})")
    return U


def assert_density(rho, tol: float = HERM_TOL, name: str = "state") -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, eigenvalues >= -tol."""
    rho = assert_hermitian(rho, tol, name)
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > max(tol, 1e-12):
        raise ContractViolation(f"{name} has trace {tr:.12g}, expected 1")
    low = float(np.linalg.eigvalsh((rho + dag(rho)) / 2.0)[0])
    if low < -max(tol, 1e-12):
        raise ContractViolation(f"{name} has negative eigenvalue {low:.3e}")
    return rho


def generator_basis(d: int) -> list[np.ndarray]:
    """Hermitian, traceless, trace-orthogonal generators of SU(d).

    The ordering follows the usual ladder: for each column k = 1..d-1,
    the symmetric pair (j, k) then the antisymmetric pair (j, k) for
    every j < k, then the diagonal generator for k. For d = 2 this gives
    exactly (sigma_x, sigma_y, sigma_z); for d = 3 the standard
    eight-element basis in its standard order. Normalization is
    tr(g_i g_j) = 2 delta_ij, so there are d^2 - 1 elements and every
    one squares to trace 2.
    """
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise DimensionError(f"generator basis needs an integer dimension >= 2, got {d!r}")
    basis: list[np.ndarray] = []
    for k in range(1, d):
        for j in range(k):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, k] = sym[k, j] = 1.0
            basis.append(sym)
            anti = np.zeros((d, d), dtype=complex)
            anti[j, k] = -1j
            anti[k, j] = 1j
            basis.append(anti)
        diag = np.zeros((d, d), dtype=complex)
        for j in range(k):
            diag[j, j] = 1.0
        diag[k, k] = -k
        basis.append(np.sqrt(2.0 / (k * (k + 1))) * diag)
    return basis


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product, leftmost factor slowest."""
    if not ops:
        raise DimensionError("tensor needs at least one factor")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace(M: np.ndarray, dims: tuple[int, int], keep) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    dims is (d_a, d_b) with the first factor slow; keep selects the
    surviving factor, 0 or "A" for the first, 1 or "B" for the second.
    """
    d_a, d_b = int(dims[0]), int(dims[1])
    M = assert_square(M, "bipartite operator")
    if M.shape[0] != d_a * d_b:
        raise DimensionError(
            f"operator of dimension {M.shape[0]} does not factor as {d_a} x {d_b}")
    if isinstance(keep, str):
        keep = {"a": 0, "b": 1}.get(keep.lower(), keep)
    if keep not in (0, 1):
        raise DimensionError(f"keep must be 0/'A' or 1/'B', got {keep!r}")
    T = M.reshape(d_a, d_b, d_a, d_b)
    if keep == 0:
        return np.einsum("ibjb->ij", T)
    return np.einsum("aiaj->ij", T)


def eig_hermitian(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors.

    The input must be Hermitian within 1e-12; it is symmetrized before
    the solve so the result is exactly real.
    """
    H = assert_hermitian(H, name="operator")
    w, V = np.linalg.eigh((H + dag(H)) / 2.0)
    return w, V


def min_eigenvalue(H: np.ndarray) -> float:
    """Smallest eigenvalue of a (numerically) Hermitian operator."""
    H = assert_square(H, "operator")
    return float(np.linalg.eigvalsh((H + dag(H)) / 2.0)[0])


def unitary_evolve(H: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) through the eigendecomposition of Hermitian H."""
    w, V = eig_hermitian(H)
    return (V * np.exp(-1j * w * t)) @ dag(V)


def trace_distance(rho: np.ndarray, omega: np.ndarray) -> float:
    """Trace norm tr|rho - omega| of the difference. No 1/2 in front:
    equal-prior inputs are perfectly distinguishable iff this reaches 2.

    Accepts any Hermitian pair, so recovered operators that have drifted
    off the state space still get a sensible number.
    """
    diff = np.asarray(rho, dtype=complex) - np.asarray(omega, dtype=complex)
    diff = assert_hermitian(diff, tol=1e-10, name="difference")
    w = np.linalg.eigvalsh((diff + dag(diff)) / 2.0)
    return float(np.abs(w).sum())

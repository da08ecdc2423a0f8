"""Dynamical-matrix (Choi) calculus for linear and affine maps.

Index convention, fixed package-wide: the Choi matrix of a map
rho' = Phi(rho) acts as

    rho'_{mn} = sum_{s,t} D_{ms;nt} rho_{st}

with composite row index m*d_in + s and column n*d_in + t. Reshaping a
row-major flattened d_out x d_in operator M into a length d_out*d_in
vector v = vec(M) therefore makes sum_a lambda_a v_a v_a^dag the Choi
matrix of rho -> sum_a lambda_a M_a rho M_a^dag.

Worked 2x2 example, the transpose map rho -> rho^T: its entries are
D_{ms;nt} = delta_{mt} delta_{sn}, which as a 4x4 matrix in the
composite basis (00, 01, 10, 11) is the swap

    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1]]

with eigenvalues (1, 1, 1, -1): trace-preserving and unital, but not
completely positive, the canonical non-CP linear map.

Structural predicates: trace preservation is sum_m D_{ms;mt} = delta_st
(partial trace over the output index), unitality sum_s D_{ms;ns} =
delta_mn, and complete positivity is positive semidefiniteness of D.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (
    ContractViolation,
    DimensionError,
    assert_density,
    assert_hermitian,
    assert_square,
    assert_unitary,
    dag,
    generator_basis,
    tensor,
)

#: eigenvalue magnitudes below this are dropped from Kraus extractions
KRAUS_EIGENVALUE_FLOOR = 1e-12


@dataclass(frozen=True)
class ChoiMatrix:
    """Hermitian dynamical matrix with its input/output dimensions."""

    d_in: int
    d_out: int
    D: np.ndarray

    def __post_init__(self):
        D = assert_hermitian(self.D, tol=1e-10, name="Choi matrix")
        if D.shape[0] != self.d_in * self.d_out:
            raise DimensionError(
                f"Choi matrix of shape {D.shape} does not match "
                f"d_out*d_in = {self.d_out * self.d_in}")
        object.__setattr__(self, "D", D)


@dataclass(frozen=True)
class KrausSet:
    """Weighted operator set. Weights may be negative: the represented
    map rho -> sum_a lambda_a M_a rho M_a^dag is CP iff all are >= 0."""

    weights: np.ndarray
    operators: list

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        ops = [np.asarray(M, dtype=complex) for M in self.operators]
        if len(ops) != w.shape[0]:
            raise DimensionError("one weight per operator required")
        if ops and any(M.shape != ops[0].shape for M in ops):
            raise DimensionError("all Kraus operators must share one shape")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "operators", ops)


@dataclass(frozen=True)
class DifferenceForm:
    """A Hermitian map split as Lambda_plus - Lambda_minus, both CP."""

    plus: KrausSet
    minus: KrausSet


@dataclass(frozen=True)
class AffineMapForm:
    """CP Kraus part plus a constant traceless shift:
    rho -> sum_a lambda_a M_a rho M_a^dag + xi . sigma."""

    kraus: KrausSet
    xi: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        if self.kraus.weights.size and self.kraus.weights.min() < -1e-10:
            raise ContractViolation(
                f"affine-form Kraus part must be CP, found weight "
                f"{self.kraus.weights.min():.3e}")
        d_out = self.kraus.operators[0].shape[0] if self.kraus.operators else 0
        if xi.shape != (d_out * d_out - 1,):
            raise DimensionError(
                f"xi must have length {d_out * d_out - 1}, got {xi.shape}")
        acc = np.zeros((self.kraus.operators[0].shape[1],) * 2, dtype=complex)
        for lam, M in zip(self.kraus.weights, self.kraus.operators):
            acc += lam * dag(M) @ M
        dev = np.abs(acc - np.eye(acc.shape[0])).max()
        if dev > 1e-10:
            raise ContractViolation(
                f"affine-form Kraus part must be trace-preserving "
                f"(sum M^dag M deviates by {dev:.3e})")
        object.__setattr__(self, "xi", xi)


def identity_choi(d: int) -> ChoiMatrix:
    v = np.eye(d, dtype=complex).reshape(-1)
    return ChoiMatrix(d_in=d, d_out=d, D=np.outer(v, v.conj()))


def transpose_choi(d: int = 2) -> ChoiMatrix:
    """Choi matrix of rho -> rho^T: D_{ms;nt} = delta_mt delta_sn."""
    D = np.zeros((d * d, d * d), dtype=complex)
    for m in range(d):
        for s in range(d):
            D[m * d + s, s * d + m] = 1.0
    return ChoiMatrix(d_in=d, d_out=d, D=D)


def depolarizing_choi(d: int = 2) -> ChoiMatrix:
    """Choi matrix of rho -> 1/d: maximally mixed output regardless of input."""
    D = np.zeros((d * d, d * d), dtype=complex)
    for m in range(d):
        for s in range(d):
            D[m * d + s, m * d + s] = 1.0 / d
    return ChoiMatrix(d_in=d, d_out=d, D=D)


def apply_choi(D: ChoiMatrix, rho: np.ndarray) -> np.ndarray:
    """rho'_{mn} = sum_{s,t} D_{ms;nt} rho_{st}."""
    rho = assert_square(rho, "input state")
    if rho.shape[0] != D.d_in:
        raise DimensionError(
            f"state dimension {rho.shape[0]} does not match d_in = {D.d_in}")
    D4 = D.D.reshape(D.d_out, D.d_in, D.d_out, D.d_in)
    return np.einsum("msnt,st->mn", D4, rho)


def choi_from_kraus(K: KrausSet) -> ChoiMatrix:
    """D = sum_a lambda_a vec(M_a) vec(M_a)^dag with row-major vec."""
    if not K.operators:
        raise DimensionError("empty Kraus set has no dimensions")
    d_out, d_in = K.operators[0].shape
    D = np.zeros((d_out * d_in, d_out * d_in), dtype=complex)
    for lam, M in zip(K.weights, K.operators):
        v = M.reshape(-1)
        D += lam * np.outer(v, v.conj())
    return ChoiMatrix(d_in=d_in, d_out=d_out, D=D)


def kraus_from_choi(D: ChoiMatrix) -> KrausSet:
    """Eigendecompose D: weights are eigenvalues (descending), operators
    the unit eigenvectors reshaped d_out x d_in. Magnitudes below 1e-12
    are dropped. choi_from_kraus inverts this exactly."""
    w, V = np.linalg.eigh((D.D + dag(D.D)) / 2.0)
    order = np.argsort(w)[::-1]
    weights, operators = [], []
    for idx in order:
        if abs(w[idx]) < KRAUS_EIGENVALUE_FLOOR:
            continue
        weights.append(w[idx])
        operators.append(V[:, idx].reshape(D.d_out, D.d_in))
    return KrausSet(weights=np.array(weights), operators=operators)


def apply_kraus(K: KrausSet, rho: np.ndarray) -> np.ndarray:
    out = np.zeros((K.operators[0].shape[0],) * 2, dtype=complex)
    for lam, M in zip(K.weights, K.operators):
        out += lam * M @ rho @ dag(M)
    return out


def channel_properties(D: ChoiMatrix, tol: float | None = None) -> dict:
    """Structural predicates of a Hermitian dynamical matrix.

    tol bounds the negative eigenvalue mass tolerated by the cp flag;
    the default is the scale-invariant 1e-9 * tr(D), chosen so noisy
    tomographic reconstructions are judged fairly.
    """
    D4 = D.D.reshape(D.d_out, D.d_in, D.d_out, D.d_in)
    tp_dev = np.abs(np.einsum("msmt->st", D4) - np.eye(D.d_in)).max()
    unital_dev = np.abs(np.einsum("msns->mn", D4) - np.eye(D.d_out)).max()
    low = float(np.linalg.eigvalsh((D.D + dag(D.D)) / 2.0)[0])
    if tol is None:
        tol = 1e-9 * abs(float(np.trace(D.D).real))
    return {
        "trace_preserving": bool(tp_dev < 1e-10),
        "unital": bool(unital_dev < 1e-10),
        "cp": bool(low >= -tol),
        "min_eigenvalue": low,
    }


def difference_form(D: ChoiMatrix) -> DifferenceForm:
    """Split the spectrum by sign into two CP halves, Phi = plus - minus.

    The split is spectral, hence canonical given D, but difference forms
    as such are not unique; only the reconstruction is contractual.
    """
    K = kraus_from_choi(D)
    pos = [(lam, M) for lam, M in zip(K.weights, K.operators) if lam > 0]
    neg = [(-lam, M) for lam, M in zip(K.weights, K.operators) if lam < 0]

    def pack(pairs):
        return KrausSet(weights=np.array([p[0] for p in pairs]),
                        operators=[p[1] for p in pairs])

    return DifferenceForm(plus=pack(pos), minus=pack(neg))


def apply_affine_form(F: AffineMapForm, rho: np.ndarray) -> np.ndarray:
    """Kraus action plus the constant shift xi . sigma. The shift is
    traceless, so the output trace equals the input trace."""
    rho = assert_square(rho, "input state")
    out = apply_kraus(F.kraus, rho)
    for x, g in zip(F.xi, generator_basis(out.shape[0])):
        out += x * g
    return out


def shift_operator(xi: np.ndarray, d: int) -> np.ndarray:
    """xi . sigma as a d x d traceless Hermitian matrix."""
    out = np.zeros((d, d), dtype=complex)
    for x, g in zip(np.asarray(xi, dtype=float), generator_basis(d)):
        out += x * g
    return out


def choi_of_affine(F: AffineMapForm) -> ChoiMatrix:
    """D = (Kraus part) + kron(xi . sigma, 1): the shift rides on the
    delta_{st} slot and leaves trace preservation intact."""
    base = choi_from_kraus(F.kraus)
    shift = shift_operator(F.xi, base.d_out)
    D = base.D + tensor(shift, np.eye(base.d_in))
    return ChoiMatrix(d_in=base.d_in, d_out=base.d_out, D=D)


def induced_choi_pair(V: np.ndarray, omega0: np.ndarray,
                      rho0: np.ndarray) -> tuple[ChoiMatrix, ChoiMatrix]:
    """Dynamical matrices of both reduced evolutions of an initially
    uncorrelated pair under a joint unitary.

    D_system describes rho -> tr_B V (rho x omega0) V^dag, with the fixed
    environment state folded in; D_env the mirror-image map of the
    environment with the system state rho0 folded in. Both are CP and
    trace-preserving by construction (each is a Stinespring reduction).
    """
    omega0 = assert_density(omega0, name="environment state")
    rho0 = assert_density(rho0, name="system state")
    V = assert_unitary(V, name="joint unitary")
    d_a, d_b = rho0.shape[0], omega0.shape[0]
    if V.shape[0] != d_a * d_b:
        raise DimensionError(
            f"unitary dimension {V.shape[0]} does not match {d_a} x {d_b}")
    V4 = V.reshape(d_a, d_b, d_a, d_b)
    D_sys = np.einsum("axcg,bxdh,gh->acbd", V4, V4.conj(), omega0)
    D_env = np.einsum("axcg,aydh,cd->xgyh", V4, V4.conj(), rho0)
    return (
        ChoiMatrix(d_in=d_a, d_out=d_a, D=D_sys.reshape(d_a * d_a, d_a * d_a)),
        ChoiMatrix(d_in=d_b, d_out=d_b, D=D_env.reshape(d_b * d_b, d_b * d_b)),
    )

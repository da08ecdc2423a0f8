"""Reduction of joint unitary evolution with initial correlations to an
affine map on the system, plus the worked two-qubit rotation family.

For tau = rho x omega + sum_ij Gamma_ij g_i x g_j the reduced evolution

    rho' = tr_B [ U tau U^dag ]
         = sum_{mu nu} M_{mu nu} rho M_{mu nu}^dag  +  xi . sigma

splits exactly into a CP Kraus part built from the eigendecomposition of
omega, M_{mu nu} = <mu| sqrt(p_nu) U |nu>, and a constant traceless
shift given by propagating the correlation term alone. A nonzero shift
is what pushes the dynamical matrix off the positive cone.

The worked family: a block rotation U(theta) acting on the middle of the
computational basis, environment 1/2, isotropic correlations
Gamma = (a/4) 1. Its shift is xi(a, theta) = (0, 0, a sin(2 theta)/2).
"""
from __future__ import annotations

import numpy as np

from .choi import AffineMapForm, ChoiMatrix, KrausSet, apply_affine_form, choi_of_affine
from .fano import AssignmentSpec, CorrelationTensor
from .operators import (
    DimensionError,
    assert_density,
    assert_hermitian,
    assert_unitary,
    dag,
    generator_basis,
    min_eigenvalue,
    partial_trace,
    tensor,
)


def reduced_affine_form(U: np.ndarray, omega: np.ndarray,
                        Gamma: CorrelationTensor) -> AffineMapForm:
    """Exact affine form of rho -> tr_B[U (rho x omega + corr(Gamma)) U^dag].

    The Kraus part comes from any orthonormal eigenbasis of omega; the
    result is basis-independent, so degenerate omega needs no special
    handling. The shift is the generator-basis projection of the
    propagated correlation operator, which is traceless because the
    correlation term carries no identity component.
    """
    omega = assert_density(omega, name="environment state")
    U = assert_unitary(U, name="joint unitary")
    d_b = omega.shape[0]
    d_a, rem = divmod(U.shape[0], d_b)
    if rem != 0 or d_a < 2:
        raise DimensionError(
            f"unitary dimension {U.shape[0]} does not factor over environment {d_b}")
    gen_a, gen_b = generator_basis(d_a), generator_basis(d_b)
    if Gamma.Gamma.shape != (len(gen_a), len(gen_b)):
        raise DimensionError(
            f"correlation tensor shape {Gamma.Gamma.shape} does not match dims")

    p, basis = np.linalg.eigh(omega)
    U4 = U.reshape(d_a, d_b, d_a, d_b)
    # one operator per environment index pair: M_{mu nu} = <mu| sqrt(p_nu) U |nu>
    operators = []
    for nu in range(d_b):
        root = np.sqrt(max(p[nu], 0.0))
        ket = basis[:, nu]
        for mu in range(d_b):
            bra = basis[:, mu].conj()
            operators.append(root * np.einsum("m,ambn,n->ab", bra, U4, ket))
    kraus = KrausSet(weights=np.ones(len(operators)), operators=operators)

    corr = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    for i, ga in enumerate(gen_a):
        for j, gb in enumerate(gen_b):
            corr += Gamma.Gamma[i, j] * tensor(ga, gb)
    shift = partial_trace(U @ corr @ dag(U), (d_a, d_b), "A")
    xi = np.array([0.5 * np.trace(g @ shift).real for g in gen_a])
    return AffineMapForm(kraus=kraus, xi=xi)


def example_unitary(theta: float) -> np.ndarray:
    """Two-qubit rotation mixing |01> and |10>, identity on the rest."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [[1, 0, 0, 0],
         [0, c, s, 0],
         [0, -s, c, 0],
         [0, 0, 0, 1]], dtype=complex)


def example_xi(a: float, theta: float) -> np.ndarray:
    """Closed-form shift of the worked family, (0, 0, a sin(2 theta)/2)."""
    return np.array([0.0, 0.0, 0.5 * a * np.sin(2.0 * theta)])


def toy_correlation(a: float) -> CorrelationTensor:
    """Isotropic two-qubit correlation tensor Gamma = (a/4) 1."""
    return CorrelationTensor(d_a=2, d_b=2, Gamma=(a / 4.0) * np.eye(3))


def toy_choi(a: float, theta: float) -> ChoiMatrix:
    """Dynamical matrix of the worked family at one parameter point."""
    F = reduced_affine_form(example_unitary(theta), np.eye(2) / 2.0,
                            toy_correlation(a))
    return choi_of_affine(F)


def spectrum_sweep(a: float, theta_grid) -> np.ndarray:
    """Eigenvalue sweep of the worked family's dynamical matrix.

    Returns one row per grid point: (theta, four ascending eigenvalues
    of D(theta; a), xi_z). The sweep fixes alpha = 0; the map is
    state-independent (Kraus plus constant shift), so its Choi matrix
    does not depend on that choice.
    """
    out = np.empty((len(theta_grid), 6))
    for row, theta in enumerate(theta_grid):
        F = reduced_affine_form(example_unitary(theta), np.eye(2) / 2.0,
                                toy_correlation(a))
        D = choi_of_affine(F)
        out[row, 0] = theta
        out[row, 1:5] = np.linalg.eigvalsh(D.D)
        out[row, 5] = F.xi[2]
    return out


def default_theta_grid(points: int = 201) -> np.ndarray:
    return np.linspace(0.0, 2.0 * np.pi, int(points))


def quadratic_gamma(spec: AssignmentSpec, alpha: np.ndarray) -> CorrelationTensor:
    """Correlation tensor of an affine assignment's output, directly from
    the coefficients: quadratic in alpha through the B term.

    Gamma_ij = (g_ij + sum_k (G_ijk - delta_ik b_j) alpha_k
                     - sum_k B_jk alpha_i alpha_k) / (d_a d_b)
    """
    alpha = np.asarray(alpha, dtype=float)
    n_a = spec.g.shape[0]
    if alpha.shape != (n_a,):
        raise DimensionError(f"alpha must have length {n_a}, got {alpha.shape}")
    lin = np.einsum("ijk,k->ij", spec.G, alpha) - np.outer(alpha, spec.b)
    quad = -np.outer(alpha, spec.B @ alpha)
    Gamma = (spec.g + lin + quad) / (spec.d_a * spec.d_b)
    return CorrelationTensor(d_a=spec.d_a, d_b=spec.d_b, Gamma=Gamma)


def partial_transpose(tau: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """Transpose the second factor only."""
    d_a, d_b = dims
    T = np.asarray(tau, dtype=complex).reshape(d_a, d_b, d_a, d_b)
    return T.transpose(0, 3, 2, 1).reshape(d_a * d_b, d_a * d_b)


def ppt_check(tau: np.ndarray, dims: tuple[int, int] = (2, 2)) -> dict:
    """Partial-transpose test: {ppt: bool, min_pt_eigenvalue: real}.

    For 2x2 (and 2x3) systems PPT is equivalent to separability; in
    higher dimensions it is only a necessary condition and the flag must
    be read that way.
    """
    tau = assert_hermitian(tau, name="bipartite state")
    if tau.shape[0] != dims[0] * dims[1]:
        raise DimensionError(
            f"operator dimension {tau.shape[0]} does not factor as {dims}")
    low = min_eigenvalue(partial_transpose(tau, dims))
    return {"ppt": bool(low >= -1e-10), "min_pt_eigenvalue": low}

"""Fano-form coefficients of bipartite states, and assignment (extension)
maps rho -> tau_AB built from them.

A bipartite Hermitian unit-trace operator is written

    tau = (1/(d_a d_b)) [ 1 + sum_i alpha_i g_i x 1 + sum_j beta_j 1 x g_j
                            + sum_ij gamma_ij g_i x g_j ]

over the trace-orthogonal generator bases of each factor. With the
tr(g_i g_j) = 2 delta_ij normalization the coefficients come back out as
alpha_i = (d_a/2) tr((g_i x 1) tau) and so on, which for qubits reduces
to the familiar alpha_i = tr(sigma_i rho).

Assignment maps send a system state to a joint extension whose
environment and correlation coefficients are affine in the system Bloch
vector, optionally plus small caller-supplied nonlinear terms. Output
positivity is deliberately not enforced: extensions are meaningful on
their domain of positivity only, and discovering that domain is the
caller's job. A PositivityWarning is emitted when the cone is left.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .operators import (
    ContractViolation,
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

#: extensions whose smallest eigenvalue drops below this are flagged
POSITIVITY_FLOOR = -1e-10


class PositivityWarning(UserWarning):
    """An extension left the positive cone; reported, not enforced."""


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """Generalized Bloch vector, alpha_i = (d/2) tr(g_i rho)."""
    rho = assert_hermitian(rho, name="state")
    d = rho.shape[0]
    return np.array([(d / 2.0) * np.trace(g @ rho).real for g in generator_basis(d)])


def bloch_state(alpha: np.ndarray, d: int) -> np.ndarray:
    """Inverse of bloch_vector: (1/d)(1 + sum_i alpha_i g_i)."""
    alpha = np.asarray(alpha, dtype=float)
    out = np.eye(d, dtype=complex)
    for a, g in zip(alpha, generator_basis(d)):
        out += a * g
    return out / d


@dataclass(frozen=True)
class FanoState:
    """Coefficient view of a bipartite Hermitian unit-trace operator."""

    d_a: int
    d_b: int
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        n_a, n_b = self.d_a ** 2 - 1, self.d_b ** 2 - 1
        if np.shape(self.alpha) != (n_a,) or np.shape(self.beta) != (n_b,):
            raise DimensionError("Fano coefficient vectors do not match the dimensions")
        if np.shape(self.gamma) != (n_a, n_b):
            raise DimensionError(
                f"gamma must be {(n_a, n_b)}, got {np.shape(self.gamma)}")


@dataclass(frozen=True)
class CorrelationTensor:
    """Gamma_ij = (gamma_ij - alpha_i beta_j)/(d_a d_b); zero iff the Fano
    data factorizes into a product."""

    d_a: int
    d_b: int
    Gamma: np.ndarray

    @property
    def g(self) -> np.ndarray:
        """The d_a d_b Gamma_ij scaling used by correlated-evolution formulas."""
        return self.d_a * self.d_b * self.Gamma


@dataclass(frozen=True)
class AssignmentSpec:
    """Affine assignment map: beta(alpha) = b + B alpha, and
    gamma_ij(alpha) = g_ij + sum_k G_ijk alpha_k.

    degenerate marks specs recovered from joint dynamics whose reduced
    system map is not one-to-one (the system state alone does not pin
    the environment there).
    """

    b: np.ndarray
    B: np.ndarray
    g: np.ndarray
    G: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        n_b = b.shape[0]
        n_a = np.shape(self.B)[1] if np.ndim(self.B) == 2 else 0
        if np.shape(self.B) != (n_b, n_a):
            raise DimensionError(f"B must be ({n_b}, n_a), got {np.shape(self.B)}")
        if np.shape(self.g) != (n_a, n_b) or np.shape(self.G) != (n_a, n_b, n_a):
            raise DimensionError("g/G shapes inconsistent with b and B")
        for n, d_name in ((n_a, "system"), (n_b, "environment")):
            d = round(np.sqrt(n + 1))
            if d * d != n + 1:
                raise DimensionError(f"{d_name} coefficient count {n} is not d^2-1")

    @property
    def d_a(self) -> int:
        return round(np.sqrt(np.shape(self.B)[1] + 1))

    @property
    def d_b(self) -> int:
        return round(np.sqrt(np.shape(self.b)[0] + 1))


@dataclass(frozen=True)
class PerturbedAssignment:
    """Base affine spec plus epsilon-weighted nonlinear corrections.

    beta1 and gamma1 are caller-supplied functions of the system Bloch
    vector; the library never invents their functional form. epsilon = 0
    reduces exactly to the base spec.
    """

    base: AssignmentSpec
    epsilon: float
    beta1: "callable"
    gamma1: "callable"


def to_fano(tau: np.ndarray, dims: tuple[int, int]) -> FanoState:
    """Project a Hermitian unit-trace bipartite operator onto Fano coefficients."""
    d_a, d_b = int(dims[0]), int(dims[1])
    tau = assert_hermitian(tau, name="bipartite operator")
    if tau.shape[0] != d_a * d_b:
        raise DimensionError(
            f"operator dimension {tau.shape[0]} does not factor as {d_a} x {d_b}")
    if abs(np.trace(tau).real - 1.0) > 1e-12:
        raise ContractViolation(f"trace must be 1, got {np.trace(tau):.12g}")
    alpha = bloch_vector(partial_trace(tau, (d_a, d_b), 0))
    beta = bloch_vector(partial_trace(tau, (d_a, d_b), 1))
    gen_a, gen_b = generator_basis(d_a), generator_basis(d_b)
    gamma = np.empty((len(gen_a), len(gen_b)))
    for i, ga in enumerate(gen_a):
        for j, gb in enumerate(gen_b):
            gamma[i, j] = (d_a * d_b / 4.0) * np.trace(tensor(ga, gb) @ tau).real
    return FanoState(d_a=d_a, d_b=d_b, alpha=alpha, beta=beta, gamma=gamma)


def from_fano(f: FanoState) -> np.ndarray:
    """Rebuild the operator; exact inverse of to_fano. Hermitian and
    unit-trace always, positive only when the coefficients allow it."""
    d_a, d_b = f.d_a, f.d_b
    gen_a, gen_b = generator_basis(d_a), generator_basis(d_b)
    tau = np.eye(d_a * d_b, dtype=complex)
    for i, ga in enumerate(gen_a):
        tau += f.alpha[i] * tensor(ga, np.eye(d_b))
    for j, gb in enumerate(gen_b):
        tau += f.beta[j] * tensor(np.eye(d_a), gb)
    for i, ga in enumerate(gen_a):
        for j, gb in enumerate(gen_b):
            tau += f.gamma[i, j] * tensor(ga, gb)
    return tau / (d_a * d_b)


def correlation_tensor(f: FanoState) -> CorrelationTensor:
    Gamma = (f.gamma - np.outer(f.alpha, f.beta)) / (f.d_a * f.d_b)
    return CorrelationTensor(d_a=f.d_a, d_b=f.d_b, Gamma=Gamma)


def product_assignment(omega0: np.ndarray, d_a: int = 2) -> AssignmentSpec:
    """The uncorrelated assignment rho -> rho x omega0 as an AssignmentSpec."""
    omega0 = assert_density(omega0, name="environment state")
    b = bloch_vector(omega0)
    n_a, n_b = d_a * d_a - 1, len(b)
    G = np.zeros((n_a, n_b, n_a))
    for i in range(n_a):
        G[i, :, i] = b
    return AssignmentSpec(b=b, B=np.zeros((n_b, n_a)), g=np.zeros((n_a, n_b)), G=G)


def apply_assignment(spec, rho: np.ndarray) -> np.ndarray:
    """Build the joint extension tau from a system state.

    tr_B tau = rho holds exactly by construction. When tau acquires a
    negative eigenvalue a PositivityWarning is emitted and tau is
    returned anyway; the map is simply outside its domain of positivity
    at this rho.
    """
    base = spec.base if isinstance(spec, PerturbedAssignment) else spec
    rho = assert_density(rho, name="system state")
    if rho.shape[0] != base.d_a:
        raise DimensionError(
            f"state dimension {rho.shape[0]} does not match spec ({base.d_a})")
    alpha = bloch_vector(rho)
    beta = base.b + base.B @ alpha
    gamma = base.g + np.einsum("ijk,k->ij", base.G, alpha)
    if isinstance(spec, PerturbedAssignment):
        beta = beta + spec.epsilon * np.asarray(spec.beta1(alpha), dtype=float)
        gamma = gamma + spec.epsilon * np.asarray(spec.gamma1(alpha), dtype=float)
    tau = from_fano(FanoState(d_a=base.d_a, d_b=base.d_b,
                              alpha=alpha, beta=beta, gamma=gamma))
    low = min_eigenvalue(tau)
    if low < POSITIVITY_FLOOR:
        warnings.warn(
            f"extension has negative eigenvalue {low:.3e}; outside the domain "
            f"of positivity", PositivityWarning, stacklevel=2)
    return tau


def toy_extension(alpha: np.ndarray, a: float) -> np.ndarray:
    """The isotropically correlated two-qubit extension
    (1/4)[1 + alpha.sigma x 1 + a sum_i sigma_i x sigma_i]."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (3,):
        raise DimensionError("alpha must be a 3-vector")
    if np.linalg.norm(alpha) > 1.0 + 1e-12:
        raise ContractViolation(f"|alpha| = {np.linalg.norm(alpha):.6g} exceeds 1")
    sig = generator_basis(2)
    tau = np.eye(4, dtype=complex)
    for ai, s in zip(alpha, sig):
        tau += ai * tensor(s, np.eye(2))
    for s in sig:
        tau += a * tensor(s, s)
    return tau / 4.0


def toy_positivity_max(alpha_norm: float) -> float:
    """Largest a >= 0 keeping toy_extension(alpha, a) positive,
    (sqrt(4 - 3|alpha|^2) - 1)/3."""
    r = float(alpha_norm)
    if not 0.0 <= r <= 1.0:
        raise ContractViolation(f"|alpha| must lie in [0, 1], got {r:.6g}")
    return (np.sqrt(4.0 - 3.0 * r * r) - 1.0) / 3.0


def effective_assignment_from_unitary(V: np.ndarray, omega0: np.ndarray,
                                      tol: float = 1e-10) -> AssignmentSpec:
    """Assignment coefficients induced by joint unitary evolution of an
    initially uncorrelated pair.

    Propagates the d_a^2 basis inputs through rho -> V (rho x omega0) V^dag
    and projects each onto Fano coefficients; since the process is linear
    in rho, the affine coefficient structure recovered this way is exact
    (it is the zero-residual least-squares fit).

    When the reduced system map is one-to-one, the coefficients are
    re-expressed through its inverse as functions of the *evolved* reduced
    state's Bloch vector, so applying the returned spec to tr_B of the
    joint output rebuilds that output exactly. When the reduced map is
    singular the evolved state does not determine the environment; the
    coefficients are then left as functions of the *input* Bloch vector
    and the spec is flagged degenerate (rebuilding the joint output from
    the evolved state alone is impossible there).
    """
    omega0 = assert_density(omega0, name="environment state")
    V = assert_unitary(V, name="joint unitary")
    d_b = omega0.shape[0]
    d_a, rem = divmod(V.shape[0], d_b)
    if rem != 0 or d_a < 2:
        raise DimensionError(
            f"unitary dimension {V.shape[0]} does not factor over environment {d_b}")

    def joint(rho):
        return V @ tensor(rho, omega0) @ dag(V)

    f0 = to_fano(joint(np.eye(d_a) / d_a), (d_a, d_b))
    n_a, n_b = d_a * d_a - 1, d_b * d_b - 1
    B = np.zeros((n_b, n_a))
    G = np.zeros((n_a, n_b, n_a))
    K = np.zeros((n_a, n_a))
    for k, gk in enumerate(generator_basis(d_a)):
        fk = to_fano(joint((np.eye(d_a) + gk) / d_a), (d_a, d_b))
        B[:, k] = fk.beta - f0.beta
        G[:, :, k] = fk.gamma - f0.gamma
        K[:, k] = fk.alpha - f0.alpha
    svals = np.linalg.svd(K, compute_uv=False)
    if svals[-1] < tol * max(1.0, svals[0]):
        return AssignmentSpec(b=f0.beta, B=B, g=f0.gamma, G=G, degenerate=True)
    # rewrite beta(alpha_in), gamma(alpha_in) in terms of the evolved
    # Bloch vector alpha' = K alpha_in + m
    K_inv = np.linalg.inv(K)
    m = f0.alpha
    B_out = B @ K_inv
    G_out = np.einsum("ijl,lk->ijk", G, K_inv)
    b_out = f0.beta - B_out @ m
    g_out = f0.gamma - np.einsum("ijk,k->ij", G_out, m)
    return AssignmentSpec(b=b_out, B=B_out, g=g_out, G=G_out, degenerate=False)


def swap_gadget_extension(rho: np.ndarray, f) -> np.ndarray:
    """rho x f(rho): the (generally nonlinear) gadget extension that,
    followed by a swap and a partial trace, realizes rho -> f(rho).

    A demonstrator that unconstrained assignments make any state change
    accessible on its domain of positivity; f must return a valid state.
    """
    rho = assert_density(rho, name="system state")
    out = f(rho)
    try:
        out = assert_density(out, name="gadget target f(rho)")
    except ContractViolation as exc:
        raise ContractViolation(f"gadget function returned an invalid state: {exc}")
    return tensor(rho, out)

"""Weak-coupling scaling checks.

To first order in both the correlation strength and the system-bath
coupling, reduced dynamics built from a perturbed product assignment
stays linear and completely positive, so negativity and nonlinearity
must switch on quadratically in a joint scale s = epsilon = eta. The
scan below measures this by evolving a tomographically complete probe
set exactly, fitting the best linear map, and tracking the fitted
matrix's negativity, the fit residual, and the fitted constant shift.
"""

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .operators import (
    ContractViolation,
    DimensionError,
    assert_density,
    assert_hermitian,
    dag,
    eig_hermitian,
    generator_basis,
    min_eigenvalue,
    partial_trace,
    tensor,
    unitary_evolve,
)
from .fano import (
    PerturbedAssignment,
    PositivityWarning,
    apply_assignment,
    bloch_state,
    product_assignment,
)
from .choi import KrausSet, apply_kraus
from .tomography import (
    TomographyRecord,
    fit_affine,
    linear_inversion,
    standard_probe_states,
)

O1_STEP = 1e-5
METRIC_FLOOR = 1e-14
# interior system states used when scaling the perturbation into the
# positivity domain; pure states sit on the boundary and would force
# epsilon to zero
_DOMAIN_RADIUS = 0.9


@dataclass(frozen=True)
class WeakCouplingModel:
    H_A: np.ndarray
    H_int: np.ndarray
    eta: float
    omega0: np.ndarray
    perturbed: PerturbedAssignment
    t: float

    def __post_init__(self):
        H_A = assert_hermitian(np.asarray(self.H_A, dtype=complex), name="system Hamiltonian")
        H_int = assert_hermitian(np.asarray(self.H_int, dtype=complex), name="interaction")
        omega0 = assert_density(np.asarray(self.omega0, dtype=complex), name="environment state")
        object.__setattr__(self, "H_A", H_A)
        object.__setattr__(self, "H_int", H_int)
        object.__setattr__(self, "omega0", omega0)
        d_a, d_b = H_A.shape[0], omega0.shape[0]
        if H_int.shape[0] != d_a * d_b:
            raise DimensionError(
                f"interaction dimension {H_int.shape[0]} does not match {d_a} x {d_b}")
        p = np.linalg.eigvalsh(omega0)
        if p.min() < 1e-10:
            raise ContractViolation(
                f"environment state must have full rank; smallest eigenvalue {p.min():.3e}")
        if np.diff(p).min() < 1e-10:
            raise ContractViolation(
                "environment spectrum must be non-degenerate for the "
                "eigenbasis expansion to be stable")
        base = self.perturbed.base
        want = product_assignment(omega0, d_a=d_a)
        same = (np.abs(base.b - want.b).max() < 1e-12
                and np.abs(base.B).max() < 1e-12
                and np.abs(base.g).max() < 1e-12
                and np.abs(base.G - want.G).max() < 1e-12)
        if not same:
            raise ContractViolation(
                "the linear part of the assignment must be the uncorrelated "
                "product form; a constant correlation term dominates every "
                "scale and the weak-coupling expansion does not apply")

    @property
    def d_a(self) -> int:
        return self.H_A.shape[0]

    @property
    def d_b(self) -> int:
        return self.omega0.shape[0]


def weak_coupling_model(H_A, H_int, eta, epsilon, omega0, beta1, gamma1,
                        t) -> WeakCouplingModel:
    """Assemble a model, shrinking epsilon until the extension is
    positive on a set of interior states. The returned model carries the
    effective epsilon, which may be smaller than requested."""
    base = product_assignment(np.asarray(omega0, dtype=complex), d_a=2)
    checks = [bloch_state(np.zeros(3), 2)]
    for k in range(3):
        for sign in (1.0, -1.0):
            direction = np.zeros(3)
            direction[k] = sign * _DOMAIN_RADIUS
            checks.append(bloch_state(direction, 2))
    eps = float(epsilon)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PositivityWarning)
        for _ in range(64):
            spec = PerturbedAssignment(base=base, epsilon=eps,
                                       beta1=beta1, gamma1=gamma1)
            low = min(min_eigenvalue(apply_assignment(spec, rho))
                      for rho in checks)
            if low >= -1e-12 or eps == 0.0:
                break
            eps *= 0.5
    return WeakCouplingModel(H_A=H_A, H_int=H_int, eta=float(eta),
                             omega0=omega0, perturbed=spec, t=float(t))


def joint_propagator(model: WeakCouplingModel) -> np.ndarray:
    H = tensor(model.H_A, np.eye(model.d_b)) + model.eta * model.H_int
    return unitary_evolve(H, model.t)


def evolve_exact(model: WeakCouplingModel, rho: np.ndarray) -> np.ndarray:
    """tr_B of the jointly evolved extension. Out-of-domain inputs are
    flagged by the assignment's positivity warning, not rejected."""
    U = joint_propagator(model)
    tau = apply_assignment(model.perturbed, rho)
    return partial_trace(U @ tau @ dag(U), (model.d_a, model.d_b), "A")


def _eta_derivative(model: WeakCouplingModel) -> np.ndarray:
    H0 = tensor(model.H_A, np.eye(model.d_b))

    def U(eta):
        return unitary_evolve(H0 + eta * model.H_int, model.t)

    return (U(O1_STEP) - U(-O1_STEP)) / (2.0 * O1_STEP)


def first_order_kraus(model: WeakCouplingModel) -> KrausSet:
    """Kraus blocks of the propagator expanded to first order in the
    coupling.

    The exact blocks are sqrt(p_nu) <mu| U_AB |nu> in the environment
    eigenbasis; differentiating the propagator at zero coupling (central
    finite difference) and adding the zeroth-order unitary gives their
    Taylor expansion, so the truncation error is quadratic in eta and
    the set stays trace-preserving to the same order.
    """
    p, basis = eig_hermitian(model.omega0)
    U_A = unitary_evolve(model.H_A, model.t)
    dU = _eta_derivative(model).reshape(model.d_a, model.d_b,
                                        model.d_a, model.d_b)
    operators = []
    for nu in range(model.d_b):
        root = np.sqrt(max(p[nu], 0.0))
        ket = basis[:, nu]
        for mu in range(model.d_b):
            bra = basis[:, mu].conj()
            block = np.einsum("m,ambn,n->ab", bra, dU, ket)
            M = model.eta * root * block
            if mu == nu:
                M = M + root * U_A
            operators.append(M)
    return KrausSet(weights=np.ones(len(operators)), operators=operators)


def first_order_prediction(model: WeakCouplingModel,
                           rho: np.ndarray) -> np.ndarray:
    return apply_kraus(first_order_kraus(model), rho)


def noncp_magnitude(model: WeakCouplingModel,
                    probe_states: Optional[Sequence[np.ndarray]] = None) -> dict:
    """Fit the best linear map to exactly evolved probes and measure
    departures: negativity of the fitted matrix, fit residual, and the
    norm of the fitted constant shift."""
    probes = (standard_probe_states(model.d_a) if probe_states is None
              else [np.asarray(r, dtype=complex) for r in probe_states])
    outputs = [evolve_exact(model, rho) for rho in probes]
    rec = TomographyRecord(inputs=list(probes), outputs=outputs)
    lin = linear_inversion(rec)
    aff = fit_affine(rec)
    return {
        "noncp": max(0.0, -min_eigenvalue(lin.choi.D)),
        "nonlin": lin.residual,
        "shift": float(np.linalg.norm(aff.xi)),
    }


@dataclass(frozen=True)
class ScalingScan:
    scales: list  # (epsilon, eta) per point
    metrics: list  # noncp_magnitude dict per point

    def __post_init__(self):
        for m in self.metrics:
            if min(m.values()) < 0:
                raise ContractViolation("scan metrics must be nonnegative")


def scaling_scan(model_template: Callable[[float], WeakCouplingModel],
                 s_values: Sequence[float],
                 probe_states: Optional[Sequence[np.ndarray]] = None) -> ScalingScan:
    scales, metrics = [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PositivityWarning)
        for s in s_values:
            model = model_template(float(s))
            scales.append((model.perturbed.epsilon, model.eta))
            metrics.append(noncp_magnitude(model, probe_states))
    return ScalingScan(scales=scales, metrics=metrics)


def exponent_from_scan(scan: ScalingScan, s_values: Sequence[float]) -> float:
    """Log-log slope of (noncp + nonlin) against the joint scale.

    Returns nan when every point sits at the numerical floor, meaning
    the family is CP to machine precision and no exponent is defined.
    """
    s = np.array([float(v) for v in s_values])
    if len(s) < 4 or s.max() / s.min() < 100.0:
        raise ContractViolation(
            "scaling fit needs at least 4 scales spanning two decades")
    totals = np.array([m["noncp"] + m["nonlin"] for m in scan.metrics])
    if totals.max() <= 10.0 * METRIC_FLOOR:
        return float("nan")
    slope, _ = np.polyfit(np.log(s), np.log(totals + METRIC_FLOOR), 1)
    return float(slope)


def scaling_exponent(model_template: Callable[[float], WeakCouplingModel],
                     s_values: Sequence[float],
                     probe_states: Optional[Sequence[np.ndarray]] = None) -> float:
    s = np.array([float(v) for v in s_values])
    if len(s) < 4 or s.max() / s.min() < 100.0:
        raise ContractViolation(
            "scaling fit needs at least 4 scales spanning two decades")
    return exponent_from_scan(scaling_scan(model_template, s, probe_states), s)


def random_weak_coupling_template(rng: np.random.Generator, t: float = 0.7,
                                  s_max: float = 0.1
                                  ) -> Callable[[float], WeakCouplingModel]:
    """Template s -> model with epsilon = eta = s and shared structure.

    Hamiltonian coefficients and the quadratic assignment corrections
    are drawn once with coefficients in [-1, 1]; the corrections are
    then rescaled a single time so the extension stays positive on
    interior states at the largest intended scale. Every model from the
    template shares that normalization, so a scan in s measures scaling
    rather than domain clipping.
    """
    sig = generator_basis(2)
    H_A = sum(c * g for c, g in zip(rng.uniform(-1, 1, size=3), sig))
    hij = rng.uniform(-1, 1, size=(3, 3))
    H_int = sum(hij[i, j] * tensor(sig[i], sig[j])
                for i in range(3) for j in range(3))
    spread = rng.uniform(0.15, 0.35)
    G = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    Q, R = np.linalg.qr(G)
    V = Q * (np.diag(R) / np.abs(np.diag(R)))
    omega0 = V @ np.diag([spread, 1.0 - spread]) @ dag(V)
    Qb = rng.uniform(-1, 1, size=(3, 3, 3))
    Qg = rng.uniform(-1, 1, size=(3, 3, 3, 3))

    def beta1_raw(alpha):
        return np.einsum("jkl,k,l->j", Qb, alpha, alpha)

    def gamma1_raw(alpha):
        return np.einsum("ijkl,k,l->ij", Qg, alpha, alpha)

    probe_model = weak_coupling_model(H_A, H_int, eta=s_max, epsilon=s_max,
                                      omega0=omega0, beta1=beta1_raw,
                                      gamma1=gamma1_raw, t=t)
    norm = probe_model.perturbed.epsilon / s_max

    def beta1(alpha):
        return norm * beta1_raw(alpha)

    def gamma1(alpha):
        return norm * gamma1_raw(alpha)

    def template(s: float) -> WeakCouplingModel:
        return weak_coupling_model(H_A, H_int, eta=s, epsilon=s,
                                   omega0=omega0, beta1=beta1,
                                   gamma1=gamma1, t=t)

    return template

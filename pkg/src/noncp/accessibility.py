"""Linear accessibility of dynamical matrices.

A trace-preserving map with matrix D is accessible in the linear sense
when some shift vector xi makes L(xi) = D - xi.sigma x 1 positive
semidefinite: the map then splits into a TP CP part plus a constant
traceless shift. The test below maximizes the smallest eigenvalue of
L(xi) over xi. That objective is concave (pointwise minimum of linear
functions of xi), nonsmooth where the bottom eigenvalue is degenerate,
and lives in at most d^2 - 1 real variables, so a subgradient ascent
with a simplex polish is enough; no external solver is used.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .operators import (
    ContractViolation,
    DimensionError,
    eig_hermitian,
    generator_basis,
    min_eigenvalue,
)
from .choi import (
    AffineMapForm,
    ChoiMatrix,
    KrausSet,
    apply_affine_form,
    channel_properties,
    choi_of_affine,
    depolarizing_choi,
    identity_choi,
    kraus_from_choi,
    transpose_choi,
)

LAMBDA_TOL = 1e-7
# eigenvalues this close to the bottom count as degenerate for the
# subgradient average
TIE_TOL = 1e-9

DEFAULT_OPTIMIZER = {
    "ascent_steps": 120,
    "step": 0.5,
    "restarts": 0,
    "spread": 0.5,
    "seed": 0,
    "polish_maxiter": 4000,
}


@dataclass(frozen=True)
class AccessibilityReport:
    status: str  # "accessible" | "not-accessible" | "boundary"
    xi_star: np.ndarray
    lambda_min_star: float
    iterations: int
    certificate: Optional[KrausSet] = None
    diagnostics: Optional[dict] = None


def shifted_matrix(D: ChoiMatrix, xi: np.ndarray) -> np.ndarray:
    """L(xi) = D - xi.sigma x 1, as a plain array."""
    gens = generator_basis(D.d_out)
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (len(gens),):
        raise DimensionError(
            f"shift vector must have length {len(gens)}, got {xi.shape}")
    L = np.array(D.D, dtype=complex)
    eye = np.eye(D.d_in)
    for x, g in zip(xi, gens):
        L -= x * np.kron(g, eye)
    return L


def lambda_min_shifted(D: ChoiMatrix, xi: np.ndarray) -> float:
    return min_eigenvalue(shifted_matrix(D, xi))


def _value_and_subgradient(D, xi, sig):
    """Objective and one Clarke subgradient.

    At a degenerate bottom eigenvalue the gradient of lambda_min is not
    unique; averaging -v (sigma_i x 1) v over an orthonormal basis of
    the bottom eigenspace picks a canonical element.
    """
    w, V = eig_hermitian(shifted_matrix(D, xi))
    vecs = V[:, w <= w[0] + TIE_TOL]
    grad = np.array([
        -np.einsum("ak,ab,bk->", vecs.conj(), S, vecs).real / vecs.shape[1]
        for S in sig])
    return w[0], grad


def linear_accessibility_test(D: ChoiMatrix, tol: float = LAMBDA_TOL,
                              optimizer_config: Optional[dict] = None
                              ) -> AccessibilityReport:
    """Maximize lambda_min(L(xi)) and classify the supremum.

    Status is one-sided on purpose: unitary channels sit exactly on the
    PSD boundary (lambda* = 0), so anything with lambda* >= -tol counts
    as accessible, values in [-10 tol, -tol) as boundary, and only
    clearly negative optima as not-accessible. An optimizer that fails
    to converge can only downgrade a negative verdict to boundary; a
    feasible point found along the way proves accessibility on its own.
    """
    cfg = dict(DEFAULT_OPTIMIZER)
    if optimizer_config:
        cfg.update(optimizer_config)
    props = channel_properties(D)
    if not props["trace_preserving"]:
        raise ContractViolation("accessibility is defined for trace-preserving maps")

    gens = generator_basis(D.d_out)
    sig = [np.kron(g, np.eye(D.d_in)) for g in gens]
    n = len(gens)

    rng = np.random.default_rng(cfg["seed"])
    starts = [np.zeros(n)]
    for _ in range(int(cfg["restarts"])):
        starts.append(cfg["spread"] * rng.normal(size=n))

    best_x = np.zeros(n)
    best_f = -np.inf
    iterations = 0
    converged = True
    for x0 in starts:
        x = np.array(x0, dtype=float)
        for k in range(1, int(cfg["ascent_steps"]) + 1):
            f, g = _value_and_subgradient(D, x, sig)
            iterations += 1
            if f > best_f:
                best_f, best_x = f, x.copy()
            norm = np.linalg.norm(g)
            if norm < 1e-13:
                break
            x = x + (cfg["step"] / k) * (g / norm)
        res = minimize(lambda y: -min_eigenvalue(shifted_matrix(D, y)),
                       best_x, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12,
                                "maxiter": int(cfg["polish_maxiter"])})
        iterations += int(res.nfev)
        if -res.fun > best_f:
            best_f, best_x = float(-res.fun), np.array(res.x, dtype=float)
        converged = converged and bool(res.success)

    if best_f >= -tol:
        status = "accessible"
    elif best_f >= -10.0 * tol:
        status = "boundary"
    else:
        status = "not-accessible" if converged else "boundary"

    diagnostics = None
    if not converged:
        diagnostics = {"converged": False, "starts": len(starts)}

    certificate = None
    if status == "accessible":
        L = ChoiMatrix(d_in=D.d_in, d_out=D.d_out, D=shifted_matrix(D, best_x))
        ks = kraus_from_choi(L)
        # residual negatives are within tol of zero here; clip so the
        # certificate is a genuine CP decomposition
        certificate = KrausSet(weights=np.maximum(ks.weights, 0.0),
                               operators=ks.operators)

    return AccessibilityReport(status=status, xi_star=best_x,
                               lambda_min_star=float(best_f),
                               iterations=iterations,
                               certificate=certificate,
                               diagnostics=diagnostics)


def transpose_lambda_min(xi: np.ndarray) -> float:
    """Bottom eigenvalue of the shifted qubit transpose, in closed form.

    The transpose matrix has the flip operator's spectrum; subtracting
    xi.sigma x 1 pushes the singlet branch down to -sqrt(1 + |xi|^2),
    so the supremum over shifts is -1, attained at xi = 0. The qubit
    transpose is therefore never accessible.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (3,):
        raise DimensionError(f"expected a 3-vector, got shape {xi.shape}")
    return -float(np.sqrt(1.0 + xi @ xi))


def accessibility_threshold(family: Callable[[float], ChoiMatrix],
                            interval: tuple[float, float],
                            tol: float = 1e-7,
                            test_tol: float = LAMBDA_TOL,
                            optimizer_config: Optional[dict] = None
                            ) -> Optional[float]:
    """Bisect for the parameter where the family stops being reachable.

    "Reachable" here means the accessibility status is anything other
    than not-accessible, so the boundary band sits on the reachable
    side. Returns None when both endpoints classify the same way (no
    threshold inside the interval). Assumes the status is monotone over
    the interval; the bisection cannot detect multiple crossings.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise ContractViolation(f"empty interval [{lo}, {hi}]")

    def reachable(p: float) -> bool:
        report = linear_accessibility_test(family(p), tol=test_tol,
                                           optimizer_config=optimizer_config)
        return report.status != "not-accessible"

    r_lo, r_hi = reachable(lo), reachable(hi)
    if r_lo == r_hi:
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if reachable(mid) == r_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def tprime_choi(p: float) -> ChoiMatrix:
    """Depolarizing/transpose mixture in Choi form."""
    D = p * depolarizing_choi(2).D + (1.0 - p) * transpose_choi(2).D
    return ChoiMatrix(d_in=2, d_out=2, D=D)


def identity_transpose_choi(p: float) -> ChoiMatrix:
    """Identity/transpose mixture in Choi form."""
    D = p * identity_choi(2).D + (1.0 - p) * transpose_choi(2).D
    return ChoiMatrix(d_in=2, d_out=2, D=D)


def unital_cp_check(F: AffineMapForm, tol: float = 1e-9) -> dict:
    """Check unitality of an affine form and, when unital, positivity.

    A unital state-independent affine form must already be CP: the
    shift has to cancel the Kraus part's displacement of the maximally
    mixed state, and that forces the dynamical matrix to stay PSD. A
    unital form whose matrix fails PSD within tol would falsify that
    rule, so it aborts loudly instead of returning a flag.
    """
    d_in = F.kraus.operators[0].shape[1]
    d_out = F.kraus.operators[0].shape[0]
    image = apply_affine_form(F, np.eye(d_in) / d_in)
    unital = (d_in == d_out
              and np.abs(image - np.eye(d_out) / d_out).max() <= tol)
    low = min_eigenvalue(choi_of_affine(F).D)
    if unital and low < -tol:
        raise ContractViolation(
            "unital affine form with a negative dynamical-matrix eigenvalue "
            f"({low:.3e}); positivity is forced for unital forms")
    return {"unital": bool(unital), "cp_forced": bool(unital and low >= -tol)}

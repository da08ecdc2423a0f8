"""Operational settings where the natural recovery step is not CP.

Two desk-scale demonstrations: a decoupling pulse sequence whose
mid-sequence inverse map expands the Bloch ball, and a measure-and-
correct channel whose conditioned corrections transmit states that no
unconditioned channel on the same wire could keep distinguishable.
"""

from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .operators import (
    ContractViolation,
    DimensionError,
    assert_density,
    assert_hermitian,
    assert_unitary,
    dag,
    generator_basis,
    partial_trace,
    tensor,
    trace_distance,
    unitary_evolve,
)
from .fano import bloch_vector
from .choi import (
    ChoiMatrix,
    KrausSet,
    apply_choi,
    channel_properties,
    choi_from_kraus,
    identity_choi,
)

ANTICOMMUTATOR_TOL = 1e-12


# ---------------------------------------------------------------------------
# pulse sequences


@dataclass(frozen=True)
class DecouplingModel:
    H_AB: np.ndarray
    P: np.ndarray
    g: float
    t: float

    def __post_init__(self):
        H = assert_hermitian(np.asarray(self.H_AB, dtype=complex),
                             name="joint Hamiltonian")
        P = assert_unitary(np.asarray(self.P, dtype=complex), name="pulse")
        if P.shape != H.shape:
            raise DimensionError(
                f"pulse shape {P.shape} does not match Hamiltonian {H.shape}")
        dev = np.abs(P @ H @ dag(P) + H).max()
        if dev > ANTICOMMUTATOR_TOL:
            raise ContractViolation(
                f"pulse must anticommute with the Hamiltonian; "
                f"|PHP^dag + H| = {dev:.3e}")
        object.__setattr__(self, "H_AB", H)
        object.__setattr__(self, "P", P)


def spin_echo_model(g: float = 1.0, t: float = 0.7) -> DecouplingModel:
    sx, _, sz = generator_basis(2)
    return DecouplingModel(H_AB=g * tensor(sz, sx), P=tensor(sx, np.eye(2)),
                           g=float(g), t=float(t))


def pulse_sequence(H: np.ndarray, P: np.ndarray, rho: np.ndarray,
                   omega: np.ndarray, t: float) -> np.ndarray:
    """Evolve rho x omega for t, pulse, evolve for t again, undo the
    pulse, and reduce. No anticommutation requirement: with a bad pulse
    this simply fails to recover rho, which is itself instructive."""
    rho = assert_density(rho, name="system state")
    omega = assert_density(omega, name="environment state")
    H = assert_hermitian(H, name="joint Hamiltonian")
    P = assert_unitary(P, name="pulse")
    d_a, d_b = rho.shape[0], omega.shape[0]
    if H.shape[0] != d_a * d_b:
        raise DimensionError(
            f"Hamiltonian dimension {H.shape[0]} does not match {d_a} x {d_b}")
    U = unitary_evolve(H, t)
    state = tensor(rho, omega)
    state = U @ state @ dag(U)
    state = P @ state @ dag(P)
    state = U @ state @ dag(U)
    state = dag(P) @ state @ P
    return partial_trace(state, (d_a, d_b), "A")


def decoupling_sequence(model: DecouplingModel, rho: np.ndarray,
                        omega: np.ndarray) -> np.ndarray:
    """Time-symmetric echo: the pulse conjugates the second half of the
    evolution into the inverse of the first, so the joint state and in
    particular the reduced state return to where they started."""
    dev = np.abs(model.P @ model.H_AB @ dag(model.P) + model.H_AB).max()
    if dev > ANTICOMMUTATOR_TOL:
        raise ContractViolation(
            f"pulse must anticommute with the Hamiltonian; "
            f"|PHP^dag + H| = {dev:.3e}")
    return pulse_sequence(model.H_AB, model.P, rho, omega, model.t)


# ---------------------------------------------------------------------------
# generator transfer under a joint unitary


@dataclass(frozen=True)
class HeisenbergTransfer:
    """Coefficients s[mu, nu, kappa, rho] of U (s_mu x s_nu) U^dag in the
    extended generator basis (identity prepended) of two qubits."""

    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s)
        if s.shape != (4, 4, 4, 4):
            raise DimensionError(f"transfer tensor has shape {s.shape}")
        if np.iscomplexobj(s):
            if np.abs(s.imag).max() > 1e-10:
                raise ContractViolation(
                    "transfer coefficients of Hermitian images must be real")
            s = s.real
        object.__setattr__(self, "s", s)


def _extended_basis():
    return [np.eye(2, dtype=complex)] + list(generator_basis(2))


def heisenberg_transfer(U: np.ndarray) -> HeisenbergTransfer:
    """Expand the conjugation action of a two-qubit unitary.

    Orthogonality gives s[mu,nu,kappa,rho] =
    tr[(s_kappa x s_rho) U (s_mu x s_nu) U^dag] / 4, with every squared
    generator (identity included) carrying trace 2.
    """
    U = assert_unitary(np.asarray(U, dtype=complex), name="joint unitary")
    if U.shape[0] != 4:
        raise DimensionError("transfer tensor is implemented for two qubits")
    basis = _extended_basis()
    B = np.stack([tensor(bm, bn) for bm in basis for bn in basis])
    images = np.einsum("ab,xbc,dc->xad", U, B, U.conj())
    s = np.einsum("xab,yba->xy", images, B) / 4.0
    return HeisenbergTransfer(s=s.reshape(4, 4, 4, 4))


def transfer_contraction(first: HeisenbergTransfer,
                         second: HeisenbergTransfer) -> np.ndarray:
    """Coefficients of applying `first` then `second`, as a 4-index
    tensor; conjugating by U then U^dag contracts to the identity."""
    return np.einsum("mnkr,krab->mnab", first.s, second.s)


def recovery_map_choi(model: DecouplingModel,
                      omega: Optional[np.ndarray] = None) -> ChoiMatrix:
    """Dynamical matrix of the map that undoes the reduced evolution.

    The forward reduced map sends Bloch vectors through a contraction K
    (plus a shift for non-maximally-mixed environments); the recovery is
    the affine inverse, which is trace preserving but in general not CP.
    Feed the result to channel_properties for the min eigenvalue and the
    CP verdict.
    """
    omega = (np.eye(2) / 2.0 if omega is None
             else assert_density(omega, name="environment state"))
    if omega.shape[0] != 2:
        raise DimensionError("recovery map is implemented for a qubit bath")
    U = unitary_evolve(model.H_AB, model.t)
    s = heisenberg_transfer(U).s
    w = bloch_vector(omega)
    K = s[1:, 0, 1:, 0].T + np.einsum("ikj,k->ji", s[1:, 1:, 1:, 0], w)
    m = s[0, 0, 1:, 0] + np.einsum("kj,k->j", s[0, 1:, 1:, 0], w)
    if np.linalg.cond(K) > 1e12:
        raise ContractViolation(
            "Bloch contraction is not invertible: complete decoherence "
            "at this evolution time, nothing to undo")
    K_inv = np.linalg.inv(K)
    return _choi_of_bloch_affine(K_inv, -K_inv @ m)


def _choi_of_bloch_affine(K: np.ndarray, m: np.ndarray) -> ChoiMatrix:
    """Dynamical matrix of the qubit map acting on Bloch coordinates as
    alpha -> K alpha + m, extended linearly to all operators."""
    sig = generator_basis(2)
    D4 = np.zeros((2, 2, 2, 2), dtype=complex)
    for st, tt in product(range(2), repeat=2):
        E = np.zeros((2, 2), dtype=complex)
        E[st, tt] = 1.0
        u = np.array([np.trace(g @ E) for g in sig])
        coeff = K @ u + np.trace(E) * m
        image = (np.trace(E) * np.eye(2, dtype=complex)
                 + sum(c * g for c, g in zip(coeff, sig))) / 2.0
        D4[:, st, :, tt] = image
    D = D4.reshape(4, 4)
    return ChoiMatrix(d_in=2, d_out=2, D=(D + dag(D)) / 2.0)


def forward_reduced_state(model: DecouplingModel, rho: np.ndarray,
                          omega: Optional[np.ndarray] = None) -> np.ndarray:
    """One half-interval of the joint evolution, reduced to the system."""
    omega = np.eye(2) / 2.0 if omega is None else omega
    rho = assert_density(rho, name="system state")
    omega = assert_density(omega, name="environment state")
    U = unitary_evolve(model.H_AB, model.t)
    joint = U @ tensor(rho, omega) @ dag(U)
    return partial_trace(joint, (rho.shape[0], omega.shape[0]), "A")


# ---------------------------------------------------------------------------
# measure-and-correct channels


@dataclass(frozen=True)
class AssistedChannel:
    """An isometry into carrier x ancilla, a POVM on the ancilla block,
    and one CPTP recovery on the carrier block per outcome."""

    V: np.ndarray
    d_B: int
    d_C: int
    povm: tuple
    recoveries: tuple
    n: int = 1

    def __post_init__(self):
        V = np.asarray(self.V, dtype=complex)
        if V.ndim != 2 or V.shape[0] != self.d_B * self.d_C:
            raise DimensionError(
                f"isometry shape {V.shape} does not match "
                f"d_B*d_C = {self.d_B * self.d_C}")
        if np.abs(dag(V) @ V - np.eye(V.shape[1])).max() > 1e-12:
            raise ContractViolation("V is not an isometry")
        if self.n not in (1, 2):
            raise ContractViolation("block size n is limited to 1 or 2")
        if (self.d_B * self.d_C) ** self.n > 64:
            raise ContractViolation(
                "joint dimension exceeds the desk-scale guard of 64")
        dc = self.d_C ** self.n
        db = self.d_B ** self.n
        povm = tuple(np.asarray(E, dtype=complex) for E in self.povm)
        total = np.zeros((dc, dc), dtype=complex)
        for E in povm:
            E = assert_hermitian(E, name="POVM element")
            if E.shape[0] != dc:
                raise DimensionError(
                    f"POVM element dimension {E.shape[0]}, expected {dc}")
            if np.linalg.eigvalsh(E)[0] < -1e-12:
                raise ContractViolation("POVM element is not PSD")
            total += E
        if np.abs(total - np.eye(dc)).max() > 1e-12:
            raise ContractViolation("POVM does not sum to the identity")
        if len(self.recoveries) != len(povm):
            raise ContractViolation(
                "need exactly one recovery per POVM outcome")
        for R in self.recoveries:
            if not isinstance(R, ChoiMatrix) or R.d_in != db or R.d_out != db:
                raise DimensionError(
                    f"recovery must be a Choi matrix on dimension {db}")
            props = channel_properties(R)
            if not (props["cp"] and props["trace_preserving"]):
                raise ContractViolation("recoveries must be CP and TP")
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "povm", povm)
        object.__setattr__(self, "recoveries", tuple(self.recoveries))

    @property
    def d_A(self) -> int:
        return self.V.shape[1]


def dephasing_copy_channel() -> AssistedChannel:
    """Correlate the carrier with an ancilla in the computational basis;
    measuring the ancilla along x and conditionally flipping the phase
    undoes the dephasing exactly."""
    V = np.zeros((4, 2), dtype=complex)
    V[0, 0] = 1.0  # |0> -> |00>
    V[3, 1] = 1.0  # |1> -> |11>
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / np.sqrt(2.0)
    sz = np.diag([1.0, -1.0]).astype(complex)
    return AssistedChannel(
        V=V, d_B=2, d_C=2,
        povm=(np.outer(plus, plus), np.outer(minus, minus)),
        recoveries=(identity_choi(2),
                    choi_from_kraus(KrausSet(weights=np.array([1.0]),
                                             operators=[sz]))),
        n=1)


def _as_density(psi: np.ndarray, dim: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim == 1:
        norm = np.linalg.norm(psi)
        if norm < 1e-12:
            raise ContractViolation("input vector has zero norm")
        psi = np.outer(psi, psi.conj()) / norm ** 2
    psi = assert_density(psi, name="input state")
    if psi.shape[0] != dim:
        raise DimensionError(
            f"input dimension {psi.shape[0]}, expected {dim}")
    return psi


def _block_isometry(ch: AssistedChannel) -> np.ndarray:
    """V^(x)n followed by the permutation grouping carriers before
    ancillas, so the output factors as B-block x C-block."""
    if ch.n == 1:
        return ch.V
    W = tensor(ch.V, ch.V)  # output order B1 C1 B2 C2
    d = (ch.d_B, ch.d_C, ch.d_B, ch.d_C)
    total = ch.d_B ** 2 * ch.d_C ** 2
    perm = W.reshape(d + (ch.d_A ** 2,)).transpose(0, 2, 1, 3, 4)
    return perm.reshape(total, ch.d_A ** 2)


def _conditioned_blocks(ch: AssistedChannel, psi: np.ndarray):
    """Unnormalized carrier states tr_C[tau (1 x E_x)] per outcome."""
    rho = _as_density(psi, ch.d_A ** ch.n)
    W = _block_isometry(ch)
    tau = W @ rho @ dag(W)
    db, dc = ch.d_B ** ch.n, ch.d_C ** ch.n
    tau4 = tau.reshape(db, dc, db, dc)
    return [np.einsum("bcxd,dc->bx", tau4, E) for E in ch.povm]


def assisted_transform(ch: AssistedChannel, psi: np.ndarray) -> np.ndarray:
    """Sum of recovered conditioned blocks; trace preserving because the
    POVM resolves the identity and every recovery is TP."""
    blocks = _conditioned_blocks(ch, psi)
    out = sum(apply_choi(R, M) for R, M in zip(ch.recoveries, blocks))
    return (out + dag(out)) / 2.0


def unassisted_transform(ch: AssistedChannel, psi: np.ndarray) -> np.ndarray:
    """The same wire with the ancilla discarded instead of measured."""
    rho = _as_density(psi, ch.d_A ** ch.n)
    W = _block_isometry(ch)
    tau = W @ rho @ dag(W)
    db, dc = ch.d_B ** ch.n, ch.d_C ** ch.n
    return np.einsum("bcxc->bx", tau.reshape(db, dc, db, dc))


def distinguishability_gain(ch: AssistedChannel, psi1: np.ndarray,
                            psi2: np.ndarray) -> dict:
    """Trace distances of the output pair with and without the ancilla
    measurement. A positive gain certifies that the conditioned overall
    map cannot be CP: CP maps never increase trace distance."""
    assisted = trace_distance(assisted_transform(ch, psi1),
                              assisted_transform(ch, psi2))
    unassisted = trace_distance(unassisted_transform(ch, psi1),
                                unassisted_transform(ch, psi2))
    return {"assisted": assisted, "unassisted": unassisted,
            "gain": assisted - unassisted}

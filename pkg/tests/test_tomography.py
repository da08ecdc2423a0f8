import numpy as np
import pytest

from conftest import random_density, random_unitary

from noncp.operators import ContractViolation, min_eigenvalue
from noncp.choi import (
    AffineMapForm,
    KrausSet,
    apply_affine_form,
    apply_choi,
    channel_properties,
    choi_from_kraus,
    identity_choi,
    induced_choi_pair,
    transpose_choi,
)
from noncp.dynamics import example_unitary, example_xi, reduced_affine_form, toy_correlation
from noncp.tomography import (
    TomographyRecord,
    fit_affine,
    linear_inversion,
    project_to_cptp,
    simulate_tomography,
    standard_probe_states,
    template_comparison,
)

PROBES = standard_probe_states(2)


def random_cptp(rng):
    D, _ = induced_choi_pair(random_unitary(rng, 4), random_density(rng, 2),
                             np.eye(2) / 2.0)
    return D


def affine_shift_truth(x: float):
    F = AffineMapForm(kraus=KrausSet(weights=np.array([1.0]),
                                     operators=[np.eye(2, dtype=complex)]),
                      xi=np.array([0.0, 0.0, x]))
    return lambda rho: apply_affine_form(F, rho)


def test_standard_probes_span_and_are_states():
    assert len(PROBES) == 4
    for p in PROBES:
        assert abs(np.trace(p) - 1.0) < 1e-14
        assert min_eigenvalue(p) >= -1e-14
    X = np.array([p.reshape(-1) for p in PROBES])
    assert np.linalg.matrix_rank(X) == 4


def test_incomplete_inputs_rejected():
    with pytest.raises(ContractViolation):
        simulate_tomography(lambda r: r, [np.eye(2) / 2.0] * 4)
    rec = TomographyRecord(inputs=PROBES[:3], outputs=PROBES[:3])
    with pytest.raises(ContractViolation):
        linear_inversion(rec)


def test_identity_truth_exact_roundtrip():
    rec = simulate_tomography(lambda r: r, PROBES)
    for rho, out in zip(rec.inputs, rec.outputs):
        assert np.abs(rho - out).max() == 0.0
    fit = linear_inversion(rec)
    assert fit.residual <= 1e-10
    assert np.abs(fit.choi.D - identity_choi(2).D).max() < 1e-12


def test_random_linear_truths_recovered(rng):
    for _ in range(5):
        D = random_cptp(rng)
        rec = simulate_tomography(lambda r: apply_choi(D, r), PROBES)
        fit = linear_inversion(rec)
        assert np.abs(fit.choi.D - D.D).max() < 1e-10
        assert fit.residual <= 1e-10


def test_transpose_truth_yields_flip_matrix():
    rec = simulate_tomography(lambda r: r.T, PROBES)
    fit = linear_inversion(rec)
    assert np.abs(fit.choi.D - transpose_choi(2).D).max() < 1e-12
    assert np.linalg.eigvalsh(fit.choi.D).min() == pytest.approx(-1.0, abs=1e-10)


def test_affine_truth_is_absorbed_not_misfit():
    # a constant shift acts like the trace component of a linear map on
    # unit-trace inputs, so the unconstrained fit reproduces the data
    # exactly; the shift surfaces as negativity of the fitted matrix,
    # not as residual
    rec = simulate_tomography(affine_shift_truth(0.1), PROBES)
    fit = linear_inversion(rec)
    assert fit.residual <= 1e-10
    props = channel_properties(fit.choi)
    assert props["trace_preserving"]
    assert not props["cp"]
    assert np.linalg.eigvalsh(fit.choi.D).min() == pytest.approx(-0.1, abs=1e-10)


def test_affine_fit_recovers_generating_shift():
    rec = simulate_tomography(affine_shift_truth(0.1), PROBES)
    fit = fit_affine(rec)
    assert np.abs(fit.xi - np.array([0.0, 0.0, 0.1])).max() < 1e-10
    assert np.abs(fit.choi.D - identity_choi(2).D).max() < 1e-10
    assert fit.residual <= 1e-10


def test_affine_fit_on_dilated_family():
    F = reduced_affine_form(example_unitary(0.19), np.eye(2) / 2.0,
                            toy_correlation(0.2))
    rec = simulate_tomography(lambda r: apply_affine_form(F, r), PROBES)
    fit = fit_affine(rec)
    # the Kraus part of this construction is unital, so the decomposition
    # gauge lands exactly on the generating shift
    assert np.abs(fit.xi - example_xi(0.2, 0.19)).max() < 1e-12
    assert np.abs(fit.choi.D - choi_from_kraus(F.kraus).D).max() < 1e-10


def test_affine_fit_zero_shift_for_unitary_truth(rng):
    U = random_unitary(rng, 2)
    rec = simulate_tomography(lambda r: U @ r @ U.conj().T, PROBES)
    fit = fit_affine(rec)
    assert np.abs(fit.xi).max() < 1e-12


def test_projection_fixes_cp_input(rng):
    D = random_cptp(rng)
    out = project_to_cptp(D)
    assert np.abs(out.D - D.D).max() < 1e-12


def test_projection_of_transpose():
    out, info = project_to_cptp(transpose_choi(2), return_info=True)
    assert info["converged"]
    props = channel_properties(out)
    assert props["trace_preserving"] and props["cp"]
    assert min_eigenvalue(out.D) >= -1e-9
    # the -1 eigenvalue has to travel at least to zero
    assert np.linalg.norm(out.D - transpose_choi(2).D) >= 1.0


def test_projection_cleans_sampling_noise():
    rec = simulate_tomography(lambda r: r, PROBES, shots=100000, seed=11)
    fit = linear_inversion(rec)
    out, info = project_to_cptp(fit.choi, return_info=True)
    assert min_eigenvalue(out.D) >= -1e-9
    assert channel_properties(out)["trace_preserving"]
    assert info["distance"] < 0.05


def test_sampling_reproducible_and_within_error():
    rec1 = simulate_tomography(lambda r: r, PROBES, shots=100000, seed=5)
    rec2 = simulate_tomography(lambda r: r, PROBES, shots=100000, seed=5)
    for a, b in zip(rec1.outputs, rec2.outputs):
        assert np.abs(a - b).max() == 0.0
    bound = 3.0 / np.sqrt(100000)
    for rho, out in zip(rec1.outputs, rec1.inputs):
        assert np.abs(rho - out).max() < bound
    rec3 = simulate_tomography(lambda r: r, PROBES, shots=100000, seed=6)
    assert any(np.abs(a - b).max() > 0 for a, b in zip(rec1.outputs, rec3.outputs))


def test_sampling_negativity_shows_up():
    negatives = 0
    for seed in range(10):
        rec = simulate_tomography(lambda r: r, PROBES, shots=20000, seed=seed)
        fit = linear_inversion(rec)
        if np.linalg.eigvalsh(fit.choi.D).min() < 0:
            negatives += 1
    assert negatives >= 1


def test_template_ranking_noncp_truth():
    F = reduced_affine_form(example_unitary(0.19), np.eye(2) / 2.0,
                            toy_correlation(0.2))
    rec = simulate_tomography(lambda r: apply_affine_form(F, r), PROBES)
    ranked = template_comparison(rec)
    assert ranked[0].model == "affine-with-shift"
    cp_fit = next(f for f in ranked if f.model == "linear-cp")
    assert cp_fit.residual >= 10.0 * max(ranked[0].residual, 1e-12)
    unconstrained = next(f for f in ranked if f.model == "linear-unconstrained")
    assert unconstrained.difference is not None
    rebuilt = (choi_from_kraus(unconstrained.difference.plus).D
               - choi_from_kraus(unconstrained.difference.minus).D)
    assert np.abs(rebuilt - unconstrained.choi.D).max() < 1e-10


def test_template_ranking_cp_truth(rng):
    U = random_unitary(rng, 2)
    rec = simulate_tomography(lambda r: U @ r @ U.conj().T, PROBES)
    ranked = template_comparison(rec)
    assert ranked[0].model == "linear-cp"
    assert ranked[0].residual <= 1e-10
    assert all(f.residual <= 1e-10 for f in ranked)

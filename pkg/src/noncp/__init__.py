"""Affine quantum dynamical maps beyond complete positivity.

Tools for the Choi description of linear and affine qubit dynamics,
initial-correlation assignment calculus, accessibility certification,
perturbative scaling scans, decoupling and assisted-channel demos, and
process-tomography templates that tolerate non-positive fits.

Submodules group the functionality; the names below are the common
entry points. Serialization (JSON/CSV) lives in noncp.serialize and the
command line front end in noncp.cli.
"""
from .operators import (
    ContractViolation,
    DimensionError,
    generator_basis,
    tensor,
    partial_trace,
    eig_hermitian,
    unitary_evolve,
    trace_distance,
)
from .fano import (
    AssignmentSpec,
    FanoState,
    PositivityWarning,
    apply_assignment,
    bloch_state,
    bloch_vector,
    product_assignment,
    toy_extension,
)
from .choi import (
    AffineMapForm,
    ChoiMatrix,
    DifferenceForm,
    KrausSet,
    apply_affine_form,
    apply_choi,
    apply_kraus,
    channel_properties,
    choi_from_kraus,
    choi_of_affine,
    difference_form,
    induced_choi_pair,
    kraus_from_choi,
)
from .dynamics import (
    reduced_affine_form,
    spectrum_sweep,
    toy_choi,
    ppt_check,
)
from .accessibility import (
    AccessibilityReport,
    accessibility_threshold,
    linear_accessibility_test,
    unital_cp_check,
)
from .perturbation import (
    WeakCouplingModel,
    weak_coupling_model,
    first_order_kraus,
    noncp_magnitude,
    scaling_exponent,
    scaling_scan,
)
from .applications import (
    decoupling_sequence,
    distinguishability_gain,
    recovery_map_choi,
    spin_echo_model,
)
from .tomography import (
    TomographyRecord,
    linear_inversion,
    fit_affine,
    project_to_cptp,
    simulate_tomography,
    standard_probe_states,
    template_comparison,
)

__all__ = [
    "ContractViolation",
    "DimensionError",
    "generator_basis",
    "tensor",
    "partial_trace",
    "eig_hermitian",
    "unitary_evolve",
    "trace_distance",
    "AssignmentSpec",
    "FanoState",
    "PositivityWarning",
    "apply_assignment",
    "bloch_state",
    "bloch_vector",
    "product_assignment",
    "toy_extension",
    "AffineMapForm",
    "ChoiMatrix",
    "DifferenceForm",
    "KrausSet",
    "apply_affine_form",
    "apply_choi",
    "apply_kraus",
    "channel_properties",
    "choi_from_kraus",
    "choi_of_affine",
    "difference_form",
    "induced_choi_pair",
    "kraus_from_choi",
    "reduced_affine_form",
    "spectrum_sweep",
    "toy_choi",
    "ppt_check",
    "AccessibilityReport",
    "accessibility_threshold",
    "linear_accessibility_test",
    "unital_cp_check",
    "WeakCouplingModel",
    "weak_coupling_model",
    "first_order_kraus",
    "noncp_magnitude",
    "scaling_exponent",
    "scaling_scan",
    "decoupling_sequence",
    "distinguishability_gain",
    "recovery_map_choi",
    "spin_echo_model",
    "TomographyRecord",
    "linear_inversion",
    "fit_affine",
    "project_to_cptp",
    "simulate_tomography",
    "standard_probe_states",
    "template_comparison",
]

__version__ = "0.1.0"

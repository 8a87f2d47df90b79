"""Exact computations for the perturbed Bernoulli shift on cylinder functions."""

from .cylinder import (
    CylinderFunction,
    SymbolicSystem,
    expectation,
    inner,
    norm2,
    random_cylinder,
    shift_apply,
)
from .limits import (
    IntertwiningResidual,
    PairingResult,
    corollary1_table,
    gamma_apply,
    gamma_bound,
    gamma_pairing,
    intertwining_pairing_check,
    lambda_adjoint_apply,
    lambda_apply,
    lambda_bound,
    lambda_pairing,
    phi_k_identity_check,
    pi_apply,
    pi_pairing,
    pi_series,
)
from .perturbation import (
    DegeneratePerturbationWarning,
    PerturbationSpec,
    association_check,
    build_perturbation,
    identity_spec,
    phi_adjoint_apply,
    phi_apply,
)
from .tail import cylinder_invariant_partition_scan, tail_ergodicity_probe, window_kernel

__all__ = [
    "CylinderFunction",
    "DegeneratePerturbationWarning",
    "IntertwiningResidual",
    "PairingResult",
    "PerturbationSpec",
    "SymbolicSystem",
    "association_check",
    "build_perturbation",
    "corollary1_table",
    "cylinder_invariant_partition_scan",
    "expectation",
    "gamma_apply",
    "gamma_bound",
    "gamma_pairing",
    "identity_spec",
    "inner",
    "intertwining_pairing_check",
    "lambda_adjoint_apply",
    "lambda_apply",
    "lambda_bound",
    "lambda_pairing",
    "norm2",
    "phi_adjoint_apply",
    "phi_apply",
    "phi_k_identity_check",
    "pi_apply",
    "pi_pairing",
    "pi_series",
    "random_cylinder",
    "shift_apply",
    "tail_ergodicity_probe",
    "window_kernel",
]

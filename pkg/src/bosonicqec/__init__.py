"""Bosonic quantum error correction in truncated Fock space.

Code constructors (binomial, qudit, cat, two-mode, optimized), exact
loss-channel Kraus maps with a Lindblad oracle, Knill-Laflamme verification,
recovery-map synthesis, fidelity benchmarks and a numerical code search.
"""

__version__ = "0.1.0"

from .fock import (
    ATOL,
    Operator,
    StateVector,
    displacement,
    expectation,
    fock_state,
    identity,
    mode_operators,
    overlap,
    parity_projector,
    tensor_product,
    two_mode_fock_state,
)
from .codes import (
    Code,
    CodeParams,
    binomial_code,
    binomial_dual_basis,
    cat_code,
    extended_binomial,
    mean_photon_number,
    moment_difference,
    moment_matrix,
    naive_code,
    optimized_codes,
    qudit_binomial_code,
    two_mode_code,
)
from .channels import (
    DensityMatrix,
    KrausChannel,
    discrete_error_set,
    kraus_taylor_leading,
    lindblad_evolve,
    lindblad_oracle,
    loss_kraus,
    two_mode_loss_kraus,
)
from .qec import (
    QecReport,
    RecoveryMap,
    build_recovery,
    error_words,
    kl_matrix,
    logical_gates,
    measurement_recovery,
    required_code_params,
    sqrt17_recovery,
    unitary_completion,
)
from .metrics import (
    SweepRow,
    cat_violation,
    entanglement_infidelity,
    sweep_infidelity,
    two_mode_uncorrectable_ratio,
    uncorrectable_rate,
    unfaithful_recovery_optimum,
)
from .optimizer import OptimizationProblem, OptResult, kl_penalty, optimize_code

__all__ = [
    "ATOL",
    "Code",
    "CodeParams",
    "DensityMatrix",
    "KrausChannel",
    "OptResult",
    "OptimizationProblem",
    "Operator",
    "QecReport",
    "RecoveryMap",
    "StateVector",
    "SweepRow",
    "binomial_code",
    "binomial_dual_basis",
    "build_recovery",
    "cat_code",
    "cat_violation",
    "discrete_error_set",
    "displacement",
    "entanglement_infidelity",
    "error_words",
    "expectation",
    "extended_binomial",
    "fock_state",
    "identity",
    "kl_matrix",
    "kl_penalty",
    "kraus_taylor_leading",
    "lindblad_evolve",
    "lindblad_oracle",
    "logical_gates",
    "loss_kraus",
    "mean_photon_number",
    "measurement_recovery",
    "mode_operators",
    "moment_difference",
    "moment_matrix",
    "naive_code",
    "optimize_code",
    "optimized_codes",
    "overlap",
    "parity_projector",
    "qudit_binomial_code",
    "required_code_params",
    "sqrt17_recovery",
    "sweep_infidelity",
    "tensor_product",
    "two_mode_code",
    "two_mode_fock_state",
    "two_mode_loss_kraus",
    "uncorrectable_rate",
    "unfaithful_recovery_optimum",
    "unitary_completion",
]

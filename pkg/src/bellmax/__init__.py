"""Recursive multi-qubit Bell operators, Pauli correlation tensors, and
maximal-violation calculators (closed-form and brute-force)."""

from .bellops import (BellOperatorSpec, MeasurementSettings, chen_matrix,
                      chsh_matrix, index_to_perm, mabk_matrix,
                      parse_operator_spec, perm_to_index, recursive_bell_matrix)
from .correlation import (CorrelationTensor, correlation_tensor,
                          reconstruct_density, slice_matrix, subvector)
from .linalg import eig_sym3, kron, pauli, trace_product
from .states import (DensityMatrix, embed_product, load_density,
                     make_generalized_ghz, make_w, maximally_mixed, mix,
                     random_product_state, save_density)
from .violation import (OptimizerConfig, ViolationResult, crossings,
                        formula_objective, max_violation_formula,
                        oracle_max_violation, sweep)

__all__ = [
    "BellOperatorSpec", "CorrelationTensor", "DensityMatrix",
    "MeasurementSettings", "OptimizerConfig", "ViolationResult",
    "chen_matrix", "chsh_matrix", "correlation_tensor", "crossings",
    "eig_sym3", "embed_product", "formula_objective", "index_to_perm",
    "kron", "load_density", "mabk_matrix", "make_generalized_ghz", "make_w",
    "maximally_mixed", "max_violation_formula", "mix", "oracle_max_violation",
    "parse_operator_spec", "pauli", "perm_to_index", "random_product_state",
    "reconstruct_density", "recursive_bell_matrix", "save_density",
    "slice_matrix", "subvector", "sweep", "trace_product",
]

__version__ = "0.1.0"

"""Pauli correlation tensors and the slices the violation formulas consume.

For an n-qubit state rho the tensor is
    T[i1..in] = (1/2^n) Tr(rho sigma_i1 x ... x sigma_in),
with indices 0..3 per qubit and sigma_0 the identity; rho is recovered as
rho = sum_T T[i1..in] sigma_i1 x ... x sigma_in.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import PAULI
from .states import DensityMatrix

IMAG_RESIDUE_TOL = 1e-10

_PAULI_STACK = np.stack(PAULI)  # (4, 2, 2)


@dataclass(frozen=True)
class CorrelationTensor:
    n_qubits: int
    values: np.ndarray = field(repr=False)  # real, shape (4,)*n


def correlation_tensor(rho):
    """Full Pauli correlation tensor of a density matrix."""
    n = rho.n_qubits
    t = rho.matrix.reshape((2,) * (2 * n))
    # T[i1..in] = (1/2^n) sum_{r,c} rho[r, c] prod_k sigma[i_k][c_k, r_k]
    operands = [t, list(range(2 * n))]
    out = []
    for k in range(n):
        idx = 2 * n + k
        operands += [_PAULI_STACK, [idx, n + k, k]]
        out.append(idx)
    raw = np.einsum(*operands, out) / (2**n)
    resid = np.max(np.abs(raw.imag))
    if resid > IMAG_RESIDUE_TOL:
        raise ValueError(f"correlation tensor has imaginary residue {resid:.3e}")
    return CorrelationTensor(n, np.ascontiguousarray(raw.real))


def reconstruct_density(t):
    """Inverse of correlation_tensor."""
    n = t.n_qubits
    t000 = float(t.values[(0,) * n])
    if abs(t000 - 0.5**n) > 1e-12:
        raise ValueError(
            f"tensor not normalized: T[0..0] = {t000!r}, expected {0.5**n}")
    operands = [t.values.astype(np.complex128), list(range(n))]
    rows, cols = [], []
    for k in range(n):
        r, c = n + 2 * k, n + 2 * k + 1
        operands += [_PAULI_STACK, [k, r, c]]
        rows.append(r)
        cols.append(c)
    mat = np.einsum(*operands, rows + cols).reshape(2**n, 2**n)
    return DensityMatrix(n, mat)


def _check_perm(n, perm):
    if sorted(perm) != list(range(1, n + 1)):
        raise ValueError(f"not a permutation of 1..{n}: {perm!r}")


def permute_tensor(t, perm):
    """Tensor with index slot r carrying original qubit perm[r] (1-based)."""
    _check_perm(t.n_qubits, perm)
    return CorrelationTensor(
        t.n_qubits, np.ascontiguousarray(np.transpose(t.values, [p - 1 for p in perm])))


def slice_matrix(t, perm, fixed):
    """3x3 matrix with (i, j) entry T at qubit perm(1)=i, perm(2)=j.

    Qubit perm(m) for m >= 3 is pinned to fixed[m-3]; i, j run over 1..3.
    """
    n = t.n_qubits
    _check_perm(n, perm)
    if len(fixed) != n - 2:
        raise ValueError(f"need {n - 2} fixed indices, got {len(fixed)}")
    tp = np.transpose(t.values, [p - 1 for p in perm])
    return np.ascontiguousarray(tp[(slice(1, 4), slice(1, 4)) + tuple(fixed)])


def subvector(t, perm, m):
    """Level-m slab of the tensor: T with qubits perm(1..m-1) at index 0.

    Component k (1..3) of the result indexes qubit perm(m); qubits
    perm(m+1..n) stay free over 1..3 as trailing axes, to be contracted
    by the caller against the remaining unit vectors.  Shape (3,)*(n-m+1);
    a plain 3-vector when m = n.
    """
    n = t.n_qubits
    _check_perm(n, perm)
    if not 3 <= m <= n:
        raise ValueError(f"level must satisfy 3 <= m <= n, got {m}")
    tp = np.transpose(t.values, [p - 1 for p in perm])
    index = ((0,) * (m - 1)) + (slice(1, 4),) * (n - m + 1)
    return np.ascontiguousarray(tp[index])


def core_slab(t, perm):
    """T restricted to indices 1..3 on every qubit, in role order.

    Axis 0/1 are the row/column qubits perm(1), perm(2); axes 2.. are the
    extension levels 3..n.  Contracting the trailing axes with unit
    vectors yields the matrix whose Gram eigenvalues enter the formulas.
    """
    n = t.n_qubits
    _check_perm(n, perm)
    tp = np.transpose(t.values, [p - 1 for p in perm])
    return np.ascontiguousarray(tp[(slice(1, 4),) * n])


def dump_tensor(t, fh):
    """Write `i1 .. iN value` lines, lexicographic index order."""
    n = t.n_qubits
    flat = t.values.reshape(-1)
    for pos in range(flat.size):
        idx = np.unravel_index(pos, t.values.shape)
        fh.write(" ".join(str(i) for i in idx) + f" {flat[pos]:.17g}\n")


def parse_tensor_dump(lines, n):
    """Inverse of dump_tensor (test harness and CLI round-trips)."""
    values = np.zeros((4,) * n)
    for ln in lines:
        toks = ln.split()
        if len(toks) != n + 1:
            raise ValueError(f"bad tensor line: {ln!r}")
        idx = tuple(int(x) for x in toks[:n])
        values[idx] = float(toks[n])
    return CorrelationTensor(n, values)

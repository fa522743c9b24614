"""Small dense linear-algebra helpers shared by the rest of the package.

Everything here operates on plain numpy arrays: complex 2^n x 2^n operator
matrices, real 3-vectors for measurement directions, and real symmetric
3x3 matrices whose eigenvalues enter the violation formulas.
"""

import numpy as np

SIGMA_0 = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

PAULI = (SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z)


def pauli(i):
    """Return sigma_i for i in {0,1,2,3} (sigma_0 is the identity)."""
    if i not in (0, 1, 2, 3):
        raise IndexError(f"Pauli index must be 0..3, got {i!r}")
    return PAULI[i].copy()


def kron(a, b):
    """Kronecker product of two complex matrices."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(b.real))
            and np.all(np.isfinite(a.imag)) and np.all(np.isfinite(b.imag))):
        raise ValueError("kron: non-finite entries")
    return np.kron(a, b)


def trace_product(a, b):
    """Tr(a b) without forming the full product: sum_ij a_ij b_ji."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"trace_product: incompatible shapes {a.shape} and {b.shape}")
    return complex(np.sum(a * b.T))


def direction_operator(v):
    """v . sigma for a real 3-vector v (not necessarily unit)."""
    v = np.asarray(v, dtype=float)
    return v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z


def eig_sym3(m):
    """Eigenvalues of a real symmetric 3x3 matrix, descending.

    Uses the closed-form trigonometric solution of the characteristic
    cubic; falls back to numpy's symmetric eigensolver when the cubic is
    near-degenerate and the acos argument leaves [-1, 1].
    """
    m = np.asarray(m, dtype=float)
    q = np.trace(m) / 3.0
    d = m - q * np.eye(3)
    p2 = np.sum(d * d)
    if p2 < 1e-28:
        return np.array([q, q, q])
    p = np.sqrt(p2 / 6.0)
    r = np.linalg.det(d / p) / 2.0
    if abs(r) > 1.0 - 1e-12:
        # repeated-root regime: trig formula loses accuracy
        w = np.linalg.eigvalsh(m)
        return w[::-1].copy()
    phi = np.arccos(r) / 3.0
    e1 = q + 2.0 * p * np.cos(phi)
    e3 = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return np.array([e1, e2, e3])


def permute_qubits_matrix(mat, perm):
    """Reorder the tensor slots of an n-qubit operator.

    perm is a sequence of 1-based qubit labels; slot r of the result
    carries qubit perm[r] of the input.
    """
    mat = np.asarray(mat)
    n = len(perm)
    if mat.shape != (2**n, 2**n):
        raise ValueError(f"matrix shape {mat.shape} does not match {n} qubits")
    if sorted(perm) != list(range(1, n + 1)):
        raise ValueError(f"not a permutation of 1..{n}: {perm!r}")
    axes = [p - 1 for p in perm]
    t = mat.reshape((2,) * (2 * n))
    t = t.transpose(axes + [n + a for a in axes])
    return np.ascontiguousarray(t.reshape(2**n, 2**n))

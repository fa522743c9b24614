"""N-qubit density matrices: named states, mixtures, validation, file IO.

Conventions: |0> = (1, 0)^T with sigma_z|0> = +|0>, and qubit 1 is the
most significant Kronecker factor, so basis index bits read left to right
as qubits 1..n.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DensityFormatError, DensityValidationError
from .linalg import kron, permute_qubits_matrix

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-8


@dataclass(frozen=True)
class DensityMatrix:
    n_qubits: int
    matrix: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return 2 ** self.n_qubits

    def purity(self):
        return float(np.real(np.sum(self.matrix * self.matrix.T)))


def _projector(vec, n):
    vec = np.asarray(vec, dtype=np.complex128)
    return DensityMatrix(n, np.outer(vec, vec.conj()))


def make_generalized_ghz(n, alpha):
    """cos(alpha)|0...0> + sin(alpha)|1...1> as a density matrix."""
    if n < 2:
        raise ValueError(f"generalized GHZ needs n >= 2, got {n}")
    vec = np.zeros(2**n, dtype=np.complex128)
    vec[0] = np.cos(alpha)
    vec[-1] = np.sin(alpha)
    return _projector(vec, n)


def make_w(n):
    """Equal superposition of the n single-excitation basis states."""
    if n < 2:
        raise ValueError(f"W state needs n >= 2, got {n}")
    vec = np.zeros(2**n, dtype=np.complex128)
    for k in range(n):
        vec[1 << (n - 1 - k)] = 1.0 / np.sqrt(n)
    return _projector(vec, n)


def maximally_mixed(n):
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    d = 2**n
    return DensityMatrix(n, np.eye(d, dtype=np.complex128) / d)


def mix(components):
    """Convex combination of density matrices on the same qubit count."""
    if not components:
        raise ValueError("mix: empty component list")
    weights = [w for w, _ in components]
    if abs(sum(weights) - 1.0) > 1e-12:
        raise ValueError(f"mix: weights sum to {sum(weights)!r}, expected 1")
    n = components[0][1].n_qubits
    acc = np.zeros((2**n, 2**n), dtype=np.complex128)
    for w, rho in components:
        if rho.n_qubits != n:
            raise ValueError("mix: qubit-count mismatch between components")
        acc += w * rho.matrix
    return DensityMatrix(n, acc)


def embed_product(a, b):
    """Tensor product state on a.n_qubits + b.n_qubits qubits."""
    return DensityMatrix(a.n_qubits + b.n_qubits, kron(a.matrix, b.matrix))


def _random_qubit_vec(rng):
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return v / np.linalg.norm(v)


def random_product_state(n, seed):
    """Tensor product of n random pure single-qubit states, seed-stable."""
    rng = np.random.default_rng(seed)
    vec = np.array([1.0], dtype=np.complex128)
    for _ in range(n):
        vec = np.kron(vec, _random_qubit_vec(rng))
    return _projector(vec, n)


def random_pure_state(n, rng):
    """Haar-ish random pure n-qubit state (normalized complex Gaussian)."""
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return _projector(v / np.linalg.norm(v), n)


def random_separable_state(n, rng, max_terms=4):
    """Random convex mixture of random product pure states."""
    terms = int(rng.integers(1, max_terms + 1))
    weights = rng.random(terms)
    weights /= weights.sum()
    parts = []
    for w in weights:
        vec = np.array([1.0], dtype=np.complex128)
        for _ in range(n):
            vec = np.kron(vec, _random_qubit_vec(rng))
        parts.append((float(w), _projector(vec, n)))
    return mix(parts)


def random_mixed_state(n, rng):
    """Random test state: mixture of random pure and product states."""
    w = float(rng.random())
    return mix([(w, random_pure_state(n, rng)),
                (1.0 - w, random_separable_state(n, rng))])


def permute_qubits(rho, perm):
    """State with qubit slot r holding original qubit perm[r] (1-based)."""
    return DensityMatrix(rho.n_qubits, permute_qubits_matrix(rho.matrix, perm))


def _min_eigenvalue_estimate(mat, iters=500):
    """Smallest eigenvalue of a Hermitian unit-trace matrix.

    Power iteration on lmax*I - rho (lmax <= 1 for a would-be state), so
    no general eigensolver is touched.  Two fixed starts guard against an
    unlucky initial vector orthogonal to the extremal eigenvector.
    """
    d = mat.shape[0]
    shifted = np.eye(d) - mat
    best = -np.inf
    rng = np.random.default_rng(12345)
    for _ in range(2):
        x = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        x /= np.linalg.norm(x)
        for _ in range(iters):
            y = shifted @ x
            nrm = np.linalg.norm(y)
            if nrm < 1e-300:
                break
            x = y / nrm
        best = max(best, float(np.real(x.conj() @ shifted @ x)))
    return 1.0 - best


def validate_density(n, mat):
    """Check the DensityMatrix invariants, raising DensityValidationError."""
    herm = np.max(np.abs(mat - mat.conj().T))
    if herm > HERMITICITY_TOL:
        raise DensityValidationError(
            "hermiticity", f"hermiticity violated: max |rho - rho^dagger| = {herm:.3e}")
    tr = np.trace(mat)
    if abs(tr - 1.0) > TRACE_TOL:
        raise DensityValidationError("trace", f"trace is {tr:.12g}, expected 1")
    lo = _min_eigenvalue_estimate(mat)
    if lo < -PSD_TOL:
        raise DensityValidationError(
            "psd", f"smallest eigenvalue estimate {lo:.3e} below -{PSD_TOL}")
    return DensityMatrix(n, np.asarray(mat, dtype=np.complex128))


def save_density(rho, path):
    """Write the text format: header line then 2^n rows of re,im tokens."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"qubits {rho.n_qubits}\n")
        for row in rho.matrix:
            fh.write(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row))
            fh.write("\n")


def load_density(path):
    """Read and validate a density matrix written by save_density."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines:
        raise DensityFormatError("empty file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "qubits":
        raise DensityFormatError(f"bad header line: {lines[0]!r}")
    try:
        n = int(head[1])
    except ValueError:
        raise DensityFormatError(f"bad qubit count: {head[1]!r}") from None
    if n < 1:
        raise DensityFormatError(f"bad qubit count: {n}")
    d = 2**n
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != d:
        raise DensityFormatError(f"expected {d} matrix rows, found {len(body)}")
    mat = np.empty((d, d), dtype=np.complex128)
    for i, ln in enumerate(body):
        toks = ln.split()
        if len(toks) != d:
            raise DensityFormatError(f"row {i}: expected {d} tokens, found {len(toks)}")
        for j, tok in enumerate(toks):
            parts = tok.split(",")
            if len(parts) != 2:
                raise DensityFormatError(f"row {i} token {j}: not re,im: {tok!r}")
            try:
                mat[i, j] = complex(float(parts[0]), float(parts[1]))
            except ValueError:
                raise DensityFormatError(
                    f"row {i} token {j}: non-numeric: {tok!r}") from None
    return validate_density(n, mat)

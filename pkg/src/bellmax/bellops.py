"""Bell operators: CHSH, the recursive N!/2 family, MABK, and the Chen
one-qubit extension of MABK.

The recursive family adjoins one qubit at a time to an inner Bell
operator via (A+A')/2 and (A-A')/2 terms.  Operator index k decodes as
k = (i-1)(N-1)!/2 + j: qubit i carries the outermost extension and j
selects the inner operator on the remaining qubits.  The derived role
permutation lists, in order, the row qubit and column qubit of the
correlation-matrix slice followed by the extension qubits of levels
3..N.

Besides explicit matrices, every operator is exposed as a list of
product terms c * O_1 x ... x O_n with O_q = c0*I + (ca*a_q + cap*a_q')
. sigma; expectation values then reduce to cheap contractions against a
state's correlation tensor, which is what the numeric oracle iterates
on.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SpecParseError
from .linalg import direction_operator, kron, permute_qubits_matrix

KINDS = ("chsh", "recursive", "mabk", "chen")

UNIT_NORM_TOL = 1e-12


@dataclass(frozen=True)
class MeasurementSettings:
    """Per qubit, the pair of unit direction vectors (a_i, a_i')."""

    a: np.ndarray = field(repr=False)        # (n, 3)
    a_prime: np.ndarray = field(repr=False)  # (n, 3)

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        object.__setattr__(self, "a_prime", np.asarray(self.a_prime, dtype=float))
        if self.a.shape != self.a_prime.shape or self.a.ndim != 2 or self.a.shape[1] != 3:
            raise ValueError("settings need matching (n, 3) arrays")
        for arr in (self.a, self.a_prime):
            norms = np.linalg.norm(arr, axis=1)
            if np.max(np.abs(norms - 1.0)) > UNIT_NORM_TOL:
                raise ValueError(f"measurement directions must be unit vectors, norms {norms}")

    @property
    def n_qubits(self):
        return self.a.shape[0]


def family_size(n):
    return math.factorial(n) // 2


@dataclass(frozen=True)
class BellOperatorSpec:
    kind: str
    n_qubits: int
    k: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind == "chsh" and self.n_qubits != 2:
            raise ValueError("chsh requires exactly 2 qubits")
        if self.kind == "chen" and self.n_qubits < 3:
            raise ValueError("chen extension requires n >= 3")
        if self.kind == "recursive":
            if self.k is None or not 1 <= self.k <= family_size(self.n_qubits):
                raise ValueError(
                    f"recursive index must be in 1..{family_size(self.n_qubits)}, got {self.k!r}")

    @property
    def perm(self):
        """Role permutation (recursive family; CHSH acts as n=2, k=1)."""
        if self.kind == "recursive":
            return index_to_perm(self.n_qubits, self.k)
        if self.kind == "chsh":
            return (1, 2)
        raise ValueError(f"no role permutation for kind {self.kind!r}")


def index_to_perm(n, k):
    """Role permutation of operator k: (row, col, ext_3, ..., ext_n)."""
    if not 1 <= k <= family_size(n):
        raise ValueError(f"index must be in 1..{family_size(n)}, got {k}")

    def rec(labels, k):
        if len(labels) == 2:
            return list(labels)
        half = math.factorial(len(labels) - 1) // 2
        ext = labels[(k - 1) // half]
        j = (k - 1) % half + 1
        return rec([q for q in labels if q != ext], j) + [ext]

    return tuple(rec(list(range(1, n + 1)), k))


def perm_to_index(n, perm):
    """Inverse of index_to_perm (the first two roles may appear swapped)."""
    perm = list(perm)
    if sorted(perm) != list(range(1, n + 1)):
        raise ValueError(f"not a permutation of 1..{n}: {perm!r}")

    def rec(perm, labels):
        if len(labels) == 2:
            return 1
        half = math.factorial(len(labels) - 1) // 2
        ext = perm[-1]
        i = labels.index(ext) + 1
        j = rec(perm[:-1], [q for q in labels if q != ext])
        return (i - 1) * half + j

    return rec(perm, list(range(1, n + 1)))


# ---------------------------------------------------------------------------
# product-term expansions


def _canonical_recursive_terms(n):
    """Role-ordered product terms of the canonical (identity-perm) operator.

    Expansion of the recursion (cf. the n=3 and n=4 closed forms):
      2^-(n-1) (A1+A1') A2 prod_{m>=3}(Am+Am')
    + 2^-(n-1) (A1-A1') A2' prod_{m>=3}(Am+Am')
    + sum_{m0=3..n} 2^-(n-m0+1) I..I (Am0-Am0') prod_{m>m0}(Am+Am')
    """
    terms = []
    plus = (0.0, 1.0, 1.0)
    top = 0.5 ** (n - 1)
    terms.append((top, [(0.0, 1.0, 1.0), (0.0, 1.0, 0.0)] + [plus] * (n - 2)))
    terms.append((top, [(0.0, 1.0, -1.0), (0.0, 0.0, 1.0)] + [plus] * (n - 2)))
    for m0 in range(3, n + 1):
        ops = [(1.0, 0.0, 0.0)] * (m0 - 1) + [(0.0, 1.0, -1.0)] + [plus] * (n - m0)
        terms.append((0.5 ** (n - m0 + 1), ops))
    return terms


def mabk_weight(s):
    """MABK coefficient sqrt(2) cos((s_1+..+s_N - N + 1) pi/4)."""
    return math.sqrt(2.0) * math.cos((sum(s) - len(s) + 1) * math.pi / 4.0)


def _mabk_terms(n):
    """MABK as 2^n product terms: 2^-n sum_s S(s) prod_j (A_j + s_j A_j')."""
    terms = []
    for s in itertools.product((1, -1), repeat=n):
        w = mabk_weight(s)
        if abs(w) < 1e-15:
            continue
        terms.append((w * 0.5**n, [(0.0, 1.0, float(sj)) for sj in s]))
    return terms


def _chen_terms(n):
    terms = []
    for coeff, ops in _mabk_terms(n - 1):
        terms.append((coeff * 0.5, ops + [(0.0, 1.0, 1.0)]))
    terms.append((0.5, [(1.0, 0.0, 0.0)] * (n - 1) + [(0.0, 1.0, -1.0)]))
    return terms


def product_terms(spec):
    """Qubit-ordered product terms of the operator, role permutation applied."""
    n = spec.n_qubits
    if spec.kind in ("recursive", "chsh"):
        role_terms = _canonical_recursive_terms(n)
        perm = spec.perm
        out = []
        for coeff, ops in role_terms:
            by_qubit = [None] * n
            for role, op in enumerate(ops):
                by_qubit[perm[role] - 1] = op
            out.append((coeff, by_qubit))
        return out
    if spec.kind == "mabk":
        return _mabk_terms(n)
    if spec.kind == "chen":
        return _chen_terms(n)
    raise ValueError(f"unknown kind {spec.kind!r}")


class TermArrays:
    """Vectorized form of a product-term list for fast tensor contraction."""

    def __init__(self, spec):
        terms = product_terms(spec)
        self.n = spec.n_qubits
        self.coeffs = np.array([c for c, _ in terms])
        self.c0 = np.array([[op[0] for op in ops] for _, ops in terms])
        self.ca = np.array([[op[1] for op in ops] for _, ops in terms])
        self.cap = np.array([[op[2] for op in ops] for _, ops in terms])

    def local_vectors(self, a, a_prime):
        """Per-term, per-qubit 4-vectors (I, sigma) of the local factors."""
        u = np.empty(self.c0.shape + (4,))
        u[..., 0] = self.c0
        u[..., 1:] = self.ca[..., None] * a[None, :, :] + self.cap[..., None] * a_prime[None, :, :]
        return u

    def expectation(self, tensor_values, a, a_prime):
        """<B> for given settings, from the state's correlation tensor."""
        n = self.n
        u = self.local_vectors(a, a_prime)
        nt = self.coeffs.size
        cur = np.broadcast_to(tensor_values.reshape(1, -1), (nt, tensor_values.size)).copy()
        for q in range(n - 1, -1, -1):
            cur = np.matmul(cur.reshape(nt, -1, 4), u[:, q, :, None])[..., 0]
        return float(2**n * np.dot(self.coeffs, cur[:, 0]))

    def moved_tensors(self, tensor_values):
        """tensor_values with qubit q's axis first, flattened; one per qubit."""
        return [np.ascontiguousarray(np.moveaxis(tensor_values, q, 0).reshape(4, -1))
                for q in range(self.n)]

    def qubit_profile(self, tq_flat, u, q):
        """Affine profile of <B> in qubit q's two direction vectors.

        Contracts the tensor against every local factor except qubit q's,
        yielding (const, grad_a, grad_ap) with
        <B> = const + grad_a . a_q + grad_ap . a_q'.
        """
        n = self.n
        nt = self.coeffs.size
        others = [qq for qq in range(n) if qq != q]
        cur = np.broadcast_to(tq_flat.reshape(1, 4, -1), (nt, 4, tq_flat.shape[1])).copy()
        for idx in range(len(others) - 1, -1, -1):
            cur = np.matmul(cur.reshape(nt, -1, 4), u[:, others[idx], :, None])[..., 0]
        w = (2**n) * self.coeffs[:, None] * cur.reshape(nt, 4)
        const = float(np.dot(self.c0[:, q], w[:, 0]))
        grad_a = self.ca[:, q] @ w[:, 1:]
        grad_ap = self.cap[:, q] @ w[:, 1:]
        return const, grad_a, grad_ap


def term_matrix(spec, settings):
    """Explicit matrix built from the product-term expansion."""
    n = spec.n_qubits
    if settings.n_qubits != n:
        raise ValueError("settings qubit count does not match operator")
    eye = np.eye(2, dtype=np.complex128)
    out = np.zeros((2**n, 2**n), dtype=np.complex128)
    for coeff, ops in product_terms(spec):
        m = np.array([[1.0 + 0j]])
        for q, (c0, ca, cap) in enumerate(ops):
            local = c0 * eye + direction_operator(ca * settings.a[q] + cap * settings.a_prime[q])
            m = np.kron(m, local)
        out += coeff * m
    return out


# ---------------------------------------------------------------------------
# explicit matrix constructors


def chsh_matrix(settings):
    """B2 = [A1A2 + A1'A2 + A1A2' - A1'A2'] / 2."""
    if settings.n_qubits != 2:
        raise ValueError("CHSH needs exactly 2 qubits")
    a1 = direction_operator(settings.a[0])
    a1p = direction_operator(settings.a_prime[0])
    a2 = direction_operator(settings.a[1])
    a2p = direction_operator(settings.a_prime[1])
    return 0.5 * (kron(a1, a2) + kron(a1p, a2) + kron(a1, a2p) - kron(a1p, a2p))


def recursive_bell_matrix(spec, settings):
    """Matrix of B_n^k built by the defining recursion.

    The extension qubit's (A+A')/2 and (A-A')/2 factors land at that
    qubit's true tensor slot, not at the end of the product.
    """
    if spec.kind not in ("recursive", "chsh"):
        raise ValueError(f"recursive_bell_matrix got kind {spec.kind!r}")
    n = spec.n_qubits
    if settings.n_qubits != n:
        raise ValueError("settings qubit count does not match operator")
    k = 1 if spec.kind == "chsh" else spec.k

    def rec(labels, k):
        if len(labels) == 2:
            q1, q2 = labels
            sub = MeasurementSettings(settings.a[[q1 - 1, q2 - 1]],
                                      settings.a_prime[[q1 - 1, q2 - 1]])
            return chsh_matrix(sub)
        half = math.factorial(len(labels) - 1) // 2
        ext = labels[(k - 1) // half]
        j = (k - 1) % half + 1
        rest = [q for q in labels if q != ext]
        inner = rec(rest, j)
        a = direction_operator(settings.a[ext - 1])
        ap = direction_operator(settings.a_prime[ext - 1])
        eye = np.eye(inner.shape[0], dtype=np.complex128)
        built = kron(inner, 0.5 * (a + ap)) + kron(eye, 0.5 * (a - ap))
        # built lives on slot order rest + [ext]; restore ascending labels
        order = rest + [ext]
        perm = [order.index(lab) + 1 for lab in labels]
        return permute_qubits_matrix(built, perm)

    return rec(list(range(1, n + 1)), k)


def mabk_matrix(settings):
    """MABK operator matrix for n = settings.n_qubits."""
    spec = BellOperatorSpec("mabk", settings.n_qubits)
    return term_matrix(spec, settings)


def chen_matrix(settings, n=None):
    """Chen extension: MABK on the first n-1 qubits adjoined with qubit n."""
    if n is None:
        n = settings.n_qubits
    if n < 3:
        raise ValueError("chen extension requires n >= 3")
    spec = BellOperatorSpec("chen", n)
    return term_matrix(spec, settings)


def operator_matrix(spec, settings):
    """Dispatch to the matrix constructor for any operator kind."""
    if spec.kind == "chsh":
        return chsh_matrix(settings)
    if spec.kind == "recursive":
        return recursive_bell_matrix(spec, settings)
    if spec.kind == "mabk":
        return mabk_matrix(settings)
    if spec.kind == "chen":
        return chen_matrix(settings, spec.n_qubits)
    raise ValueError(f"unknown kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# deterministic local strategies


def classical_value(spec, outcomes_a, outcomes_ap):
    """Operator value when every observable has a fixed +-1 outcome."""
    total = 0.0
    for coeff, ops in product_terms(spec):
        prod = coeff
        for q, (c0, ca, cap) in enumerate(ops):
            prod *= c0 + ca * outcomes_a[q] + cap * outcomes_ap[q]
        total += prod
    return total


def classical_values(spec):
    """Values over all 4^n deterministic outcome assignments."""
    n = spec.n_qubits
    out = []
    for oa in itertools.product((1, -1), repeat=n):
        for op in itertools.product((1, -1), repeat=n):
            out.append(classical_value(spec, oa, op))
    return out


# ---------------------------------------------------------------------------
# operator spec strings


def parse_operator_spec(text):
    """Parse `chsh`, `recursive:N=4,k=12`, `mabk:N=3`, `chen:N=4`."""
    text = text.strip()
    if text == "chsh":
        return BellOperatorSpec("chsh", 2)
    if ":" not in text:
        raise SpecParseError(f"unknown operator spec {text!r}")
    kind, _, rest = text.partition(":")
    fields = {}
    for pos, part in enumerate(rest.split(",")):
        key, eq, val = part.partition("=")
        if not eq:
            raise SpecParseError(f"expected key=value in operator spec, got {part!r}", pos)
        fields[key.strip()] = val.strip()
    try:
        n = int(fields.pop("N"))
    except (KeyError, ValueError):
        raise SpecParseError(f"operator spec {text!r} needs integer N") from None
    if kind == "recursive":
        try:
            k = int(fields.pop("k"))
        except (KeyError, ValueError):
            raise SpecParseError(f"operator spec {text!r} needs integer k") from None
    else:
        k = None
    if fields:
        raise SpecParseError(f"unexpected fields in operator spec: {sorted(fields)}")
    if kind not in ("recursive", "mabk", "chen"):
        raise SpecParseError(f"unknown operator kind {kind!r}")
    try:
        return BellOperatorSpec(kind, n, k)
    except ValueError as exc:
        raise SpecParseError(str(exc)) from None

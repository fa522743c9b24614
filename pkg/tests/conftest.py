"""Shared oracles for the tests: deliberately naive implementations that
stay independent of the code paths they cross-check."""

import numpy as np
import pytest

from bellmax.linalg import PAULI


def kron_chain(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def pauli_word(indices):
    return kron_chain([PAULI[i] for i in indices])


def reduced_single_qubit(mat, n, q):
    """Partial-trace oracle: single-qubit reduced state of qubit q (0-based)."""
    t = mat.reshape((2,) * (2 * n))
    others = [i for i in range(n) if i != q]
    perm = [q] + others + [n + q] + [n + i for i in others]
    t = np.transpose(t, perm).reshape(2, 2 ** (n - 1), 2, 2 ** (n - 1))
    return np.einsum("aibi->ab", t)


def random_hermitian(rng, d):
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (m + m.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20260826)

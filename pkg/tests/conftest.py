"""Shared helpers: an independent dense-matrix oracle built from raw kron
products, kept separate from the package's own dense machinery."""

import numpy as np
import pytest

from hamlearn.hamiltonian import SparsePauliSum
from hamlearn.pauli import enumerate_local_paulis

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
BLOCK = {"I": I2, "X": SX, "Y": SY, "Z": SZ}

EIGVEC = {
    ("X", 1): np.array([1, 1], dtype=complex) / np.sqrt(2),
    ("X", -1): np.array([1, -1], dtype=complex) / np.sqrt(2),
    ("Y", 1): np.array([1, 1j], dtype=complex) / np.sqrt(2),
    ("Y", -1): np.array([1, -1j], dtype=complex) / np.sqrt(2),
    ("Z", 1): np.array([1, 0], dtype=complex),
    ("Z", -1): np.array([0, 1], dtype=complex),
}


def kron_pauli(label: str) -> np.ndarray:
    m = np.eye(1, dtype=complex)
    for ch in label:
        m = np.kron(m, BLOCK[ch])
    return m


def kron_sum(h: SparsePauliSum) -> np.ndarray:
    dim = 1 << h.n
    out = np.zeros((dim, dim), dtype=complex)
    for p, c in h.items():
        out += c * kron_pauli(p.label())
    return out


def kron_state(letters: str, signs) -> np.ndarray:
    """Product eigenstate; `letters` lists the most-significant qubit first."""
    v = np.ones(1, dtype=complex)
    for ch, s in zip(letters, signs):
        v = np.kron(v, EIGVEC[(ch, s)])
    return v


def random_sum(rng, n, terms, max_weight) -> SparsePauliSum:
    pool = list(enumerate_local_paulis(n, max_weight))
    picks = rng.choice(len(pool), size=min(terms, len(pool)), replace=False)
    return SparsePauliSum(n, ((pool[i], float(rng.uniform(-1, 1))) for i in picks))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

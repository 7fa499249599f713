"""Exact dense linear algebra at small qubit counts.

This module is the trusted side of every estimator test: Hamiltonian
matrices, unitary exponentials via Hermitian eigendecomposition (never
product formulas), alternating-evolution products, Pauli decompositions,
and the measurable residuals of the first-order and alternating-evolution
approximations.

Dense convention: qubit i is bit i of the basis index, so dense(P) equals
kron(letter_{n-1}, ..., letter_0).  The module-wide norm is the normalized
Frobenius norm (1/sqrt(2^n)) ||.||_F, which matches the Euclidean norm of
Pauli coefficient vectors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .errors import CapacityError, NumericalConsistencyError, ParameterError
from .hamiltonian import (
    SparsePauliSum,
    commutator_sum,
    local_norm_1,
    local_norm_2,
    pauli_as_sum,
)
from .pauli import PauliString, enumerate_local_paulis

DENSE_CAP_DEFAULT = 12
UNITARY_TOL = 1e-10


def check_capacity(n: int, cap: int = DENSE_CAP_DEFAULT) -> None:
    if n > cap:
        raise CapacityError(f"dense computation on n={n} qubits exceeds cap {cap}")


@dataclass(frozen=True, eq=False)  # identity semantics; matrices are not compared
class DenseOperator:
    """A 2^n x 2^n complex matrix tagged with its qubit count."""

    n: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        dim = 1 << self.n
        if self.matrix.shape != (dim, dim):
            raise ParameterError(f"matrix shape {self.matrix.shape} does not match n={self.n}")

    def require_unitary(self, tol: float = UNITARY_TOL) -> "DenseOperator":
        dim = self.matrix.shape[0]
        err = np.linalg.norm(self.matrix.conj().T @ self.matrix - np.eye(dim))
        if err > tol:
            raise NumericalConsistencyError(f"operator is not unitary: ||U+U - I|| = {err:.3e}")
        return self

    @staticmethod
    def identity(n: int) -> "DenseOperator":
        return DenseOperator(n, np.eye(1 << n, dtype=complex))


@dataclass(frozen=True)
class AlternatingSpec:
    """Parameters of the alternating product (e^{-iHt} e^{+iH0t})^s."""

    h: SparsePauliSum
    h0: SparsePauliSum
    t: float
    s: int

    def __post_init__(self) -> None:
        if self.h.n != self.h0.n:
            raise ParameterError("alternating spec needs equal qubit counts")
        if self.t <= 0:
            raise ParameterError("time per slice must be positive")
        if self.s < 0:
            raise ParameterError("slice count must be nonnegative")

    @property
    def n(self) -> int:
        return self.h.n


# -- dense construction -------------------------------------------------------


def dense_pauli(p: PauliString) -> np.ndarray:
    """Dense matrix of a Pauli string (exact signed permutation)."""
    check_capacity(p.n, 16)
    dim = 1 << p.n
    cols = np.arange(dim)
    rows = cols ^ p.x_mask
    # P|b> = i^{pc(x&z)} (-1)^{pc(z&b)} |b xor x>
    zb = cols & p.z_mask
    parity = np.zeros(dim, dtype=np.int64)
    v = zb.copy()
    while v.any():
        parity ^= v & 1
        v >>= 1
    vals = (1j ** ((p.x_mask & p.z_mask).bit_count())) * np.where(parity, -1.0, 1.0)
    mat = np.zeros((dim, dim), dtype=complex)
    mat[rows, cols] = vals
    return mat


def dense_hamiltonian(h: SparsePauliSum, cap: int = DENSE_CAP_DEFAULT) -> np.ndarray:
    check_capacity(h.n, cap)
    dim = 1 << h.n
    out = np.zeros((dim, dim), dtype=complex)
    for p, c in h.items():
        out += c * dense_pauli(p)
    return out


def normalized_frobenius(m: np.ndarray) -> float:
    """(1/sqrt(dim)) ||m||_F; n-independent scale matching coefficient norms."""
    return float(np.linalg.norm(m) / np.sqrt(m.shape[0]))


# -- exponentials and alternating products ------------------------------------


def expm_hermitian(h: SparsePauliSum, t: float, cap: int = DENSE_CAP_DEFAULT) -> DenseOperator:
    """e^{-iHt} via Hermitian eigendecomposition, unitary to 1e-10."""
    check_capacity(h.n, cap)
    mat = dense_hamiltonian(h, cap)
    w, v = np.linalg.eigh(mat)
    u = (v * np.exp(-1j * w * t)) @ v.conj().T
    return DenseOperator(h.n, u).require_unitary()


def alternating_unitary(spec: AlternatingSpec, cap: int = DENSE_CAP_DEFAULT) -> DenseOperator:
    """(e^{-iHt} e^{+iH0t})^s as an exact product of exponentials."""
    check_capacity(spec.n, cap)
    if spec.s == 0:
        return DenseOperator.identity(spec.n)
    factor = expm_hermitian(spec.h, spec.t, cap).matrix @ expm_hermitian(spec.h0, -spec.t, cap).matrix
    return DenseOperator(spec.n, np.linalg.matrix_power(factor, spec.s)).require_unitary()


# -- trace oracles -------------------------------------------------------------


def exact_mu(p: PauliString, z: DenseOperator, q: PauliString) -> float:
    """(1/2^n) tr(P Z Q Z+), with the imaginary residue checked then dropped."""
    if p.n != z.n or q.n != z.n:
        raise ParameterError("dimension mismatch in exact_mu")
    zq = z.matrix @ dense_pauli(q) @ z.matrix.conj().T
    val = np.trace(dense_pauli(p) @ zq) / (1 << p.n)
    if abs(val.imag) > 1e-10:
        raise NumericalConsistencyError(f"exact_mu has imaginary part {val.imag:.3e}")
    return float(val.real)


def _pauli_trace_coeff(o: np.ndarray, p: PauliString) -> complex:
    """(1/2^n) tr(o @ dense(p)) using the signed-permutation structure."""
    dim = o.shape[0]
    cols = np.arange(dim)
    zb = cols & p.z_mask
    parity = np.zeros(dim, dtype=np.int64)
    v = zb.copy()
    while v.any():
        parity ^= v & 1
        v >>= 1
    vals = (1j ** ((p.x_mask & p.z_mask).bit_count())) * np.where(parity, -1.0, 1.0)
    # (o @ P)[b, b] = o[b, b ^ x] * P[b ^ x, b] and P[b^x, b] = vals[b]
    diag = o[cols, cols ^ p.x_mask] * vals
    return complex(diag.sum() / dim)


def pauli_decompose(
    o: DenseOperator, max_weight: int, tol: float = 0.0
) -> Tuple[SparsePauliSum, float]:
    """Pauli coefficients c_Q = (1/2^n) tr(O Q) for all |supp(Q)| <= max_weight.

    Returns (sum of non-identity coefficients, identity coefficient).
    Imaginary parts above 1e-10 raise; `tol` drops small real coefficients.
    """
    n = o.n
    ident = _pauli_trace_coeff(o.matrix, PauliString.identity(n))
    terms: Dict[PauliString, float] = {}
    for q in enumerate_local_paulis(n, max_weight):
        c = _pauli_trace_coeff(o.matrix, q)
        if abs(c.imag) > 1e-10:
            raise NumericalConsistencyError(
                f"non-real Pauli coefficient {c} for {q.label()} (operator not Hermitian?)"
            )
        if abs(c.real) > tol:
            terms[q] = c.real
    if abs(ident.imag) > 1e-10:
        raise NumericalConsistencyError("non-real identity coefficient")
    return SparsePauliSum(n, terms), float(ident.real)


# -- measurable residuals ------------------------------------------------------


def first_order_residual(
    h: SparsePauliSum, x: SparsePauliSum, t: float, cap: int = DENSE_CAP_DEFAULT
) -> float:
    """Normalized Frobenius norm of e^{iHt} X e^{-iHt} - X - [iHt, X]."""
    check_capacity(h.n, cap)
    u = expm_hermitian(h, -t, cap).matrix  # e^{+iHt}
    xm = dense_hamiltonian(x, cap)
    conj = u @ xm @ u.conj().T
    # [iHt, X] = t * (i[H, X]); commutator_sum already stores i[.,.]
    lin = t * dense_hamiltonian(commutator_sum(h, x), cap)
    return normalized_frobenius(conj - xm - lin)


def first_order_bound(h: SparsePauliSum, x: SparsePauliSum, t: float) -> float:
    """(t^2/2) * normalized ||[H,[H,X]]||_F, the Hadamard-formula envelope."""
    nested = commutator_sum(h, commutator_sum(h, x))
    return 0.5 * t * t * nested.coeff_l2()


def trotter_envelope(spec: AlternatingSpec) -> float:
    """eta*s*t^2*Lambda + eta^2*s^2*t^2 with eta = ||H - H0||_2,loc and
    Lambda = max local 1-norm; the locality-dependent constant is omitted."""
    eta = local_norm_2(spec.h - spec.h0)
    lam = max(local_norm_1(spec.h), local_norm_1(spec.h0))
    st = spec.s * spec.t
    return eta * spec.s * spec.t**2 * lam + (eta * st) ** 2


def trotter_residual(
    spec: AlternatingSpec, p: PauliString, cap: int = DENSE_CAP_DEFAULT
) -> Tuple[float, float]:
    """Residual of the alternating evolution against its linear model.

    Returns (normalized ||W+ P W - P - i s t [H - H0, P]||_F, envelope)
    where W = (e^{-iHt} e^{+iH0t})^s.
    """
    check_capacity(spec.n, cap)
    if p.n != spec.n:
        raise ParameterError("pauli and spec qubit counts differ")
    w = alternating_unitary(spec, cap).matrix
    pm = dense_pauli(p)
    conj = w.conj().T @ pm @ w
    lin = spec.s * spec.t * dense_hamiltonian(commutator_sum(spec.h - spec.h0, pauli_as_sum(p)), cap)
    return normalized_frobenius(conj - pm - lin), trotter_envelope(spec)


def hadamard_partial_sum(
    h: SparsePauliSum, x: SparsePauliSum, t: float, order: int, cap: int = DENSE_CAP_DEFAULT
) -> np.ndarray:
    """Dense partial sum sum_{k<=order} [iHt, X]_k / k! of the Hadamard series."""
    check_capacity(h.n, cap)
    total = dense_hamiltonian(x, cap)
    term = x
    fact = 1.0
    for k in range(1, order + 1):
        term = commutator_sum(h, term)  # one factor of i per level
        fact *= k
        total = total + (t**k / fact) * dense_hamiltonian(term, cap)
    return total

"""Bit-packed n-qubit Pauli strings and their exact algebra.

A Pauli string is encoded by two integer masks (x_mask, z_mask); qubit i
carries the letter given by the bit pair (x_i, z_i):

    (0,0) = I,  (1,0) = X,  (1,1) = Y,  (0,1) = Z.

Qubit i corresponds to bit i of both masks and to bit i of a dense basis
index (little-endian).  Text labels list the most-significant qubit first,
so "XZI" on three qubits puts X on qubit 2, Z on qubit 1, I on qubit 0.

Products and commutators are computed with XOR and popcount only; phases
are tracked as powers of i mod 4.  Single-qubit convention: X*Y = i*Z and
cyclically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, Optional, Sequence, Tuple

from .errors import DimensionMismatchError, ParameterError

MAX_QUBITS = 16

_LETTERS = "IXYZ"
# letter index = x + 2*z, i.e. I=0, X=1, Z=2, Y=3 internally; the public
# letter() method returns the character instead.
_XZ_FROM_LETTER = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_LETTER_FROM_XZ = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


class Phase(IntEnum):
    """A power of i mod 4: the global phase of a Pauli product."""

    PLUS_ONE = 0
    PLUS_I = 1
    MINUS_ONE = 2
    MINUS_I = 3

    def __mul__(self, other: "Phase") -> "Phase":  # type: ignore[override]
        return Phase((int(self) + int(other)) % 4)

    __rmul__ = __mul__

    @property
    def complex_value(self) -> complex:
        return (1, 1j, -1, -1j)[int(self)]

    @property
    def is_real(self) -> bool:
        return int(self) % 2 == 0


@dataclass(frozen=True, order=False)
class PauliString:
    """An n-qubit Pauli word, bit-packed as (x_mask, z_mask)."""

    n: int
    x_mask: int
    z_mask: int

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_QUBITS:
            raise ParameterError(f"qubit count must be in [1, {MAX_QUBITS}], got {self.n}")
        full = (1 << self.n) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ParameterError("mask has bits set at positions >= n")

    # -- basic structure ------------------------------------------------

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def support(self) -> Tuple[int, ...]:
        m = self.x_mask | self.z_mask
        return tuple(i for i in range(self.n) if (m >> i) & 1)

    @property
    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    def letter(self, qubit: int) -> str:
        x = (self.x_mask >> qubit) & 1
        z = (self.z_mask >> qubit) & 1
        return _LETTER_FROM_XZ[(x, z)]

    def sort_key(self) -> Tuple[int, int]:
        """Canonical total order used everywhere downstream."""
        return (self.z_mask, self.x_mask)

    def __lt__(self, other: "PauliString") -> bool:
        return self.sort_key() < other.sort_key()

    # -- text format -----------------------------------------------------

    def label(self) -> str:
        return "".join(self.letter(q) for q in range(self.n - 1, -1, -1))

    @staticmethod
    def from_label(label: str) -> "PauliString":
        n = len(label)
        x_mask = z_mask = 0
        for pos, ch in enumerate(label.upper()):
            try:
                x, z = _XZ_FROM_LETTER[ch]
            except KeyError:
                raise ParameterError(f"invalid Pauli letter {ch!r} in {label!r}") from None
            qubit = n - 1 - pos
            x_mask |= x << qubit
            z_mask |= z << qubit
        return PauliString(n, x_mask, z_mask)

    @staticmethod
    def identity(n: int) -> "PauliString":
        return PauliString(n, 0, 0)

    @staticmethod
    def single(n: int, qubit: int, letter: str) -> "PauliString":
        """The Pauli acting as `letter` on one qubit and I elsewhere."""
        if not 0 <= qubit < n:
            raise ParameterError(f"qubit {qubit} out of range for n={n}")
        x, z = _XZ_FROM_LETTER[letter.upper()]
        if x == 0 and z == 0:
            raise ParameterError("single() requires a non-identity letter")
        return PauliString(n, x << qubit, z << qubit)

    @staticmethod
    def from_letters(n: int, letters: Sequence[Tuple[int, str]]) -> "PauliString":
        x_mask = z_mask = 0
        for qubit, ch in letters:
            x, z = _XZ_FROM_LETTER[ch.upper()]
            x_mask |= x << qubit
            z_mask |= z << qubit
        return PauliString(n, x_mask, z_mask)

    def __repr__(self) -> str:
        return f"PauliString({self.label()!r})"


def _check_same_n(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise DimensionMismatchError(f"qubit counts differ: {p.n} vs {q.n}")


def mul(p: PauliString, q: PauliString) -> Tuple[Phase, PauliString]:
    """Product of two Pauli strings: dense(p) @ dense(q) == phase * dense(r)."""
    _check_same_n(p, q)
    x3 = p.x_mask ^ q.x_mask
    z3 = p.z_mask ^ q.z_mask
    # Exponent of i from the per-qubit identity P(x,z) = i^{xz} X^x Z^z.
    e = (
        (p.x_mask & p.z_mask).bit_count()
        + (q.x_mask & q.z_mask).bit_count()
        - (x3 & z3).bit_count()
        + 2 * (p.z_mask & q.x_mask).bit_count()
    ) % 4
    return Phase(e), PauliString(p.n, x3, z3)


def commutes(p: PauliString, q: PauliString) -> bool:
    """True iff the number of anticommuting qubit positions is even."""
    _check_same_n(p, q)
    return ((p.x_mask & q.z_mask).bit_count() + (p.z_mask & q.x_mask).bit_count()) % 2 == 0


def commutator(p: PauliString, q: PauliString) -> Optional[Tuple[Phase, PauliString]]:
    """[p, q] = 2 * phase * r when p, q anticommute; None when they commute.

    The factor 2 is implicit in the return value: dense([p,q]) equals
    2 * phase.complex_value * dense(r).
    """
    if commutes(p, q):
        return None
    return mul(p, q)


def subset(p: PauliString, q: PauliString) -> bool:
    """True iff every qubit of p is identity or matches q's letter there."""
    _check_same_n(p, q)
    sup = p.x_mask | p.z_mask
    return (p.x_mask == (q.x_mask & sup)) and (p.z_mask == (q.z_mask & sup))


@dataclass(frozen=True)
class EigenPrep:
    """A product Pauli eigenstate: per-qubit basis letters with signs.

    `basis` is a full-weight Pauli word (every qubit in {X, Y, Z});
    `signs[i]` is the eigenvalue of basis letter i on the prepared state.
    """

    basis: PauliString
    signs: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.basis.weight != self.basis.n:
            raise ParameterError("eigenprep basis must act on every qubit")
        if len(self.signs) != self.basis.n:
            raise DimensionMismatchError("signs length must equal qubit count")
        if any(s not in (-1, 1) for s in self.signs):
            raise ParameterError("signs must be +1 or -1")

    @property
    def n(self) -> int:
        return self.basis.n


def eig_expect(prep: EigenPrep, q: PauliString) -> float:
    """<A,v| q |A,v> = v^{supp(q)} when q is a subword of the basis, else 0."""
    if prep.n != q.n:
        raise DimensionMismatchError(f"qubit counts differ: {prep.n} vs {q.n}")
    if not subset(q, prep.basis):
        return 0.0
    out = 1
    for i in q.support():
        out *= prep.signs[i]
    return float(out)


def enumerate_local_paulis(
    n: int, max_weight: int, include_identity: bool = False
) -> Iterator[PauliString]:
    """All Pauli strings with support size <= max_weight, in a fixed order.

    Order: weight ascending, support lexicographic, letters X < Y < Z per
    qubit (the enumeration order used by the structure learner).
    """
    if include_identity:
        yield PauliString.identity(n)
    for w in range(1, min(max_weight, n) + 1):
        for sup in itertools.combinations(range(n), w):
            for letters in itertools.product("XYZ", repeat=w):
                yield PauliString.from_letters(n, list(zip(sup, letters)))

"""The simulated quantum device.

Executes prepare-evolve-measure circuits C(A, v, B, Z) by dense state-vector
simulation, where Z is the alternating product (e^{-iHt} e^{+iH0t})^s built
from the device's hidden Hamiltonian H and a caller-supplied known H0.  The
caller never touches H directly.

Every batch is sampled exactly: the full 2^n outcome distribution in the
measurement basis is computed per shot, then inverse-CDF sampled.  Optional
SPAM noise mixes the ideal outcome distribution with uniform random
outcomes at total-variation weight `spam_tv`.

The device meters every resource the learner's guarantees are stated in:
total evolution time (s*t per circuit), the smallest applied slice t, and
the experiment count.
"""

from __future__ import annotations

import json
import threading
import weakref
from collections import OrderedDict
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .errors import ParameterError
from .evolution import AlternatingSpec, DenseOperator, alternating_unitary
from .hamiltonian import SparsePauliSum
from .pauli import EigenPrep

# basis letter codes used in all device arrays
CODE_X, CODE_Y, CODE_Z = 1, 2, 3
_CODE_FROM_LETTER = {"X": CODE_X, "Y": CODE_Y, "Z": CODE_Z}
_LETTER_FROM_CODE = {CODE_X: "X", CODE_Y: "Y", CODE_Z: "Z"}

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
# +1/-1 eigenvectors of X, Y, Z as columns indexed [letter-1][sign01]
_PREP_VECS = np.array(
    [
        [[_INV_SQRT2, _INV_SQRT2], [_INV_SQRT2, -_INV_SQRT2]],
        [[_INV_SQRT2, 1j * _INV_SQRT2], [_INV_SQRT2, -1j * _INV_SQRT2]],
        [[1.0, 0.0], [0.0, 1.0]],
    ],
    dtype=np.complex64,
)
# rotations mapping the +1/-1 eigenbasis of each letter onto |0>, |1>
_MEAS_ROTS = np.array(
    [
        [[_INV_SQRT2, _INV_SQRT2], [_INV_SQRT2, -_INV_SQRT2]],  # H
        [[_INV_SQRT2, -1j * _INV_SQRT2], [_INV_SQRT2, 1j * _INV_SQRT2]],  # H S+
        [[1.0, 0.0], [0.0, 1.0]],
    ],
    dtype=np.complex64,
)

_MAX_BATCH_ELEMENTS = 1 << 23  # complex64 elements per internal chunk


@dataclass
class ResourceLedger:
    """Accumulated cost of everything the device has executed."""

    total_evolution_time: float = 0.0
    min_applied_t: float = float("inf")
    experiment_count: int = 0

    def merge(self, other: "ResourceLedger") -> None:
        self.total_evolution_time += other.total_evolution_time
        self.min_applied_t = min(self.min_applied_t, other.min_applied_t)
        self.experiment_count += other.experiment_count

    def copy(self) -> "ResourceLedger":
        return replace(self)

    def to_json_dict(self) -> dict:
        return {
            "total_evolution_time": self.total_evolution_time,
            "min_applied_t": None if self.min_applied_t == float("inf") else self.min_applied_t,
            "experiment_count": self.experiment_count,
        }


@dataclass(frozen=True)
class EvolutionRequest:
    """What a caller may ask of the device: alternate its hidden H against
    a known H0, for s slices of duration t each."""

    h0: SparsePauliSum
    t: float
    s: int

    def __post_init__(self) -> None:
        if self.t <= 0:
            raise ParameterError("evolution slice time must be positive")
        if self.s < 0:
            raise ParameterError("slice count must be nonnegative")


@dataclass(frozen=True)
class ShotRecord:
    """One executed circuit: preparation, measurement basis, and outcome."""

    prep: EigenPrep
    meas_basis: Tuple[str, ...]
    outcome: Tuple[int, ...]


@dataclass(frozen=True)
class DeviceConfig:
    hidden_h: SparsePauliSum
    rng_seed: int = 0
    spam_tv: float = 0.0
    dense_cap: int = 12

    def __post_init__(self) -> None:
        if not 0.0 <= self.spam_tv < 1.0:
            raise ParameterError("spam_tv must lie in [0, 1)")


def _h_digest(h: SparsePauliSum) -> tuple:
    return (h.n,) + tuple((p.z_mask, p.x_mask, c) for p, c in h.items())


class SimulatedDevice:
    """Black-box access to e^{-iHt} for a hidden H, with metering.

    Shot randomness derives from one master seed; each batch call consumes
    the next child stream, so identical seeds and call sequences reproduce
    identical ShotRecord streams bit-for-bit.  The ledger is the only
    shared mutable state and is updated under a lock.
    """

    def __init__(self, config: DeviceConfig):
        self.config = config
        self.n = config.hidden_h.n
        self._seed_seq = np.random.SeedSequence(config.rng_seed)
        self._ledger = ResourceLedger()
        self._lock = threading.Lock()
        self._zcache: OrderedDict[tuple, np.ndarray] = OrderedDict()
        self._povm_validated: "weakref.WeakSet[DenseOperator]" = weakref.WeakSet()

    # -- randomness -------------------------------------------------------

    def child_rng(self) -> np.random.Generator:
        """Next deterministic child stream (also used by dataset builders)."""
        with self._lock:
            child = self._seed_seq.spawn(1)[0]
        return np.random.default_rng(child)

    # -- ledger -----------------------------------------------------------

    def snapshot_ledger(self) -> ResourceLedger:
        with self._lock:
            return self._ledger.copy()

    def _charge(self, shots: int, t: float, s: int) -> None:
        with self._lock:
            self._ledger.experiment_count += shots
            if s >= 1:
                self._ledger.total_evolution_time += shots * s * t
                self._ledger.min_applied_t = min(self._ledger.min_applied_t, t)

    def merge_ledger(self, sub: ResourceLedger) -> None:
        """Atomic merge point for per-worker sub-ledgers."""
        with self._lock:
            self._ledger.merge(sub)

    # -- evolution cache ----------------------------------------------------

    def _unitary_for(self, request: EvolutionRequest) -> np.ndarray:
        if request.h0.n != self.n:
            raise ParameterError("request H0 must match the device qubit count")
        key = (_h_digest(request.h0), request.t, request.s)
        with self._lock:
            cached = self._zcache.get(key)
            if cached is not None:
                self._zcache.move_to_end(key)
                return cached
        spec = AlternatingSpec(self.config.hidden_h, request.h0, request.t, request.s)
        z = alternating_unitary(spec, cap=self.config.dense_cap).matrix.astype(np.complex64)
        with self._lock:
            self._zcache[key] = z
            while len(self._zcache) > 8:
                self._zcache.popitem(last=False)
        return z

    # -- batch execution ----------------------------------------------------

    def run_circuit_batch(
        self,
        prep_letters: np.ndarray,
        prep_signs: np.ndarray,
        meas_letters: np.ndarray,
        request: EvolutionRequest,
    ) -> np.ndarray:
        """Execute one circuit per row and return outcomes w in {-1, +1}.

        prep_letters, meas_letters: (shots, n) arrays of codes 1..3;
        prep_signs: (shots, n) array of +/-1.
        """
        prep_letters = np.asarray(prep_letters, dtype=np.int8)
        prep_signs = np.asarray(prep_signs, dtype=np.int8)
        meas_letters = np.asarray(meas_letters, dtype=np.int8)
        shots = prep_letters.shape[0]
        if prep_letters.shape != (shots, self.n) or meas_letters.shape != (shots, self.n):
            raise ParameterError("batch arrays must have shape (shots, n)")
        z = self._unitary_for(request)
        rng = self.child_rng()
        out = np.empty((shots, self.n), dtype=np.int8)
        chunk = max(1, _MAX_BATCH_ELEMENTS // (1 << self.n))
        for lo in range(0, shots, chunk):
            hi = min(shots, lo + chunk)
            out[lo:hi] = self._run_chunk(
                prep_letters[lo:hi], prep_signs[lo:hi], meas_letters[lo:hi], z, rng
            )
        self._charge(shots, request.t, request.s)
        return out

    def _prepare_states(self, letters: np.ndarray, signs: np.ndarray) -> np.ndarray:
        shots = letters.shape[0]
        state = np.ones((shots, 1), dtype=np.complex64)
        sign01 = (1 - signs) // 2  # +1 -> 0, -1 -> 1
        for q in range(self.n - 1, -1, -1):
            vecs = _PREP_VECS[letters[:, q] - 1, sign01[:, q]]  # (shots, 2)
            state = (state[:, :, None] * vecs[:, None, :]).reshape(shots, -1)
        return state

    def _run_chunk(
        self,
        prep_letters: np.ndarray,
        prep_signs: np.ndarray,
        meas_letters: np.ndarray,
        z: np.ndarray,
        rng: np.random.Generator,
    ) -> np.ndarray:
        shots = prep_letters.shape[0]
        dim = 1 << self.n
        state = self._prepare_states(prep_letters, prep_signs) @ z.T
        inv = np.complex64(_INV_SQRT2)
        for q in range(self.n):
            low, high = 1 << q, dim >> (q + 1)
            view = state.reshape(shots, high, 2, low)
            # rotate into the measurement basis; Z-basis shots need nothing
            mx = meas_letters[:, q] == CODE_X
            if mx.any():
                x0, x1 = view[mx, :, 0, :], view[mx, :, 1, :]
                view[mx, :, 0, :] = (x0 + x1) * inv
                view[mx, :, 1, :] = (x0 - x1) * inv
            my = meas_letters[:, q] == CODE_Y
            if my.any():
                x0, x1j = view[my, :, 0, :], 1j * view[my, :, 1, :]
                view[my, :, 0, :] = (x0 - x1j) * inv
                view[my, :, 1, :] = (x0 + x1j) * inv
        probs = np.abs(state) ** 2
        np.cumsum(probs, axis=1, out=probs)
        u = rng.random(shots, dtype=np.float32) * probs[:, -1]
        idx = np.minimum((probs < u[:, None]).sum(axis=1), dim - 1)
        bits = (idx[:, None] >> np.arange(self.n)[None, :]) & 1
        w = (1 - 2 * bits).astype(np.int8)
        if self.config.spam_tv > 0.0:
            hit = rng.random(shots) < self.config.spam_tv
            flips = rng.integers(0, 2, size=(shots, self.n))
            w = np.where(hit[:, None], (1 - 2 * flips).astype(np.int8), w)
        return w

    # -- single-shot interface ------------------------------------------------

    def run_circuit(
        self, prep: EigenPrep, meas_basis: Tuple[str, ...], request: EvolutionRequest
    ) -> ShotRecord:
        """Run C(A, v, B, Z) once; see run_circuit_batch for the fast path."""
        if prep.n != self.n or len(meas_basis) != self.n:
            raise ParameterError("prep/basis qubit counts must match the device")
        letters = np.array([[_CODE_FROM_LETTER[prep.basis.letter(q)] for q in range(self.n)]])
        signs = np.array([list(prep.signs)], dtype=np.int8)
        meas = np.array([[_CODE_FROM_LETTER[b.upper()] for b in meas_basis]], dtype=np.int8)
        w = self.run_circuit_batch(letters, signs, meas, request)[0]
        return ShotRecord(prep=prep, meas_basis=tuple(b.upper() for b in meas_basis), outcome=tuple(int(v) for v in w))

    # -- POVM access ------------------------------------------------------------

    def _validate_povm(self, o: DenseOperator) -> None:
        if o in self._povm_validated:
            return
        norm = float(np.max(np.abs(np.linalg.eigvalsh(o.matrix))))
        if norm > 1.0 + 1e-9:
            raise ParameterError(f"POVM observable must have operator norm <= 1, got {norm:.6f}")
        self._povm_validated.add(o)

    def run_povm_batch(
        self, prep_letters: np.ndarray, prep_signs: np.ndarray, o: DenseOperator
    ) -> np.ndarray:
        """Measure {(I+O)/2, (I-O)/2} on each prepared product state."""
        if o.n != self.n:
            raise ParameterError("observable qubit count must match the device")
        self._validate_povm(o)
        prep_letters = np.asarray(prep_letters, dtype=np.int8)
        prep_signs = np.asarray(prep_signs, dtype=np.int8)
        shots = prep_letters.shape[0]
        om = o.matrix.astype(np.complex64)
        rng = self.child_rng()
        out = np.empty(shots, dtype=np.int8)
        chunk = max(1, _MAX_BATCH_ELEMENTS // (1 << self.n))
        for lo in range(0, shots, chunk):
            hi = min(shots, lo + chunk)
            psi = self._prepare_states(prep_letters[lo:hi], prep_signs[lo:hi])
            vals = np.einsum("sd,sd->s", psi.conj(), psi @ om.T).real
            p_plus = np.clip((1.0 + vals) / 2.0, 0.0, 1.0)
            draws = rng.random(hi - lo)
            out[lo:hi] = np.where(draws < p_plus, 1, -1)
        self._charge(shots, t=1.0, s=0)  # experiments counted; no evolution time
        return out

    def run_povm(self, prep: EigenPrep, o: DenseOperator) -> int:
        letters = np.array([[_CODE_FROM_LETTER[prep.basis.letter(q)] for q in range(self.n)]])
        signs = np.array([list(prep.signs)], dtype=np.int8)
        return int(self.run_povm_batch(letters, signs, o)[0])


# -- shot archive (JSON-lines) ----------------------------------------------


def _codes_to_word(codes: np.ndarray) -> str:
    # most-significant qubit first, matching PauliString labels
    return "".join(_LETTER_FROM_CODE[int(c)] for c in codes[::-1])


def _word_to_codes(word: str) -> np.ndarray:
    return np.array([_CODE_FROM_LETTER[ch] for ch in word[::-1]], dtype=np.int8)


def write_shot_archive(
    path: str,
    prep_letters: np.ndarray,
    prep_signs: np.ndarray,
    meas_letters: np.ndarray,
    outcomes: np.ndarray,
    meta: Optional[dict] = None,
) -> None:
    with open(path, "w") as f:
        f.write(json.dumps({"meta": meta or {}}) + "\n")
        for a, v, b, w in zip(prep_letters, prep_signs, meas_letters, outcomes):
            rec = {
                "A": _codes_to_word(a),
                "v": [int(x) for x in v],
                "B": _codes_to_word(b),
                "w": [int(x) for x in w],
            }
            f.write(json.dumps(rec) + "\n")


def read_shot_archive(path: str):
    """Returns (prep_letters, prep_signs, meas_letters, outcomes, meta)."""
    with open(path) as f:
        header = json.loads(f.readline())
        rows = [json.loads(line) for line in f if line.strip()]
    if not rows:
        raise ParameterError(f"shot archive {path} contains no records")
    a = np.stack([_word_to_codes(r["A"]) for r in rows])
    v = np.array([r["v"] for r in rows], dtype=np.int8)
    b = np.stack([_word_to_codes(r["B"]) for r in rows])
    w = np.array([r["w"] for r in rows], dtype=np.int8)
    return a, v, b, w, header.get("meta", {})

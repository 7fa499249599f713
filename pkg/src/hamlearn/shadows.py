"""Classical shadows for operators.

Builds a dataset of randomized prepare-evolve-measure shots and answers
queries for (1/2^n) tr(P Z X Z+) with X the prepared-side Pauli and P the
measured-side Pauli, both of small support.  The single-shot estimator is

    (3v)^supp(X) * (3w)^supp(P) * [X subword of A and P subword of B],

whose mean over the dataset is unbiased for the target trace.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import device as dev
from .device import EvolutionRequest, SimulatedDevice
from .errors import ParameterError, QueryWeightError
from .pauli import PauliString

_CODE_FROM_LETTER = dev._CODE_FROM_LETTER


@dataclass(frozen=True)
class ShadowParams:
    k: int
    k_prime: int
    eps: float
    delta: float
    scale: float
    shots: int


@dataclass(frozen=True)
class ShadowDataset:
    """Immutable measurement archive: one row per shot."""

    n: int
    prep_letters: np.ndarray  # (S, n) codes 1..3
    prep_signs: np.ndarray  # (S, n) +/-1
    meas_letters: np.ndarray  # (S, n) codes 1..3
    outcomes: np.ndarray  # (S, n) +/-1
    params: ShadowParams

    def __len__(self) -> int:
        return self.params.shots


def shadow_shot_count(n: int, k: int, k_prime: int, eps: float, delta: float, scale: float) -> int:
    """S = ceil(scale * 2 * 3^{2(k+k')} / eps^2 * ln(2 n^{k+k'} / delta)).

    The leading constant and log argument come from the Hoeffding step with
    estimator bound 3^{k+k'} and a union bound over n^{k+k'} query pairs;
    `scale` is the desk-scale multiplier.
    """
    if not (0 < eps < 1 and 0 < delta < 1):
        raise ParameterError("eps and delta must lie in (0, 1)")
    if scale <= 0:
        raise ParameterError("scale must be positive")
    if k < 0 or k_prime < 0:
        raise ParameterError("locality parameters must be nonnegative")
    full = 2.0 * 3.0 ** (2 * (k + k_prime)) / eps**2 * math.log(2.0 * n ** (k + k_prime) / delta)
    return max(1, math.ceil(scale * full))


def build_shadow_dataset(
    device: SimulatedDevice,
    request: EvolutionRequest,
    k: int,
    k_prime: int,
    eps: float,
    delta: float,
    scale: float = 1.0,
) -> ShadowDataset:
    """Sample S shots with uniform (A, v) and uniform B per shot."""
    n = device.n
    shots = shadow_shot_count(n, k, k_prime, eps, delta, scale)
    rng = device.child_rng()
    prep_letters = rng.integers(1, 4, size=(shots, n), dtype=np.int8)
    prep_signs = (1 - 2 * rng.integers(0, 2, size=(shots, n), dtype=np.int8)).astype(np.int8)
    meas_letters = rng.integers(1, 4, size=(shots, n), dtype=np.int8)
    outcomes = device.run_circuit_batch(prep_letters, prep_signs, meas_letters, request)
    params = ShadowParams(k=k, k_prime=k_prime, eps=eps, delta=delta, scale=scale, shots=shots)
    return ShadowDataset(n, prep_letters, prep_signs, meas_letters, outcomes, params)


def _support_codes(p: PauliString) -> Tuple[np.ndarray, np.ndarray]:
    sup = np.array(p.support(), dtype=np.int64)
    codes = np.array([_CODE_FROM_LETTER[p.letter(int(q))] for q in sup], dtype=np.int8)
    return sup, codes


def _masked_estimator(
    x: PauliString,
    p: PauliString,
    prep_letters: np.ndarray,
    prep_signs: np.ndarray,
    meas_letters: np.ndarray,
    outcomes: np.ndarray,
) -> np.ndarray:
    """Per-shot estimator values (already including the 3^{|X|+|P|} factor)."""
    sup_x, codes_x = _support_codes(x)
    sup_p, codes_p = _support_codes(p)
    shots = prep_letters.shape[0]
    keep = np.ones(shots, dtype=bool)
    if sup_x.size:
        keep &= (prep_letters[:, sup_x] == codes_x).all(axis=1)
    if sup_p.size:
        keep &= (meas_letters[:, sup_p] == codes_p).all(axis=1)
    vals = np.zeros(shots, dtype=np.float64)
    if not keep.any():
        return vals
    prod = np.ones(keep.sum(), dtype=np.float64)
    if sup_x.size:
        prod *= prep_signs[np.ix_(keep.nonzero()[0], sup_x)].prod(axis=1)
    if sup_p.size:
        prod *= outcomes[np.ix_(keep.nonzero()[0], sup_p)].prod(axis=1)
    vals[keep] = prod * 3.0 ** (len(sup_x) + len(sup_p))
    return vals


def shadow_query(ds: ShadowDataset, x: PauliString, p: PauliString) -> float:
    """Mean estimator for (1/2^n) tr(P Z X Z+); deterministic given the dataset."""
    if x.n != ds.n or p.n != ds.n:
        raise ParameterError("query Paulis must match the dataset qubit count")
    if x.weight > ds.params.k:
        raise QueryWeightError(f"|supp(X)| = {x.weight} exceeds dataset k = {ds.params.k}")
    if p.weight > ds.params.k_prime:
        raise QueryWeightError(f"|supp(P)| = {p.weight} exceeds dataset k' = {ds.params.k_prime}")
    vals = _masked_estimator(x, p, ds.prep_letters, ds.prep_signs, ds.meas_letters, ds.outcomes)
    return float(vals.mean())


# -- persistence ---------------------------------------------------------------


def save_shadow_dataset(ds: ShadowDataset, path: str) -> None:
    meta = {
        "kind": "shadow",
        "n": ds.n,
        "params": {
            "k": ds.params.k,
            "k_prime": ds.params.k_prime,
            "eps": ds.params.eps,
            "delta": ds.params.delta,
            "scale": ds.params.scale,
            "shots": ds.params.shots,
        },
    }
    dev.write_shot_archive(path, ds.prep_letters, ds.prep_signs, ds.meas_letters, ds.outcomes, meta)


def load_shadow_dataset(path: str) -> ShadowDataset:
    a, v, b, w, meta = dev.read_shot_archive(path)
    if meta.get("kind") != "shadow":
        raise ParameterError(f"{path} is not a shadow dataset archive")
    pr = meta["params"]
    params = ShadowParams(
        k=int(pr["k"]),
        k_prime=int(pr["k_prime"]),
        eps=float(pr["eps"]),
        delta=float(pr["delta"]),
        scale=float(pr["scale"]),
        shots=int(pr["shots"]),
    )
    if params.shots != a.shape[0]:
        raise ParameterError("archive shot count disagrees with its params header")
    return ShadowDataset(int(meta["n"]), a, v, b, w, params)

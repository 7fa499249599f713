"""Goldreich-Levin-style weight queries on the Pauli spectrum of Z+ P Z.

The dataset couples an outer layer of randomness (a random qubit partition
T_k with a fixed eigenstate on T_k) with an inner layer (fresh eigenstates
on the complement, fresh measurement bases).  A query for (X, P) averages
the shadow estimator over each partition's inner shots, zeroing partitions
that touch supp(X), and passes when enough partitions show signal:

    Pass  iff  fraction of k with |mu_k| > 0.1*gamma/sqrt(6)^k_loc
          exceeds 1/(3 * 54^k_loc).

The same outer/inner construction with POVM access to an observable O
yields an estimator of sum_{Q superset X} c_Q^2 / 6^{|supp Q|}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import device as dev
from .device import EvolutionRequest, SimulatedDevice
from .errors import ParameterError, QueryWeightError
from .evolution import DenseOperator
from .pauli import PauliString
from .shadows import _masked_estimator, _support_codes

# Chernoff constant separating exceedance rates 0.2*54^-k (fail) from
# 0.5*54^-k (pass) at the decision threshold 1/3*54^-k.
CHERNOFF_P_CONSTANT = 36.0


@dataclass(frozen=True)
class GLParams:
    k_loc: int
    gamma: float
    delta: float
    scale: float
    partitions: int  # p
    inner_shots: int  # q


@dataclass(frozen=True)
class GLVerdict:
    value: str  # "Pass" | "Fail"
    statistic: float  # fraction of partitions whose |mu_k| exceeded the bar

    @property
    def passed(self) -> bool:
        return self.value == "Pass"


@dataclass(frozen=True)
class GLDataset:
    """p partitions, q inner shots each; rows ordered partition-major."""

    n: int
    partition_masks: np.ndarray  # (p, n) bool, True where qubit is in T_k
    prep_letters: np.ndarray  # (p*q, n)
    prep_signs: np.ndarray  # (p*q, n)
    meas_letters: np.ndarray  # (p*q, n)
    outcomes: np.ndarray  # (p*q, n)
    params: GLParams


def gl_full_inner_shots(k_loc: int, gamma: float) -> int:
    """Least q with 2 exp(-q g^2 / (10000 * 6^k * 2 * 3^{2(k+1)})) <= 1/(100 * 54^k)."""
    denom = 10000.0 * 6.0**k_loc * 2.0 * 3.0 ** (2 * (k_loc + 1))
    return math.ceil(denom / gamma**2 * math.log(200.0 * 54.0**k_loc))


def gl_shot_plan(
    n: int,
    k_loc: int,
    gamma: float,
    delta: float,
    scale: float,
    p_constant: float = CHERNOFF_P_CONSTANT,
) -> Tuple[int, int]:
    """Desk-scaled (p, q); at scale = 1 and the default p_constant these
    are the proof-display values.  p_constant is exposed because the
    partition count's Chernoff constant is not pinned by theory."""
    if gamma <= 0 or not 0 < delta < 1:
        raise ParameterError("gamma must be positive and delta in (0, 1)")
    if scale <= 0 or p_constant <= 0:
        raise ParameterError("scale and p_constant must be positive")
    p_full = p_constant * 54.0**k_loc * math.log(n ** (k_loc + 1) / delta)
    p = max(1, math.ceil(scale * p_full))
    q = max(1, math.ceil(scale * gl_full_inner_shots(k_loc, gamma)))
    return p, q


def exceedance_threshold(k_loc: int, gamma: float) -> float:
    return 0.1 * gamma / math.sqrt(6.0) ** k_loc


def pass_fraction_threshold(k_loc: int) -> float:
    return 1.0 / (3.0 * 54.0**k_loc)


def _sample_partitioned_preps(rng: np.random.Generator, n: int, p: int, q: int):
    """Partitions, outer preps fixed per partition, fresh inner preps per shot."""
    masks = rng.integers(0, 2, size=(p, n)).astype(bool)
    outer_letters = rng.integers(1, 4, size=(p, n), dtype=np.int8)
    outer_signs = (1 - 2 * rng.integers(0, 2, size=(p, n), dtype=np.int8)).astype(np.int8)
    inner_letters = rng.integers(1, 4, size=(p, q, n), dtype=np.int8)
    inner_signs = (1 - 2 * rng.integers(0, 2, size=(p, q, n), dtype=np.int8)).astype(np.int8)
    tile = np.broadcast_to(masks[:, None, :], (p, q, n))
    letters = np.where(tile, np.broadcast_to(outer_letters[:, None, :], (p, q, n)), inner_letters)
    signs = np.where(tile, np.broadcast_to(outer_signs[:, None, :], (p, q, n)), inner_signs)
    return masks, letters.reshape(p * q, n), signs.reshape(p * q, n)


def build_gl_dataset(
    device: SimulatedDevice,
    request: EvolutionRequest,
    k_loc: int,
    gamma: float,
    delta: float,
    scale: float = 1.0,
    p_constant: float = CHERNOFF_P_CONSTANT,
) -> GLDataset:
    """Sample the partitioned dataset; the ledger is charged p*q experiments."""
    n = device.n
    p, q = gl_shot_plan(n, k_loc, gamma, delta, scale, p_constant)
    rng = device.child_rng()
    masks, letters, signs = _sample_partitioned_preps(rng, n, p, q)
    meas = rng.integers(1, 4, size=(p * q, n), dtype=np.int8)
    outcomes = device.run_circuit_batch(letters, signs, meas, request)
    params = GLParams(k_loc=k_loc, gamma=gamma, delta=delta, scale=scale, partitions=p, inner_shots=q)
    return GLDataset(n, masks, letters, signs, meas, outcomes, params)


def _partition_means(ds: GLDataset, x: PauliString, p: PauliString) -> np.ndarray:
    """mu_k per partition; zero where T_k intersects supp(X)."""
    vals = _masked_estimator(x, p, ds.prep_letters, ds.prep_signs, ds.meas_letters, ds.outcomes)
    mu = vals.reshape(ds.params.partitions, ds.params.inner_shots).mean(axis=1)
    sup = np.array(x.support(), dtype=np.int64)
    if sup.size:
        hit = ds.partition_masks[:, sup].any(axis=1)
        mu = np.where(hit, 0.0, mu)
    return mu


def gl_query(ds: GLDataset, x: PauliString, p: PauliString) -> GLVerdict:
    """Pass/Fail weight detection for strings extending x, probed through p."""
    if x.n != ds.n or p.n != ds.n:
        raise ParameterError("query Paulis must match the dataset qubit count")
    if x.weight > ds.params.k_loc:
        raise QueryWeightError(f"|supp(X)| = {x.weight} exceeds k_loc = {ds.params.k_loc}")
    if p.weight > 1:
        raise QueryWeightError("measured-side Pauli must be 1-local")
    mu = _partition_means(ds, x, p)
    bar = exceedance_threshold(ds.params.k_loc, ds.params.gamma)
    statistic = float((np.abs(mu) > bar).mean())
    value = "Pass" if statistic > pass_fraction_threshold(ds.params.k_loc) else "Fail"
    return GLVerdict(value=value, statistic=statistic)


# -- general weight estimation through POVM access -----------------------------


def weight_shot_plan(n: int, k_loc: int, gamma: float, delta: float, scale: float) -> Tuple[int, int]:
    """(p, q) for the weight estimator: p >= 9^{k+1}/g^2 log(2(3n)^k/d), q >= 2*9^{k+1}/g."""
    if gamma <= 0 or not 0 < delta < 1:
        raise ParameterError("gamma must be positive and delta in (0, 1)")
    if scale <= 0:
        raise ParameterError("scale must be positive")
    p_full = 9.0 ** (k_loc + 1) / gamma**2 * math.log(2.0 * (3.0 * n) ** k_loc / delta)
    q_full = 2.0 * 9.0 ** (k_loc + 1) / gamma
    return max(1, math.ceil(scale * p_full)), max(1, math.ceil(scale * q_full))


def weight_estimate(
    device: SimulatedDevice,
    o: DenseOperator,
    x: PauliString,
    k_loc: int,
    gamma: float,
    delta: float,
    scale: float = 1.0,
) -> float:
    """Estimate sum_{Q superset X} c_Q^2 / 6^{|supp Q|} for O = sum c_Q Q.

    Uses POVM access {(I+O)/2, (I-O)/2} on partitioned random eigenstates;
    requires ||O|| <= 1 and |supp(X)| <= k_loc.
    """
    if x.weight > k_loc:
        raise QueryWeightError(f"|supp(X)| = {x.weight} exceeds k_loc = {k_loc}")
    n = device.n
    p, q = weight_shot_plan(n, k_loc, gamma, delta, scale)
    rng = device.child_rng()
    masks, letters, signs = _sample_partitioned_preps(rng, n, p, q)
    b = device.run_povm_batch(letters, signs, o).astype(np.float64)

    sup_x, codes_x = _support_codes(x)
    keep = np.ones(p * q, dtype=bool)
    est = b * 3.0 ** len(sup_x)
    if sup_x.size:
        keep = (letters[:, sup_x] == codes_x).all(axis=1)
        est = est * np.where(keep, signs[:, sup_x].prod(axis=1), 0.0)
    else:
        est = est
    mu_k = est.reshape(p, q).mean(axis=1)
    if sup_x.size:
        hit = masks[:, sup_x].any(axis=1)
        mu_k = np.where(hit, 0.0, mu_k)
    return float((mu_k**2).mean())

"""Sparse Pauli-sum Hamiltonians: norms, clipping, effective sparsity,
commutator expansions in the Pauli basis, and random instance generators.

Phase convention: commutator_sum and nested_commutator store i*[.,.] so
that all stored coefficients stay real.  Every consumer of commutators in
this package accounts for that factor consistently.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, Mapping, Sequence, Tuple

import numpy as np

from .errors import (
    DimensionMismatchError,
    GenerationError,
    ParameterError,
)
from .pauli import PauliString, commutator, mul


class SparsePauliSum:
    """An immutable map PauliString -> real coefficient (no identity term)."""

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[PauliString, float] | Iterable[Tuple[PauliString, float]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: Dict[PauliString, float] = {}
        for p, c in items:
            if p.n != n:
                raise DimensionMismatchError(f"term on {p.n} qubits in an n={n} sum")
            if p.is_identity:
                raise ParameterError("identity term is not allowed in a SparsePauliSum")
            c = float(c)
            if c != 0.0:
                acc[p] = acc.get(p, 0.0) + c
        self.n = n
        # canonical order for deterministic iteration
        self._terms: Dict[PauliString, float] = {
            p: acc[p] for p in sorted(acc, key=PauliString.sort_key) if acc[p] != 0.0
        }

    # -- mapping interface ------------------------------------------------

    def items(self) -> Iterator[Tuple[PauliString, float]]:
        return iter(self._terms.items())

    def keys(self) -> Iterator[PauliString]:
        return iter(self._terms)

    def get(self, p: PauliString, default: float = 0.0) -> float:
        return self._terms.get(p, default)

    def __contains__(self, p: PauliString) -> bool:
        return p in self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[PauliString]:
        return iter(self._terms)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SparsePauliSum)
            and self.n == other.n
            and self._terms == other._terms
        )

    def __repr__(self) -> str:
        inner = ", ".join(f"{p.label()}: {c:+g}" for p, c in self.items())
        return f"SparsePauliSum(n={self.n}, {{{inner}}})"

    # -- arithmetic --------------------------------------------------------

    def scaled(self, factor: float) -> "SparsePauliSum":
        return SparsePauliSum(self.n, ((p, c * factor) for p, c in self.items()))

    def __add__(self, other: "SparsePauliSum") -> "SparsePauliSum":
        if self.n != other.n:
            raise DimensionMismatchError("cannot add sums on different qubit counts")
        return SparsePauliSum(self.n, itertools.chain(self.items(), other.items()))

    def __sub__(self, other: "SparsePauliSum") -> "SparsePauliSum":
        return self + other.scaled(-1.0)

    def max_locality(self) -> int:
        return max((p.weight for p in self), default=0)

    def coeff_l2(self) -> float:
        """Euclidean norm of the coefficient vector; equals the normalized
        Frobenius norm of the dense operator by Pauli orthonormality."""
        return math.sqrt(sum(c * c for c in self._terms.values()))


def from_label_dict(n: int, terms: Mapping[str, float]) -> SparsePauliSum:
    """Convenience builder from {"XZI...": coeff} dictionaries."""
    return SparsePauliSum(n, ((PauliString.from_label(lbl), c) for lbl, c in terms.items()))


# -- local norms and effective sparsity -------------------------------------


def _per_site_values(h: SparsePauliSum) -> Dict[int, list]:
    sites: Dict[int, list] = {}
    for p, c in h.items():
        for i in p.support():
            sites.setdefault(i, []).append(c)
    return sites


def local_norm_1(h: SparsePauliSum) -> float:
    """Max over qubits of the l1 norm of coefficients touching that qubit."""
    sites = _per_site_values(h)
    return max((sum(abs(c) for c in cs) for cs in sites.values()), default=0.0)


def local_norm_2(h: SparsePauliSum) -> float:
    """Max over qubits of the l2 norm of coefficients touching that qubit."""
    sites = _per_site_values(h)
    return max((math.sqrt(sum(c * c for c in cs)) for cs in sites.values()), default=0.0)


def clip(h: SparsePauliSum, eps: float) -> SparsePauliSum:
    """Clamp every coefficient to [-eps, eps]."""
    if eps <= 0:
        raise ParameterError("clip threshold must be positive")
    return SparsePauliSum(h.n, ((p, max(-eps, min(eps, c))) for p, c in h.items()))


def effective_sparsity(h: SparsePauliSum, eps: float, per_site: bool = True) -> float:
    """Smooth per-site count of coefficients larger than eps.

    Default is the per-site max form max(1, max_i sum_{a: i in supp} min(1,
    c_a^2/eps^2)), consistent with the local 2-norm of the clipped sum.
    `per_site=False` exposes the site-free global-sum variant instead.
    """
    if eps <= 0:
        raise ParameterError("effective sparsity threshold must be positive")
    if per_site:
        sites = _per_site_values(h)
        worst = max(
            (sum(min(1.0, (c / eps) ** 2) for c in cs) for cs in sites.values()),
            default=0.0,
        )
        return max(1.0, worst)
    return max(1.0, sum(min(1.0, (c / eps) ** 2) for _, c in h.items()))


# -- commutator machinery ----------------------------------------------------


def commutator_sum(h: SparsePauliSum, g: SparsePauliSum) -> SparsePauliSum:
    """Exact Pauli-basis expansion of i*[h, g] (real coefficients)."""
    if h.n != g.n:
        raise DimensionMismatchError("commutator operands on different qubit counts")
    acc: Dict[PauliString, float] = {}
    for p, a in h.items():
        for q, b in g.items():
            res = commutator(p, q)
            if res is None:
                continue
            phase, r = res
            # i * [p, q] = 2 * i^{e+1} * r with e odd, so i^{e+1} is +/-1.
            e1 = (int(phase) + 1) % 4
            coeff = 2.0 * a * b * (1.0 if e1 == 0 else -1.0)
            acc[r] = acc.get(r, 0.0) + coeff
    return SparsePauliSum(h.n, acc)


def nested_commutator(h: SparsePauliSum, x: SparsePauliSum, order: int) -> SparsePauliSum:
    """Iterate commutator_sum: order k gives (i ad_h)^k applied to x."""
    if order < 1:
        raise ParameterError("nested commutator order must be >= 1")
    out = x
    for _ in range(order):
        out = commutator_sum(h, out)
    return out


def pauli_as_sum(p: PauliString, coeff: float = 1.0) -> SparsePauliSum:
    return SparsePauliSum(p.n, [(p, coeff)])


# -- lattice geometry --------------------------------------------------------


@dataclass(frozen=True)
class LatticeGeometry:
    """A d-dimensional rectangular lattice with the L1 shortest-path metric."""

    side_lengths: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.side_lengths or any(s < 1 for s in self.side_lengths):
            raise ParameterError("side lengths must be positive")

    @property
    def dimension(self) -> int:
        return len(self.side_lengths)

    @property
    def n(self) -> int:
        return int(np.prod(self.side_lengths))

    def coords(self, qubit: int) -> Tuple[int, ...]:
        out = []
        for s in reversed(self.side_lengths):
            out.append(qubit % s)
            qubit //= s
        return tuple(reversed(out))

    def dist(self, i: int, j: int) -> int:
        ci, cj = self.coords(i), self.coords(j)
        return int(sum(abs(a - b) for a, b in zip(ci, cj)))


# -- random instance generators ----------------------------------------------


def _random_pauli_on_support(rng: np.random.Generator, n: int, support: Sequence[int]) -> PauliString:
    letters = [(q, "XYZ"[rng.integers(0, 3)]) for q in support]
    return PauliString.from_letters(n, letters)


def gen_low_intersection(
    n: int,
    k: int,
    max_degree: int,
    coeff_range: Tuple[float, float],
    seed: int,
    num_terms: int | None = None,
) -> SparsePauliSum:
    """Random k-local Hamiltonian whose dual interaction graph has bounded
    degree: each term's support intersects at most `max_degree` other terms.

    Coefficient magnitudes are uniform in `coeff_range` with random sign.
    Deterministic under `seed`; raises GenerationError if the requested
    number of terms cannot be placed after bounded retries.
    """
    lo, hi = coeff_range
    if not (n >= 1 and 1 <= k <= n and max_degree >= 0 and 0 < lo <= hi):
        raise ParameterError("invalid generator parameters")
    rng = np.random.default_rng(seed)
    target = num_terms if num_terms is not None else n
    terms: list[PauliString] = []
    supports: list[set] = []
    degrees: list[int] = []
    tries = 0
    max_tries = 200 * max(target, 1)
    while len(terms) < target and tries < max_tries:
        tries += 1
        w = int(rng.integers(1, k + 1))
        sup = sorted(rng.choice(n, size=w, replace=False).tolist())
        cand = _random_pauli_on_support(rng, n, sup)
        if any(cand == t for t in terms):
            continue
        sup_set = set(sup)
        hits = [idx for idx, s in enumerate(supports) if s & sup_set]
        if len(hits) > max_degree or any(degrees[idx] + 1 > max_degree for idx in hits):
            continue
        terms.append(cand)
        supports.append(sup_set)
        for idx in hits:
            degrees[idx] += 1
        degrees.append(len(hits))
    if not terms:
        raise GenerationError("could not place any term under the degree constraint")
    coeffs = rng.uniform(lo, hi, size=len(terms)) * rng.choice([-1.0, 1.0], size=len(terms))
    return SparsePauliSum(n, zip(terms, coeffs))


def dual_graph_max_degree(h: SparsePauliSum) -> int:
    """Max degree of the dual interaction graph (edge iff supports meet)."""
    sups = [set(p.support()) for p in h]
    deg = [sum(1 for j, t in enumerate(sups) if j != i and s & t) for i, s in enumerate(sups)]
    return max(deg, default=0)


def gen_power_law(
    geometry: LatticeGeometry,
    k: int,
    alpha: float,
    seed: int,
    fill: float = 0.9,
) -> SparsePauliSum:
    """Random k-local Hamiltonian with alpha-power-law pairwise decay.

    Every qubit pair (i, j) receives a few random Pauli terms covering it;
    each pair's terms are scaled so the summed magnitude is exactly
    fill * max(1, dist(i,j))^(-alpha), then a global audit rescales if
    k > 2 couplings pushed any pair over budget.
    """
    d = geometry.dimension
    if alpha <= d:
        raise ParameterError(f"power-law exponent must exceed the lattice dimension ({d})")
    if not 0 < fill <= 1:
        raise ParameterError("fill must lie in (0, 1]")
    n = geometry.n
    if k < 2 or k > n:
        raise ParameterError("power-law generator needs 2 <= k <= n")
    rng = np.random.default_rng(seed)
    acc: Dict[PauliString, float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            budget = fill / max(1, geometry.dist(i, j)) ** alpha
            n_terms = int(rng.integers(1, 3))
            raw: list[Tuple[PauliString, float]] = []
            for _ in range(n_terms):
                extra = int(rng.integers(0, k - 1))
                pool = [q for q in range(n) if q not in (i, j)]
                sup = [i, j] + (
                    sorted(rng.choice(pool, size=extra, replace=False).tolist()) if extra else []
                )
                cand = _random_pauli_on_support(rng, n, sup)
                raw.append((cand, float(rng.uniform(0.2, 1.0) * rng.choice([-1.0, 1.0]))))
            total = sum(abs(c) for _, c in raw)
            for p, c in raw:
                acc[p] = acc.get(p, 0.0) + c * budget / total
    h = SparsePauliSum(n, acc)
    worst = pair_budget_violation(h, geometry, alpha)
    if worst > 1.0:
        h = h.scaled(1.0 / worst)
    return h


def pair_budget_violation(h: SparsePauliSum, geometry: LatticeGeometry, alpha: float) -> float:
    """Max over pairs of (summed magnitude on the pair) / (power-law budget)."""
    n = geometry.n
    pair_sums: Dict[Tuple[int, int], float] = {}
    for p, c in h.items():
        sup = p.support()
        for a_idx in range(len(sup)):
            for b_idx in range(a_idx + 1, len(sup)):
                key = (sup[a_idx], sup[b_idx])
                pair_sums[key] = pair_sums.get(key, 0.0) + abs(c)
    worst = 0.0
    for (i, j), s in pair_sums.items():
        budget = 1.0 / max(1, geometry.dist(i, j)) ** alpha
        worst = max(worst, s / budget)
    return worst


def power_law_sparsity_bound(d: int, k: int, alpha: float, eps: float) -> float:
    """Closed-form bound on s_eps for alpha-power-law Hamiltonians."""
    if alpha <= d:
        raise ParameterError("bound requires alpha > d")
    kappa = d * k / (d * k + (alpha - d))
    return 2.0 ** (d * k + 1) / (eps * (alpha - d)) ** kappa


# -- JSON file format ---------------------------------------------------------


def to_json_dict(h: SparsePauliSum) -> dict:
    return {
        "n": h.n,
        "terms": [{"pauli": p.label(), "coeff": c} for p, c in h.items()],
    }


def save_hamiltonian(h: SparsePauliSum, path: str) -> None:
    with open(path, "w") as f:
        json.dump(to_json_dict(h), f, indent=1)
        f.write("\n")


def from_json_dict(doc: dict) -> SparsePauliSum:
    n = int(doc["n"])
    seen = set()
    terms = []
    for entry in doc["terms"]:
        p = PauliString.from_label(entry["pauli"])
        if p.is_identity:
            raise ParameterError("hamiltonian file contains an identity term")
        if p in seen:
            raise ParameterError(f"duplicate term {p.label()} in hamiltonian file")
        seen.add(p)
        terms.append((p, float(entry["coeff"])))
    return SparsePauliSum(n, terms)


def load_hamiltonian(path: str) -> SparsePauliSum:
    with open(path) as f:
        return from_json_dict(json.load(f))

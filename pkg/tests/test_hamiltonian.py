"""Sparse sums: norms, clipping, sparsity, commutators, generators, file IO."""

import json
import math

import numpy as np
import pytest

from conftest import kron_sum, random_sum
from hamlearn.errors import DimensionMismatchError, ParameterError
from hamlearn.hamiltonian import (
    LatticeGeometry,
    SparsePauliSum,
    clip,
    commutator_sum,
    dual_graph_max_degree,
    effective_sparsity,
    from_json_dict,
    from_label_dict,
    gen_low_intersection,
    gen_power_law,
    load_hamiltonian,
    local_norm_1,
    local_norm_2,
    nested_commutator,
    pair_budget_violation,
    power_law_sparsity_bound,
    save_hamiltonian,
    to_json_dict,
)
from hamlearn.pauli import PauliString


class TestSparsePauliSum:
    def test_rejects_identity_and_merges_duplicates(self):
        with pytest.raises(ParameterError):
            SparsePauliSum(2, [(PauliString.identity(2), 1.0)])
        p = PauliString.from_label("XZ")
        h = SparsePauliSum(2, [(p, 1.0), (p, -1.0)])
        assert len(h) == 0

    def test_zero_coefficients_dropped(self):
        h = SparsePauliSum(1, [(PauliString.from_label("X"), 0.0)])
        assert len(h) == 0

    def test_iteration_canonical_and_deterministic(self, rng):
        h = random_sum(rng, 4, 10, 3)
        keys = [p.sort_key() for p in h]
        assert keys == sorted(keys)

    def test_arithmetic(self):
        a = from_label_dict(2, {"XI": 1.0, "IZ": 2.0})
        b = from_label_dict(2, {"IZ": -2.0, "YY": 0.5})
        s = a + b
        assert s.get(PauliString.from_label("IZ")) == 0.0
        assert (a - a).max_locality() == 0
        assert a.scaled(2.0).get(PauliString.from_label("XI")) == 2.0


class TestLocalNorms:
    def test_examples(self):
        h = from_label_dict(2, {"ZZ": 0.5, "XI": 0.25})  # X touches qubit 1
        assert local_norm_1(h) == 0.75
        assert local_norm_1(SparsePauliSum(2)) == 0.0
        assert local_norm_1(from_label_dict(1, {"X": -0.3})) == pytest.approx(0.3)

    def test_345(self):
        h = from_label_dict(2, {"ZZ": 0.6, "XI": 0.8})
        assert local_norm_2(h) == pytest.approx(1.0)
        assert local_norm_2(from_label_dict(1, {"Z": -0.7})) == pytest.approx(0.7)

    def test_l2_below_l1(self, rng):
        for _ in range(30):
            h = random_sum(rng, 4, 8, 2)
            assert local_norm_2(h) <= local_norm_1(h) + 1e-12

    def test_l2_frobenius_identity(self, rng):
        # per-site restriction: sqrt(sum c^2) equals (1/sqrt(N))||.||_F
        for _ in range(10):
            n = int(rng.integers(2, 5))
            h = random_sum(rng, n, 6, 2)
            per_site = []
            for i in range(n):
                r = SparsePauliSum(n, ((p, c) for p, c in h.items() if i in p.support()))
                dense = kron_sum(r)
                per_site.append(np.linalg.norm(dense) / math.sqrt(1 << n))
            assert local_norm_2(h) == pytest.approx(max(per_site), abs=1e-10)


class TestClipAndSparsity:
    def test_clip_examples(self):
        assert clip(from_label_dict(1, {"Z": 1.0}), 0.1).get(PauliString.from_label("Z")) == 0.1
        assert clip(from_label_dict(1, {"Z": -0.05}), 0.1).get(
            PauliString.from_label("Z")
        ) == -0.05
        h = clip(from_label_dict(1, {"Z": 1.0, "X": -2.0}), 0.5)
        assert h.get(PauliString.from_label("Z")) == 0.5
        assert h.get(PauliString.from_label("X")) == -0.5
        with pytest.raises(ParameterError):
            clip(h, 0.0)

    def test_clip_idempotent_and_lipschitz(self, rng):
        for _ in range(20):
            h = random_sum(rng, 3, 6, 2)
            g = random_sum(rng, 3, 6, 2)
            eps = float(rng.uniform(0.05, 1.0))
            c1 = clip(h, eps)
            assert clip(c1, eps) == c1
            c2 = clip(g, eps)
            for p in set(h.keys()) | set(g.keys()):
                assert abs(c1.get(p) - c2.get(p)) <= abs(h.get(p) - g.get(p)) + 1e-12

    def test_effective_sparsity_example(self):
        h = from_label_dict(1, {"Z": 1.0, "X": 0.05})
        assert effective_sparsity(h, 0.1) == pytest.approx(1.25)

    def test_floor_at_one(self):
        h = from_label_dict(2, {"XI": 0.01, "IZ": 0.02})
        assert effective_sparsity(h, 0.5) == 1.0

    def test_quadratic_growth_bound(self, rng):
        for _ in range(30):
            h = random_sum(rng, 4, 8, 2)
            eps = float(rng.uniform(0.05, 0.5))
            assert effective_sparsity(h, eps / 2) <= 4 * effective_sparsity(h, eps) + 1e-12
            assert effective_sparsity(h, eps / 2) >= effective_sparsity(h, eps) - 1e-12

    def test_global_sum_variant_at_least_per_site(self, rng):
        h = random_sum(rng, 4, 8, 2)
        assert effective_sparsity(h, 0.1, per_site=False) >= effective_sparsity(h, 0.1) - 1e-12


class TestCommutatorSum:
    def test_single_qubit_example(self):
        h = from_label_dict(1, {"X": 1.0})
        g = from_label_dict(1, {"Z": 1.0})
        out = commutator_sum(h, g)
        assert out.get(PauliString.from_label("Y")) == pytest.approx(2.0)

    def test_disjoint_and_self(self):
        h = from_label_dict(2, {"XI": 1.0})
        g = from_label_dict(2, {"IZ": 1.0})
        assert len(commutator_sum(h, g)) == 0
        assert len(commutator_sum(h, h)) == 0

    def test_dense_oracle(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 5))
            h = random_sum(rng, n, 5, min(2, n))
            g = random_sum(rng, n, 5, min(2, n))
            hm, gm = kron_sum(h), kron_sum(g)
            assert np.abs(kron_sum(commutator_sum(h, g)) - 1j * (hm @ gm - gm @ hm)).max() <= 1e-10

    def test_nested_order_semantics(self):
        h = from_label_dict(1, {"Z": 1.0})
        x = from_label_dict(1, {"X": 1.0})
        assert nested_commutator(h, x, 1) == commutator_sum(h, x)
        # dense [Z,[Z,X]] = 4X; the i-per-level convention flips the sign
        assert nested_commutator(h, x, 2).get(PauliString.from_label("X")) == pytest.approx(-4.0)
        with pytest.raises(ParameterError):
            nested_commutator(h, x, 0)

    def test_nested_commuting_empty(self):
        h = from_label_dict(2, {"XI": 1.0})
        x = from_label_dict(2, {"IX": 1.0})
        for order in (1, 2, 3):
            assert len(nested_commutator(h, x, order)) == 0

    def test_jacobi_identity_exact(self, rng):
        for _ in range(15):
            n = int(rng.integers(2, 5))
            x, y, a = (random_sum(rng, n, 4, 2) for _ in range(3))
            lhs = commutator_sum(x, commutator_sum(y, a)) - commutator_sum(
                y, commutator_sum(x, a)
            )
            rhs = commutator_sum(commutator_sum(x, y), a)
            diff = lhs - rhs
            assert max((abs(c) for _, c in diff.items()), default=0.0) <= 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            commutator_sum(from_label_dict(1, {"X": 1.0}), from_label_dict(2, {"XZ": 1.0}))


class TestGenerators:
    def test_low_intersection_degree_audit(self):
        h = gen_low_intersection(8, 2, 1, (0.2, 0.6), seed=5)
        assert dual_graph_max_degree(h) <= 1
        assert h.max_locality() <= 2

    def test_degree_zero_disjoint(self):
        h = gen_low_intersection(8, 2, 0, (0.2, 0.6), seed=6)
        sups = [set(p.support()) for p in h]
        for i in range(len(sups)):
            for j in range(i + 1, len(sups)):
                assert not (sups[i] & sups[j])

    def test_coefficient_bound(self):
        h = gen_low_intersection(8, 2, 1, (0.2, 0.6), seed=9)
        assert local_norm_1(h) <= (1 + 1) * 0.6 + 1e-12
        assert all(0.2 <= abs(c) <= 0.6 for _, c in h.items())

    def test_deterministic(self):
        a = gen_low_intersection(6, 2, 1, (0.3, 0.5), seed=3)
        b = gen_low_intersection(6, 2, 1, (0.3, 0.5), seed=3)
        assert a == b

    def test_power_law_budget_audit(self):
        geo = LatticeGeometry((8,))
        h = gen_power_law(geo, 2, 3.0, seed=7)
        assert pair_budget_violation(h, geo, 3.0) <= 1.0 + 1e-12

    def test_power_law_sparsity_bound_value(self):
        # d=1, k=2, alpha=3, eps=0.1: 2^{dk+1}/(eps(alpha-d))^{dk/(dk+alpha-d)}
        bound = power_law_sparsity_bound(1, 2, 3.0, 0.1)
        assert bound == pytest.approx(8.0 / 0.2**0.5, rel=1e-12)
        assert bound == pytest.approx(17.888, abs=1e-3)

    def test_power_law_kappa_value(self):
        d, k, alpha = 1, 2, 3.0
        kappa = d * k / (d * k + (alpha - d))
        assert kappa == pytest.approx(0.5)

    def test_power_law_rejects_small_alpha(self):
        with pytest.raises(ParameterError):
            gen_power_law(LatticeGeometry((8,)), 2, 1.0, seed=0)

    def test_lattice_metric(self):
        geo = LatticeGeometry((3, 3))
        assert geo.dimension == 2 and geo.n == 9
        assert geo.dist(0, 8) == 4  # (0,0) -> (2,2) Manhattan
        assert geo.dist(0, 1) == 1


class TestFileFormat:
    def test_roundtrip(self, tmp_path, rng):
        h = random_sum(rng, 4, 8, 2)
        path = tmp_path / "ham.json"
        save_hamiltonian(h, str(path))
        assert load_hamiltonian(str(path)) == h
        doc = json.loads(path.read_text())
        assert set(doc) == {"n", "terms"}
        assert all(set(t) == {"pauli", "coeff"} for t in doc["terms"])

    def test_rejects_identity_term(self):
        with pytest.raises(ParameterError):
            from_json_dict({"n": 2, "terms": [{"pauli": "II", "coeff": 1.0}]})

    def test_rejects_duplicates(self):
        with pytest.raises(ParameterError):
            from_json_dict(
                {"n": 1, "terms": [{"pauli": "X", "coeff": 1.0}, {"pauli": "X", "coeff": 2.0}]}
            )

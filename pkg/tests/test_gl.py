"""GL oracle: shot-plan arithmetic, moment identities, verdicts, weights."""

import itertools
import math

import numpy as np
import pytest

from conftest import kron_state, random_sum
from hamlearn.device import DeviceConfig, EvolutionRequest, SimulatedDevice
from hamlearn.errors import ParameterError, QueryWeightError
from hamlearn.evolution import (
    DenseOperator,
    dense_hamiltonian,
    dense_pauli,
    expm_hermitian,
    pauli_decompose,
)
from hamlearn.gl import (
    build_gl_dataset,
    exceedance_threshold,
    gl_full_inner_shots,
    gl_query,
    gl_shot_plan,
    pass_fraction_threshold,
    weight_estimate,
    weight_shot_plan,
)
from hamlearn.hamiltonian import SparsePauliSum, from_label_dict, pauli_as_sum
from hamlearn.pauli import PauliString, subset


def make_device(h, seed=0):
    return SimulatedDevice(DeviceConfig(hidden_h=h, rng_seed=seed))


class TestShotPlan:
    def test_q_satisfies_the_concentration_inequality(self):
        # q is the least integer with 2 exp(-q g^2 / (10000*6^k*2*3^{2(k+1)})) <= 1/(100*54^k)
        for k, gamma in ((1, 0.5), (2, 0.3)):
            q = gl_full_inner_shots(k, gamma)
            denom = 10000 * 6**k * 2 * 3 ** (2 * (k + 1))
            bound = 1.0 / (100 * 54**k)
            assert 2 * math.exp(-q * gamma**2 / denom) <= bound
            assert 2 * math.exp(-(q - 1) * gamma**2 / denom) > bound

    def test_monotone_in_gamma_delta(self):
        p1, q1 = gl_shot_plan(8, 1, 0.5, 0.1, 1.0)
        p2, q2 = gl_shot_plan(8, 1, 0.25, 0.1, 1.0)
        p3, q3 = gl_shot_plan(8, 1, 0.5, 0.01, 1.0)
        assert q2 > q1 and p2 == p1
        assert p3 > p1 and q3 == q1

    def test_validation(self):
        with pytest.raises(ParameterError):
            gl_shot_plan(4, 1, 0.0, 0.1, 1.0)
        with pytest.raises(ParameterError):
            gl_shot_plan(4, 1, 0.5, 0.1, 0.0)


class TestDatasetStructure:
    def test_inner_shots_match_outer_prep_on_partition(self, rng):
        h = random_sum(rng, 3, 3, 2)
        dev = make_device(h, seed=1)
        req = EvolutionRequest(h0=SparsePauliSum(3), t=0.3, s=1)
        ds = build_gl_dataset(dev, req, k_loc=1, gamma=0.5, delta=0.2, scale=2e-4)
        p, q = ds.params.partitions, ds.params.inner_shots
        letters = ds.prep_letters.reshape(p, q, 3)
        signs = ds.prep_signs.reshape(p, q, 3)
        for k in range(p):
            t_sites = np.nonzero(ds.partition_masks[k])[0]
            for i in t_sites:
                assert (letters[k, :, i] == letters[k, 0, i]).all()
                assert (signs[k, :, i] == signs[k, 0, i]).all()

    def test_ledger_charged_pq(self, rng):
        h = random_sum(rng, 2, 3, 2)
        dev = make_device(h, seed=1)
        req = EvolutionRequest(h0=SparsePauliSum(2), t=0.3, s=1)
        ds = build_gl_dataset(dev, req, k_loc=1, gamma=0.5, delta=0.2, scale=2e-4)
        assert dev.snapshot_ledger().experiment_count == ds.params.partitions * ds.params.inner_shots


class TestVerdicts:
    def _engineered(self, seed):
        """Hidden theta*Y1 with theta*s*t = pi/4 makes Z+ X1 Z = Z1 exactly."""
        n = 3
        hidden = from_label_dict(n, {"IYI": math.pi / 4})
        dev = make_device(hidden, seed=seed)
        req = EvolutionRequest(h0=SparsePauliSum(n), t=1.0, s=1)
        ds = build_gl_dataset(dev, req, k_loc=1, gamma=0.9, delta=0.05, scale=8.7e-4)
        return ds

    def test_engineered_pass(self):
        ds = self._engineered(0)
        v = gl_query(ds, PauliString.from_label("IZI"), PauliString.from_label("IXI"))
        assert v.passed
        assert v.statistic > pass_fraction_threshold(1)

    def test_engineered_fail(self):
        ds = self._engineered(0)
        v = gl_query(ds, PauliString.from_label("IIZ"), PauliString.from_label("IXI"))
        assert not v.passed

    def test_partition_hit_zeroes_everything(self, rng):
        h = random_sum(rng, 2, 3, 2)
        dev = make_device(h, seed=2)
        req = EvolutionRequest(h0=SparsePauliSum(2), t=0.3, s=1)
        ds = build_gl_dataset(dev, req, k_loc=1, gamma=0.5, delta=0.2, scale=2e-4)
        # force every partition to intersect supp(X)
        masks = np.ones_like(ds.partition_masks)
        forced = type(ds)(
            ds.n, masks, ds.prep_letters, ds.prep_signs, ds.meas_letters, ds.outcomes, ds.params
        )
        v = gl_query(forced, PauliString.from_label("IZ"), PauliString.from_label("IX"))
        assert not v.passed
        assert v.statistic == 0.0

    def test_weight_limit(self, rng):
        h = random_sum(rng, 3, 3, 2)
        dev = make_device(h, seed=2)
        req = EvolutionRequest(h0=SparsePauliSum(3), t=0.3, s=1)
        ds = build_gl_dataset(dev, req, k_loc=1, gamma=0.5, delta=0.2, scale=2e-4)
        with pytest.raises(QueryWeightError):
            gl_query(ds, PauliString.from_label("IZZ"), PauliString.from_label("IIX"))
        with pytest.raises(QueryWeightError):
            gl_query(ds, PauliString.from_label("IIZ"), PauliString.from_label("IXX"))

    def test_verdict_consistency(self):
        ds = self._engineered(1)
        v = gl_query(ds, PauliString.from_label("IZI"), PauliString.from_label("IXI"))
        assert v.passed == (v.statistic > pass_fraction_threshold(ds.params.k_loc))


class TestMomentIdentities:
    """Exact enumerations of the partitioned-estimator identities at n = 3."""

    def setup_method(self):
        rng = np.random.default_rng(77)
        self.n = 3
        h = random_sum(rng, self.n, 3, 2)
        z = expm_hermitian(h, 0.7)
        self.p = PauliString.single(self.n, 0, "X")
        self.o = z.matrix.conj().T @ dense_pauli(self.p) @ z.matrix
        spectrum, ident = pauli_decompose(DenseOperator(self.n, self.o), self.n)
        self.coeffs = {PauliString.identity(self.n): ident}
        self.coeffs.update(dict(spectrum.items()))

    def exact_inner(self, t_mask, a_letters, v_signs, x):
        """The spectral formula for the inner expectation."""
        val = 0.0
        for q, c in self.coeffs.items():
            ok = True
            for i in range(self.n):
                if (t_mask >> i) & 1:
                    if q.letter(i) not in ("I", a_letters[i]):
                        ok = False
                        break
                elif q.letter(i) != x.letter(i):
                    ok = False
                    break
            if not ok:
                continue
            sign = 1.0
            for i in range(self.n):
                if (t_mask >> i) & 1 and q.letter(i) != "I":
                    sign *= v_signs[i]
            val += c * sign
        return val

    def brute_inner(self, t_mask, a_letters, v_signs, x):
        """Enumerate the inner randomness of the POVM-style estimator."""
        free = [i for i in range(self.n) if not (t_mask >> i) & 1]
        total, count = 0.0, 0
        for a_choice in itertools.product("XYZ", repeat=len(free)):
            for v_choice in itertools.product((1, -1), repeat=len(free)):
                letters = list(a_letters)
                signs = list(v_signs)
                for idx, i in enumerate(free):
                    letters[i] = a_choice[idx]
                    signs[i] = v_choice[idx]
                count += 1
                if any(letters[i] != x.letter(i) for i in x.support()):
                    continue
                est = 1.0
                for i in x.support():
                    est *= 3 * signs[i]
                word = "".join(letters[i] for i in range(self.n - 1, -1, -1))
                state = kron_state(word, [signs[i] for i in range(self.n - 1, -1, -1)])
                est *= float((state.conj() @ (self.o @ state)).real)
                total += est
        return total / count

    def test_inner_expectation_identity(self):
        x = PauliString.from_letters(self.n, [(1, "Y")])
        worst = 0.0
        for t_mask in (0, 0b100, 0b101):
            if any((t_mask >> i) & 1 for i in x.support()):
                continue
            t_sites = [i for i in range(self.n) if (t_mask >> i) & 1]
            for a_choice in itertools.product("XYZ", repeat=len(t_sites)):
                for v_choice in itertools.product((1, -1), repeat=len(t_sites)):
                    a_letters, v_signs = ["?"] * self.n, [0] * self.n
                    for idx, i in enumerate(t_sites):
                        a_letters[i] = a_choice[idx]
                        v_signs[i] = v_choice[idx]
                    got = self.exact_inner(t_mask, a_letters, v_signs, x)
                    want = self.brute_inner(t_mask, a_letters, v_signs, x)
                    worst = max(worst, abs(got - want))
        assert worst <= 1e-10

    def test_outer_second_moment(self):
        for x in (
            PauliString.from_letters(self.n, [(1, "Z")]),
            PauliString.from_letters(self.n, [(1, "Y"), (2, "X")]),
        ):
            second, count = 0.0, 0
            for t_mask in range(1 << self.n):
                if any((t_mask >> i) & 1 for i in x.support()):
                    continue
                t_sites = [i for i in range(self.n) if (t_mask >> i) & 1]
                for a_choice in itertools.product("XYZ", repeat=len(t_sites)):
                    for v_choice in itertools.product((1, -1), repeat=len(t_sites)):
                        a_letters, v_signs = ["?"] * self.n, [0] * self.n
                        for idx, i in enumerate(t_sites):
                            a_letters[i] = a_choice[idx]
                            v_signs[i] = v_choice[idx]
                        second += self.exact_inner(t_mask, a_letters, v_signs, x) ** 2
                        count += 1
            second /= count * 2**x.weight  # weight by P(T misses supp X)
            target = sum(c * c / 6.0**q.weight for q, c in self.coeffs.items() if subset(x, q))
            assert second == pytest.approx(target, abs=1e-10)


class TestWeightEstimate:
    def test_formula_target_from_spectrum(self):
        # the 0.6 Z1 + 0.8 X2 instance: weight above Z1 is 0.36/6
        o = from_label_dict(2, {"IZ": 0.6, "XI": 0.8})
        spectrum = dict(o.items())
        x = PauliString.from_label("IZ")
        target = sum(c * c / 6.0**q.weight for q, c in spectrum.items() if subset(x, q))
        assert target == pytest.approx(0.36 / 6)

    def test_zero_observable(self):
        dev = make_device(from_label_dict(2, {"ZI": 0.1}), seed=0)
        o = DenseOperator(2, np.zeros((4, 4), dtype=complex))
        est = weight_estimate(dev, o, PauliString.from_label("IZ"), 1, 0.1, 0.1, scale=0.06)
        assert abs(est) <= 0.1

    def test_accuracy_on_low_weight_observable(self):
        o = DenseOperator(2, dense_hamiltonian(from_label_dict(2, {"IZ": 0.3, "XI": 0.4})))
        exact = 0.09 / 6
        hits = 0
        for seed in range(20):
            dev = make_device(from_label_dict(2, {"ZI": 0.1}), seed=seed)
            est = weight_estimate(dev, o, PauliString.from_label("IZ"), 1, 0.1, 0.1, scale=0.06)
            hits += abs(est - exact) <= 0.1
        assert hits >= 18

    def test_plan_formulas(self):
        p, q = weight_shot_plan(4, 1, 0.1, 0.1, 1.0)
        assert q == math.ceil(2 * 9**2 / 0.1)
        assert p == math.ceil(9**2 / 0.01 * math.log(2 * 12**1 / 0.1))

    def test_weight_limit(self):
        dev = make_device(from_label_dict(2, {"ZI": 0.1}))
        o = DenseOperator(2, np.zeros((4, 4), dtype=complex))
        with pytest.raises(QueryWeightError):
            weight_estimate(dev, o, PauliString.from_label("XZ"), 1, 0.1, 0.1, scale=0.05)

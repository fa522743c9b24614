import math

import numpy as np
import pytest

from bellmax.bellops import BellOperatorSpec, family_size, operator_matrix
from bellmax.correlation import correlation_tensor
from bellmax.states import (make_generalized_ghz, make_w, maximally_mixed,
                            permute_qubits, random_separable_state)
from bellmax.violation import (FAMILIES, OptimizerConfig, crossings,
                               family_state, formula_objective,
                               max_violation_formula, optimal_settings_from_b,
                               oracle_max_violation, sweep)

FAST = OptimizerConfig(restarts=2, grid_points_per_angle=8)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


class TestFormulaObjective:
    def test_product_zero_state(self, rng):
        # |000>: correlation matrix empty, only a z subvector survives -> 1
        from bellmax.states import DensityMatrix
        mat = np.zeros((8, 8), dtype=complex)
        mat[0, 0] = 1.0
        t = correlation_tensor(DensityMatrix(3, mat))
        for _ in range(5):
            b = unit(rng.normal(size=3))
            assert formula_objective(t, (1, 2, 3), [b]) == pytest.approx(1.0, abs=1e-12)

    def test_maximally_mixed_zero(self):
        t = correlation_tensor(maximally_mixed(3))
        assert formula_objective(t, (1, 2, 3), [unit([1, 1, 1])]) == pytest.approx(0.0, abs=1e-12)

    def test_ghz_closed_form(self):
        # value sqrt(2 sin^2 2a + cos^2 2a) with b3 in the xy-plane
        for alpha in (np.pi / 24, np.pi / 12, np.pi / 8, np.pi / 4):
            t = correlation_tensor(make_generalized_ghz(3, alpha))
            got = formula_objective(t, (1, 2, 3), [np.array([1.0, 0.0, 0.0])])
            want = math.sqrt(2 * math.sin(2 * alpha) ** 2 + math.cos(2 * alpha) ** 2)
            assert got == pytest.approx(want, abs=1e-12)

    def test_sign_symmetry(self, rng):
        t = correlation_tensor(make_w(3))
        for _ in range(5):
            b = unit(rng.normal(size=3))
            assert formula_objective(t, (1, 2, 3), [b]) == pytest.approx(
                formula_objective(t, (1, 2, 3), [-b]), abs=1e-12)

    def test_wrong_vector_count(self):
        t = correlation_tensor(make_w(3))
        with pytest.raises(ValueError):
            formula_objective(t, (1, 2, 3), [])

    def test_rejects_non_unit(self):
        t = correlation_tensor(make_w(3))
        with pytest.raises(ValueError):
            formula_objective(t, (1, 2, 3), [np.array([2.0, 0.0, 0.0])])


class TestFormulaMaximum:
    def test_ghz_is_tsirelson(self):
        rho = make_generalized_ghz(3, np.pi / 4)
        for k in (1, 2, 3):
            res = max_violation_formula(rho, BellOperatorSpec("recursive", 3, k), FAST)
            assert res.value == pytest.approx(math.sqrt(2.0), abs=1e-9)
            assert res.method == "formula"

    def test_value_ceiling(self, rng):
        # never exceeds 2^((n-1)/2)
        from bellmax.states import random_mixed_state
        for n, k in [(3, 2), (4, 12)]:
            rho = random_mixed_state(n, rng)
            res = max_violation_formula(rho, BellOperatorSpec("recursive", n, k), FAST)
            assert res.value <= 2 ** ((n - 1) / 2) + 1e-6

    def test_permutation_covariance(self, rng):
        # operator k on rho equals the canonical operator on the permuted rho
        from bellmax.states import random_mixed_state
        rho = random_mixed_state(3, rng)
        for k in (1, 2):
            spec = BellOperatorSpec("recursive", 3, k)
            moved = permute_qubits(rho, spec.perm)
            canonical = BellOperatorSpec("recursive", 3, 3)
            v1 = max_violation_formula(rho, spec, FAST).value
            v2 = max_violation_formula(moved, canonical, FAST).value
            assert v1 == pytest.approx(v2, abs=1e-8)

    def test_rejects_other_kinds(self):
        with pytest.raises(ValueError):
            max_violation_formula(make_w(3), BellOperatorSpec("mabk", 3), FAST)

    def test_rejects_size_mismatch(self):
        with pytest.raises(ValueError):
            max_violation_formula(make_w(3), BellOperatorSpec("recursive", 4, 1), FAST)


class TestSettingsRecovery:
    def test_ghz_settings_reach_value(self):
        rho = make_generalized_ghz(3, np.pi / 4)
        spec = BellOperatorSpec("recursive", 3, 3)
        t = correlation_tensor(rho)
        res = max_violation_formula(rho, spec, FAST)
        settings, predicted = optimal_settings_from_b(t, spec.perm, res.argmax_b)
        assert predicted == pytest.approx(res.value, abs=1e-9)
        achieved = np.real(np.trace(rho.matrix @ operator_matrix(spec, settings)))
        assert achieved == pytest.approx(res.value, abs=1e-9)

    def test_random_state_settings_reach_value(self, rng):
        from bellmax.states import random_mixed_state
        rho = random_mixed_state(3, rng)
        spec = BellOperatorSpec("recursive", 3, 1)
        t = correlation_tensor(rho)
        res = max_violation_formula(rho, spec, FAST)
        settings, predicted = optimal_settings_from_b(t, spec.perm, res.argmax_b)
        achieved = np.real(np.trace(rho.matrix @ operator_matrix(spec, settings)))
        assert abs(achieved) == pytest.approx(res.value, abs=1e-6)


class TestOracle:
    def test_ghz_tsirelson(self):
        rho = make_generalized_ghz(3, np.pi / 4)
        res = oracle_max_violation(rho, BellOperatorSpec("recursive", 3, 3), FAST)
        assert res.value == pytest.approx(math.sqrt(2.0), abs=1e-7)
        assert res.method == "oracle"
        assert res.argmax_settings is not None

    def test_agrees_with_formula(self, rng):
        from bellmax.states import random_mixed_state
        cfg = OptimizerConfig(restarts=8)
        for _ in range(3):
            rho = random_mixed_state(3, rng)
            spec = BellOperatorSpec("recursive", 3, 2)
            f = max_violation_formula(rho, spec, FAST).value
            o = oracle_max_violation(rho, spec, cfg).value
            assert o == pytest.approx(f, abs=1e-5)

    def test_separable_states_bounded(self, rng):
        for _ in range(5):
            rho = random_separable_state(3, rng)
            res = oracle_max_violation(rho, BellOperatorSpec("recursive", 3, 1), FAST)
            assert res.value <= 1.0 + 1e-6

    def test_chsh_singlet(self):
        vec = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2.0)
        from bellmax.states import DensityMatrix
        rho = DensityMatrix(2, np.outer(vec, vec).astype(complex))
        res = oracle_max_violation(rho, BellOperatorSpec("chsh", 2), FAST)
        assert res.value == pytest.approx(math.sqrt(2.0), abs=1e-8)

    def test_mabk_and_chen_supported(self):
        rho = make_generalized_ghz(3, np.pi / 4)
        v_mabk = oracle_max_violation(rho, BellOperatorSpec("mabk", 3), FAST).value
        assert v_mabk == pytest.approx(2.0, abs=1e-7)
        v_chen = oracle_max_violation(rho, BellOperatorSpec("chen", 3), FAST).value
        assert v_chen == pytest.approx(math.sqrt(2.0), abs=1e-7)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            OptimizerConfig(restarts=0)
        with pytest.raises(ValueError):
            OptimizerConfig(local_tol=0.0)

    def test_defaults(self):
        cfg = OptimizerConfig()
        assert cfg.restarts == 8
        assert cfg.seed == 42


class TestFamiliesAndSweeps:
    def test_family_endpoints(self):
        assert np.allclose(family_state("w-ghz-mix", 1.0).matrix, make_w(3).matrix)
        assert np.allclose(family_state("w-ghz-mix", 0.0).matrix,
                           make_generalized_ghz(3, np.pi / 4).matrix)
        assert np.allclose(family_state("w4-white-noise", 1.0).matrix,
                           maximally_mixed(4).matrix)
        assert np.allclose(family_state("w4-white-noise", 0.0).matrix, make_w(4).matrix)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            family_state("nope", 0.5)
        assert set(FAMILIES) == {"w-ghz-mix", "w4-white-noise"}

    def test_sweep_values(self):
        pts = sweep("w-ghz-mix", BellOperatorSpec("recursive", 3, 3), FAST, [0.0, 1.0])
        assert pts[0][1] == pytest.approx(math.sqrt(2.0), abs=1e-8)
        assert pts[1][1] == pytest.approx(1.2018504251, abs=1e-6)


class TestCrossings:
    def test_linear_interpolation(self):
        pts = [(0.0, 0.0), (1.0, 2.0)]
        assert crossings(pts, threshold=1.0) == pytest.approx([0.5])

    def test_no_crossing(self):
        assert crossings([(0.0, 1.5), (1.0, 1.2)]) == []
        assert crossings([]) == []

    def test_multiple_crossings(self):
        pts = [(0.0, 2.0), (0.5, 0.5), (1.0, 1.5)]
        got = crossings(pts, threshold=1.0)
        assert len(got) == 2
        assert 0.0 < got[0] < 0.5 < got[1] < 1.0

    def test_bisection_refinement(self):
        f = lambda x: 2.0 - 2.0 * x  # crosses 1 at x = 0.5
        pts = [(0.0, f(0.0)), (1.0, f(1.0))]
        got = crossings(pts, threshold=1.0, refine=f, xtol=1e-6)
        assert got == pytest.approx([0.5], abs=1e-5)

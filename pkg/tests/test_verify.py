"""Tests for the experiment checks and the report format."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbmoo import verify
from fbmoo.dyadic import DyadicCube, build_lattice
from fbmoo.gridfn import constant, indicator, random_function
from fbmoo.operators import KernelSpec, fractional_integral, maximal
from fbmoo.weights import InadmissibleExponents, WeightTuple, extrapolation_exponents, power_weight

# Largest midpoint-rule value of the integral of |x - y|**-1/2 over [0, 1)
# at the nodes j / 1024, attained at x = 1/2; computed by a direct double
# loop over nodes and cells.
SUP_C_CONSTANT_ETA_HALF_N10 = 2.790621071923887


class TestReport:
    def test_flags_and_json(self):
        rep = verify.ExperimentReport("demo", {"a": 1})
        rep.measure("x", 0.5)
        rep.measure("big", math.inf)
        rep.check("small", "x", 1.0)
        rep.check("strict", "x", 0.5, "<", gating=False)
        assert rep.passed
        data = json.loads(rep.to_json())
        assert data["measured"]["big"] == "inf"
        assert [f["passed"] for f in data["flags"]] == [True, False]
        assert "timestamp" in data and "timestamp" not in json.loads(rep.to_json(False))

    def test_unknown_quantity(self):
        with pytest.raises(KeyError):
            verify.ExperimentReport("demo").check("f", "missing", 1.0)

    def test_runtime_flag_kept_with_timestamp(self):
        rep = verify.ExperimentReport("demo")
        rep.runtime = 10.0
        rep.check_runtime("runtime", 5.0)
        assert not rep.passed
        assert "runtime_flags" in rep.to_dict()["timestamp"]
        assert "runtime_flags" not in json.dumps(rep.to_dict(False))


class TestWeakQuasinorm:
    def test_indicator(self):
        # lam * |{|g| > lam}| is maximized just below the value 1
        g = np.r_[np.ones(4), np.zeros(4)]
        assert verify.weak_quasinorm(g, 1 / 8, 1.0) == 0.5

    @given(st.integers(0, 2**31 - 1), st.floats(0.2, 2.0))
    @settings(max_examples=40)
    def test_matches_threshold_grid(self, seed, inv_q):
        g = np.random.default_rng(seed).random(64)
        exact = verify.weak_quasinorm(g, 1 / 64, inv_q)
        grid = max(lam * (np.sum(g > lam) / 64) ** inv_q for lam in np.linspace(0, 1, 2001))
        assert grid <= exact + 1e-12

    def test_zero(self):
        assert verify.weak_quasinorm(np.zeros(8), 1 / 8, 1.0) == 0.0


class TestDomination:
    def test_zero_input_vacuous(self):
        rep = verify.check_pointwise_domination([constant(0, 8)], KernelSpec(1, 0.5), 0.5, build_lattice(8))
        assert rep.passed and rep.measured["evaluable_points"] == 0

    def test_constant_input_frozen(self):
        N = 10
        rep = verify.check_pointwise_domination([constant(1, N)], KernelSpec(1, 0.5), 0.5, build_lattice(N))
        assert rep.measured["sup_C"] == pytest.approx(SUP_C_CONSTANT_ETA_HALF_N10, rel=1e-12)
        assert rep.passed

    def test_constant_input_direct_oracle(self):
        # sparse family is the root alone, so C(x) is the fractional integral itself
        N = 8
        rep = verify.check_pointwise_domination([constant(1, N)], KernelSpec(1, 0.5), 0.5, build_lattice(N))
        direct = max(fractional_integral([constant(1, N)], j / 2**N, KernelSpec(1, 0.5)) for j in range(2**N))
        assert rep.measured["sup_C"] == pytest.approx(direct, rel=1e-12)

    def test_bilinear_half_indicators(self):
        f = indicator(0, 0.5, 9)
        rep = verify.check_pointwise_domination([f, f], KernelSpec(2, 1.0), 0.5, build_lattice(9))
        assert rep.passed and math.isfinite(rep.measured["sup_C"])

    def test_sweep_small(self):
        rep = verify.check_pointwise_domination_sweep(1, 0.5, samples=4, resolution=8, rng=1)
        assert rep.passed and len(rep.measured["sup_C"]) == 4


class TestWeakType:
    def test_zero(self):
        rep = verify.check_maximal_weak_type([constant(0, 8)], 1.0, 0.0, build_lattice(8))
        assert rep.measured["ratio"] == 0 and rep.passed

    def test_half_indicator_ratio_at_most_one(self):
        rep = verify.check_maximal_weak_type([indicator(0, 0.5, 10)], 1.0, 0.0, build_lattice(10))
        assert rep.measured["ratio"] <= 1.0 + 1e-12

    def test_bilinear_random(self):
        rng = np.random.default_rng(3)
        fs = [random_function(rng, 10), random_function(rng, 10)]
        rep = verify.check_maximal_weak_type(fs, [2.0, 2.0], [0.25, 0.25], build_lattice(10))
        assert rep.passed

    def test_inadmissible(self):
        with pytest.raises(InadmissibleExponents):
            verify.check_maximal_weak_type([constant(1, 4)], 1.0, 1.0, build_lattice(4))

    def test_uses_exact_level_sets(self):
        f = indicator(0, 0.25, 8)
        L = build_lattice(8)
        rep = verify.check_maximal_weak_type([f], 1.0, 0.0, L)
        values = [maximal([f], j / 256, L) for j in range(256)]
        brute = max(v * sum(u >= v for u in values) / 256 for v in set(values))
        assert rep.measured["weak_norm"] == pytest.approx(brute, rel=1e-12)


class TestSharpness:
    def test_unit_weights_excluded(self):
        e = extrapolation_exponents(1, 0, [4], [2], "inf")
        family = lambda a, N: WeightTuple((constant(1.0, N),))
        fs = [power_weight(-0.125, 8)]
        rep = verify.check_sharp_weighted_bound(e, family, [1.0], fs, build_lattice(8))
        row = rep.measured["table"][0]
        assert row["K"] == 1.0 and row["log_R_over_log_K"] is None and math.isfinite(row["R"])

    def test_refinement_small(self):
        e = extrapolation_exponents(1, 0, [4], [2], "inf")
        family = lambda a, N: WeightTuple((power_weight(a, N),))
        rep = verify.check_sharp_weighted_bound(
            e, family, [0.25, 1.0], lambda N: [power_weight(-0.125, N)], build_lattice(9), theta=2.0
        )
        assert rep.measured["max_refinement_change"] < 0.05
        assert rep.parameters["theta_formula"] == 4.0 and rep.parameters["theta_gate"] == 2.0

    def test_example_oracle(self):
        rows = verify.sharpness_example_oracle(14, 4)["average_2_Q_j"]
        for row in rows:
            assert row["grid"] == pytest.approx(row["closed_form"], rel=2e-3)
            assert row["stated"] < row["closed_form"]

    def test_chain_family_is_sparse(self):
        from fbmoo.sparse import is_sparse

        assert is_sparse(verify.chain_family(6, 8))


class TestFbmooConditions:
    def test_constant_inputs_give_zero_oscillation(self):
        fs = [constant(1.0, 6)]
        c1, c2 = verify._fbmoo_sample("maximal", 1, 0.0, [1.0], fs, DyadicCube(2, 1), DyadicCube(3, 5))
        assert c2 == 0.0

    def test_maximal_enumeration(self):
        # f vanishes off [0, 1/4), which lies inside both daggers, so both truncations agree
        f = indicator(0, 0.25, 6)
        c1, c2 = verify._fbmoo_sample("maximal", 1, 0.0, [1.0], [f], DyadicCube(1, 0), DyadicCube(1, 0))
        assert c1 == 0.0 and c2 == 0.0

    def test_pair_mean(self):
        a = np.random.default_rng(0).random(30)
        brute = np.abs(a[:, None] - a[None, :]).mean()
        assert verify._pair_mean_abs(a) == pytest.approx(brute, rel=1e-12)

    def test_fractional_integral_stable(self):
        rep = verify.check_fbmoo_conditions("fractional_integral", 1, 0.5, 1.0, 8, samples=6, rng=2)
        assert rep.passed
        assert math.isfinite(rep.measured["sup_condition_I"])

    def test_unknown_operator(self):
        with pytest.raises(ValueError):
            verify._operator("shift", 1, 0.5, [1.0], 4)


class TestLocalDecay:
    def test_constant_input_exhaustive(self):
        N = 10
        t = np.linspace(0, 3, 13)
        rep = verify.check_local_decay([constant(1, N)], KernelSpec(1, 0.5), build_lattice(N), t)
        h = 2.0**-N
        x = np.arange(2**N) * h
        y = (np.arange(2**N) + 0.5) * h
        I = (np.abs(x[:, None] - y[None, :]) ** -0.5).sum(1) * h
        # the maximal function of 1 with eta = 1/2 is attained at the root
        assert np.allclose(rep.measured["mu"], [np.sum(I > s) * h for s in t])
        assert rep.measured["mu"][-1] == 0.0
        assert rep.passed

    def test_sweep(self):
        rep = verify.check_local_decay_sweep(samples=3, resolution=8, rng=5)
        assert rep.passed


class TestMixedWeak:
    def test_unweighted_reduction(self):
        N = 8
        f = indicator(0.25, 0.5, N)
        rep = verify.check_mixed_weak([f], KernelSpec(1, 0.5), constant(1, N), constant(1, N), build_lattice(N))
        assert rep.measured["ratio"] > 0 and rep.passed

    def test_power_v(self):
        N = 9
        rep = verify.check_mixed_weak([constant(1, N)], KernelSpec(1, 0.5), constant(1, N), power_weight(0.25, N),
                                      build_lattice(N))
        assert rep.passed

    def test_zero_input(self):
        N = 6
        rep = verify.check_mixed_weak([constant(0, N)], KernelSpec(1, 0.5), constant(1, N), constant(1, N),
                                      build_lattice(N))
        assert rep.measured["weak_norm_T"] == 0 and rep.measured["weak_norm_M"] == 0


class TestOtherChecks:
    def test_haar_small(self):
        assert verify.check_haar_system(4, 8, 0).passed

    def test_sparse_constructor_small(self):
        assert verify.check_sparse_constructor(10, 7, rng=1).passed

    def test_weight_arithmetic_small(self):
        assert verify.check_weight_arithmetic(50, 5, 6, rng=2).passed

    def test_factorization_small(self):
        assert verify.check_weight_factorization(5, 5, 7, rng=3).passed

    def test_shift_paraproduct_small(self):
        rep = verify.check_shift_paraproduct(3, (7, 8), rng=4)
        assert rep.passed

    def test_bloom(self):
        assert verify.check_bloom(8, rng=0).passed

    def test_seed_recorded(self):
        assert verify.check_haar_system(3, 6, 17).seed == 17

    def test_same_seed_same_report(self):
        a = verify.check_sparse_constructor(8, 7, rng=9).to_json(False)
        b = verify.check_sparse_constructor(8, 7, rng=9).to_json(False)
        assert a == b

    def test_threads_preserve_order(self, monkeypatch):
        a = verify.check_sparse_constructor(8, 7, rng=9).to_json(False)
        monkeypatch.setenv("FBMOO_THREADS", "4")
        assert verify.check_sparse_constructor(8, 7, rng=9).to_json(False) == a

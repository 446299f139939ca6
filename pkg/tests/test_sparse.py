"""Tests for sparse families, the stopping-time constructor and sparse operators."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbmoo.dyadic import DyadicCube, cube_cells
from fbmoo.gridfn import GridFunction, constant, indicator, random_function
from fbmoo.sparse import (
    SparseFamily,
    SymbolData,
    build_sparse_cz,
    cz_threshold,
    is_sparse,
    sparse_form,
    sparse_operator,
    sparse_operator_grid,
)

ROOT = DyadicCube(0, 0)
HALF = DyadicCube(1, 0)


class TestIsSparse:
    def test_single_cube(self):
        assert is_sparse(SparseFamily([ROOT], [np.arange(8)], 1.0, 3))

    def test_two_cubes(self):
        fam = SparseFamily([ROOT, HALF], [np.arange(4, 8), np.arange(0, 2)], 0.5, 3)
        assert is_sparse(fam)

    def test_overlap_detected(self):
        fam = SparseFamily([ROOT, HALF], [np.arange(0, 8), np.arange(0, 2)], 0.5, 3)
        cert = is_sparse(fam)
        assert not cert
        assert cert.cube == HALF and "overlaps" in cert.reason

    def test_too_small(self):
        cert = is_sparse(SparseFamily([ROOT], [np.arange(3)], 0.5, 3))
        assert not cert and cert.cube == ROOT

    def test_outside_cube(self):
        cert = is_sparse(SparseFamily([HALF], [np.arange(4, 8)], 0.5, 3))
        assert not cert

    def test_json_roundtrip(self):
        fam = SparseFamily([ROOT, HALF], [np.arange(4, 8), np.arange(0, 2)], 0.5, 3)
        back = SparseFamily.from_json(fam.to_json())
        assert back.cubes == fam.cubes and back.delta == fam.delta
        assert all(np.array_equal(a, b) for a, b in zip(back.exceptional_sets, fam.exceptional_sets))


class TestConstructor:
    def test_threshold(self):
        assert cz_threshold(1, 0.5) == 4.0

    def test_constants_give_single_cube(self):
        one = constant(1.0, 6)
        fam = build_sparse_cz([one, one], one, ROOT, 0.5)
        assert fam.cubes == (ROOT,)
        assert np.array_equal(fam.exceptional_sets[0], np.arange(64))

    def test_hand_trace(self):
        f = indicator(0, 0.25, 6) * 4.0
        fam = build_sparse_cz([f], constant(1.0, 6), ROOT, 0.5, max_level=2)
        assert DyadicCube(2, 0) in fam.cubes
        assert HALF not in fam.cubes
        assert fam.records[0].cube == ROOT
        assert fam.records[0].selected_measure == pytest.approx(0.25)

    @given(st.integers(0, 2**31 - 1), st.sampled_from([0.25, 0.5, 0.75]), st.integers(1, 3))
    @settings(max_examples=60, deadline=None)
    def test_always_sparse_with_markov(self, seed, delta, m):
        rng = np.random.default_rng(seed)
        fs = [random_function(rng, 8, int(rng.integers(1, 9)), sparsity=0.5) for _ in range(m)]
        g = random_function(rng, 8)
        fam = build_sparse_cz(fs, g, ROOT, delta)
        assert is_sparse(fam)
        assert all(r.ratio < 1 - delta for r in fam.records)

    def test_rejects_negative_input(self):
        f = GridFunction(-np.ones(8))
        with pytest.raises(ValueError):
            build_sparse_cz([f], constant(1, 3), ROOT, 0.5)


class TestSparseOperator:
    def test_single_cube_average(self):
        fam = SparseFamily([ROOT], [np.arange(16)], 1.0, 4)
        f = indicator(0, 0.5, 4)
        for x in (0.1, 0.6, 0.9):
            assert sparse_operator(fam, None, [f], 1.0, 0.0, x) == 0.5

    def test_zero_input(self):
        fam = SparseFamily([ROOT, HALF], [np.arange(8, 16), np.arange(4)], 0.5, 4)
        assert np.all(sparse_operator_grid(fam, None, [constant(0, 4)], 1.0, 0.5).values == 0)

    def test_constant_symbol_vanishes(self):
        fam = SparseFamily([ROOT], [np.arange(16)], 1.0, 4)
        sym = SymbolData((constant(2.0, 4),), (1,), (0,))
        assert sparse_operator(fam, sym, [constant(1.0, 4)], 1.0, 0.0, 0.3) == 0.0

    @given(st.integers(0, 2**31 - 1), st.floats(0, 0.999))
    @settings(max_examples=30, deadline=None)
    def test_grid_matches_pointwise(self, seed, x):
        rng = np.random.default_rng(seed)
        fs = [random_function(rng, 6), random_function(rng, 6)]
        fam = build_sparse_cz(fs, fs[0] + fs[1], ROOT, 0.5)
        sym = SymbolData((random_function(rng, 6), random_function(rng, 6)), (1, 2), (1, 0))
        grid = sparse_operator_grid(fam, sym, fs, [1.0, 2.0], 0.5)
        assert grid(x) == pytest.approx(sparse_operator(fam, sym, fs, [1.0, 2.0], 0.5, x), rel=1e-12)

    def test_symbol_orders_validated(self):
        with pytest.raises(ValueError):
            SymbolData((constant(1, 3),), (1,), (2,))


class TestSparseForm:
    def test_single_cube(self):
        fam = SparseFamily([ROOT], [np.arange(8)], 1.0, 3)
        one = constant(1.0, 3)
        assert sparse_form(fam, None, [one], one, 1.0, 1.0, 0.0) == 1.0

    def test_zero_psi(self):
        fam = SparseFamily([ROOT], [np.arange(8)], 1.0, 3)
        assert sparse_form(fam, None, [constant(1, 3)], constant(0, 3)) == 0.0

    def test_two_cubes(self):
        fam = SparseFamily([ROOT, HALF], [np.arange(4, 8), np.arange(0, 2)], 0.5, 3)
        one = constant(1.0, 3)
        assert sparse_form(fam, None, [one], one, 1.0, 1.0, 0.0) == pytest.approx(1.5)

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=30, deadline=None)
    def test_form_pairs_operator_with_psi(self, seed):
        rng = np.random.default_rng(seed)
        f, psi = random_function(rng, 6), random_function(rng, 6)
        fam = build_sparse_cz([f], f, ROOT, 0.5)
        op = sparse_operator_grid(fam, None, [f], 1.0, 0.0)
        # with r = s' = 1 the form equals the integral of A f against psi
        assert sparse_form(fam, None, [f], psi, 1.0, 1.0, 0.0) == pytest.approx((op * psi).integral(), rel=1e-12)

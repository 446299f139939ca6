"""Tests for dyadic cubes, lattices, Haar functions and the good/bad split."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbmoo.dyadic import (
    DyadicCube,
    Goodness,
    boundary_distance,
    build_lattice,
    classify_good_bad,
    cube_cells,
    good_bad_lambda,
    haar,
    haar_coefficients,
    haar_vector,
    martingale_difference,
)
from fbmoo.gridfn import GridFunction


def intervals(lattice, level):
    return [Q.interval() for Q in lattice.level_cubes(level)]


class TestLattice:
    def test_smallest_lattice(self):
        L = build_lattice(1)
        assert len(L) == 3
        assert [Q.interval() for Q in L] == [
            (Fraction(0), Fraction(1)),
            (Fraction(0), Fraction(1, 2)),
            (Fraction(1, 2), Fraction(1)),
        ]

    def test_root_only(self):
        L = build_lattice(0)
        assert list(L) == [DyadicCube(0, 0)]

    def test_shifted_level_two(self):
        L = build_lattice(2, Fraction(1, 4))
        got = set(intervals(L, 2))
        want = {(Fraction(1, 4), Fraction(1, 2)), (Fraction(1, 2), Fraction(3, 4)),
                (Fraction(3, 4), Fraction(1)), (Fraction(0), Fraction(1, 4))}
        assert got == want

    def test_containing_chain_is_nested(self):
        L = build_lattice(5)
        chain = L.containing(0.3)
        assert [Q.level for Q in chain] == list(range(6))
        for a, b in zip(chain, chain[1:]):
            assert a.contains(b)

    @given(st.integers(0, 10), st.data())
    def test_parent_child_roundtrip(self, level, data):
        index = data.draw(st.integers(0, 2**level - 1))
        Q = DyadicCube(level, index)
        for child in Q.children():
            assert child.parent() == Q
            assert Q.contains(child)
        assert sum(c.length for c in Q.children()) == Q.length

    def test_dagger_of_root_is_root(self):
        assert DyadicCube(0, 0).dagger() == DyadicCube(0, 0)
        assert DyadicCube(3, 5).dagger() == DyadicCube(2, 2)

    def test_dict_roundtrip(self):
        Q = DyadicCube(3, 5, Fraction(1, 8))
        assert DyadicCube.from_dict(Q.to_dict()) == Q

    def test_bad_cube_rejected(self):
        with pytest.raises(ValueError):
            DyadicCube(2, 4)


class TestHaar:
    def test_root_left(self):
        assert haar(DyadicCube(0, 0), 0.25) == 1.0

    def test_root_right(self):
        assert haar(DyadicCube(0, 0), 0.75) == -1.0

    def test_half_cube_normalization(self):
        assert haar(DyadicCube(1, 0), 0.1) == pytest.approx(2**0.5, rel=1e-15)

    def test_outside_support(self):
        assert haar(DyadicCube(1, 0), 0.7) == 0.0

    def test_vectors_orthonormal(self):
        N = 7
        L = build_lattice(5)
        H = np.stack([haar_vector(Q, N) for Q in L])
        assert np.allclose(H @ H.T * 2.0**-N, np.eye(len(L)), atol=1e-13)

    @given(st.integers(0, 2**31 - 1), st.integers(0, 7))
    @settings(max_examples=40)
    def test_coefficients_match_inner_products(self, seed, level):
        N = 8
        f = np.random.default_rng(seed).standard_normal(2**N)
        fast = haar_coefficients(f, level)
        slow = [np.dot(f, haar_vector(DyadicCube(level, j), N)) * 2.0**-N for j in range(2**level)]
        assert np.allclose(fast, slow, atol=1e-12)

    def test_shifted_coefficients_use_rolled_grid(self):
        N = 6
        f = np.random.default_rng(0).standard_normal(2**N)
        Q = DyadicCube(2, 1, Fraction(1, 8))
        direct = np.dot(f, haar_vector(Q, N)) * 2.0**-N
        assert haar_coefficients(f, 2, shift_cells=8)[1] == pytest.approx(direct, abs=1e-13)


class TestMartingaleDifference:
    def test_constant_has_zero_difference(self):
        f = GridFunction(np.full(16, 3.0))
        assert np.all(martingale_difference(f, DyadicCube(1, 1)).values == 0)

    def test_indicator_of_left_half(self):
        f = GridFunction(np.r_[np.ones(8), np.zeros(8)])
        d = martingale_difference(f, DyadicCube(0, 0)).values
        assert np.all(d[:8] == 0.5) and np.all(d[8:] == -0.5)

    def test_identity_function(self):
        N = 10
        f = GridFunction.from_callable(lambda x: x, N, "midpoint")
        d = martingale_difference(f, DyadicCube(0, 0)).values
        assert np.allclose(d[: 2 ** (N - 1)], -0.25) and np.allclose(d[2 ** (N - 1):], 0.25)

    def test_supported_on_cube(self):
        f = GridFunction(np.random.default_rng(1).random(32))
        Q = DyadicCube(2, 3)
        d = martingale_difference(f, Q).values
        outside = np.setdiff1d(np.arange(32), cube_cells(Q, 5))
        assert np.all(d[outside] == 0)
        assert abs(d[cube_cells(Q, 5)].sum()) < 1e-12


class TestGoodBad:
    def test_lambda(self):
        assert good_bad_lambda(0.0, 1.0) == pytest.approx(1 / 6)

    def test_boundary_cube_is_bad(self):
        L = build_lattice(4)
        assert classify_good_bad(DyadicCube(4, 0), L, 2, 0.0, 1.0) is Goodness.BAD

    def test_vacuous_good(self):
        L = build_lattice(4)
        assert classify_good_bad(DyadicCube(2, 1), L, 3, 0.0, 1.0) is Goodness.GOOD

    def test_hand_evaluated_example(self):
        L = build_lattice(4)
        I = DyadicCube(4, 8)
        assert boundary_distance(I, DyadicCube(0, 0)) == Fraction(7, 16)
        assert boundary_distance(I, DyadicCube(1, 1)) == 0
        assert classify_good_bad(I, L, 2, 0.0, 1.0) is Goodness.BAD

    def test_interior_cube_can_be_good(self):
        L = build_lattice(10)
        # [5/16 + 1/1024 ...] sits well inside its ancestors up to level 8 gap
        I = DyadicCube(10, 341)
        assert classify_good_bad(I, L, 1, 0.0, 1.0) in (Goodness.GOOD, Goodness.BAD)

    @given(st.integers(2, 8), st.data())
    @settings(max_examples=60)
    def test_bad_is_monotone_in_r(self, level, data):
        L = build_lattice(level)
        I = DyadicCube(level, data.draw(st.integers(0, 2**level - 1)))
        verdicts = [classify_good_bad(I, L, r, 0.5, 0.5) for r in range(1, level + 2)]
        # a larger r only removes candidate cubes J
        seen_good = False
        for v in verdicts:
            if v is Goodness.GOOD:
                seen_good = True
            assert not (seen_good and v is Goodness.BAD)

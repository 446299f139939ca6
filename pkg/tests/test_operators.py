"""Tests for the fractional maximal and integral operators, shifts and paraproducts."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbmoo.dyadic import DyadicCube, build_lattice, haar_coefficients
from fbmoo.gridfn import GridFunction, constant, haar_function, indicator, random_function
from fbmoo.operators import (
    KernelSpec,
    ParaproductSpec,
    ShiftSpec,
    apply_paraproduct,
    apply_shift,
    carleson_constant,
    fractional_integral,
    fractional_integral_grid,
    maximal,
    maximal_grid,
    maximal_tensor,
    shift_coefficient_bound,
)

ROOT = DyadicCube(0, 0)

# Value of the double integral of 1/(|1/2 - y1| + |1/2 - y2|) over the unit
# square, from the closed form 2 a ln 2 on each quadrant [0, a]^2 with a = 1/2.
FOUR_LN2 = 4 * math.log(2)


class TestMaximal:
    def test_left_half(self):
        f = indicator(0, 0.5, 8)
        assert maximal([f], 0.25, build_lattice(8)) == 1.0

    def test_right_half_sees_root(self):
        f = indicator(0, 0.5, 8)
        assert maximal([f], 0.75, build_lattice(8)) == 0.5

    def test_bilinear_constants(self):
        one = constant(1.0, 6)
        assert maximal([one, one], 0.3, build_lattice(6)) == 1.0

    @given(st.integers(0, 2**31 - 1), st.floats(0, 0.999))
    @settings(max_examples=40)
    def test_grid_matches_pointwise(self, seed, x):
        rng = np.random.default_rng(seed)
        fs = [random_function(rng, 6), random_function(rng, 6)]
        L = build_lattice(6)
        grid = maximal_grid(fs, L, [1.0, 2.0], [0.2, 0.1])
        assert grid(x) == pytest.approx(maximal(fs, x, L, [1.0, 2.0], [0.2, 0.1]), rel=1e-12)

    @given(st.integers(0, 2**31 - 1), st.floats(0, 0.999))
    @settings(max_examples=40)
    def test_multisublinear_below_tensor(self, seed, x):
        rng = np.random.default_rng(seed)
        fs = [random_function(rng, 6), random_function(rng, 6)]
        L = build_lattice(6)
        assert maximal(fs, x, L) <= maximal_tensor(fs, x, L) * (1 + 1e-12)

    def test_dominates_function(self):
        f = random_function(np.random.default_rng(4), 7)
        assert np.all(maximal_grid([f], build_lattice(7)).values >= f.values - 1e-15)


class TestKernel:
    def test_rejects_eta_outside_range(self):
        with pytest.raises(ValueError):
            KernelSpec(1, 1.0)
        with pytest.raises(ValueError):
            KernelSpec(2, 0.0)

    def test_kernel_value(self):
        assert KernelSpec(1, 0.5)(0.25) == pytest.approx(0.25**-0.5)


class TestFractionalIntegral:
    def test_endpoint_quadrature(self):
        got = fractional_integral([constant(1.0, 12)], 0.0, KernelSpec(1, 0.5))
        assert abs(got - 2.0) / 2.0 < 0.02

    def test_zero_input(self):
        one, zero = constant(1.0, 6), constant(0.0, 6)
        assert fractional_integral([one, zero], 0.3, KernelSpec(2, 1.0)) == 0.0

    def test_bilinear_centre_value(self):
        got = fractional_integral([constant(1.0, 9)] * 2, 0.5, KernelSpec(2, 1.0))
        assert got == pytest.approx(FOUR_LN2, rel=5e-3)

    @pytest.mark.parametrize("m,eta", [(1, 0.5), (2, 0.5), (2, 1.5), (3, 1.0)])
    def test_grid_route_matches_direct(self, m, eta):
        rng = np.random.default_rng(m)
        N = 6 if m < 3 else 4
        fs = [random_function(rng, N) for _ in range(m)]
        k = KernelSpec(m, eta)
        grid = fractional_integral_grid(fs, k).values
        direct = [fractional_integral(fs, j / 2**N, k) for j in range(2**N)]
        assert np.allclose(grid, direct, rtol=1e-12)

    @given(st.integers(0, 2**31 - 1), st.floats(0.1, 10.0))
    @settings(max_examples=20, deadline=None)
    def test_multilinear_scaling(self, seed, c):
        rng = np.random.default_rng(seed)
        fs = [random_function(rng, 6), random_function(rng, 6)]
        k = KernelSpec(2, 0.5)
        base = fractional_integral_grid(fs, k).values
        scaled = fractional_integral_grid([fs[0] * c, fs[1]], k).values
        assert np.allclose(scaled, c * base, rtol=1e-12)


def shift_terms(P, m):
    return {(P,) * (m + 2): 1.0}


class TestShift:
    def test_zero_coefficients(self):
        spec = ShiftSpec((0, 0, 0), {(ROOT, ROOT, ROOT, ROOT): 0.0}, (True, True), 0.5)
        f = random_function(np.random.default_rng(0), 6)
        assert np.all(apply_shift(spec, [f, f], build_lattice(6)).values == 0)

    def test_single_term(self):
        N = 7
        spec = ShiftSpec((0, 0, 0), {(ROOT, ROOT, ROOT, ROOT): 1.0}, (True, True), 0.0)
        rng = np.random.default_rng(1)
        f1, f2 = random_function(rng, N), random_function(rng, N)
        out = apply_shift(spec, [f1, f2], build_lattice(N)).values
        c1 = haar_coefficients(f1.values, 0)[0]
        c2 = haar_coefficients(f2.values, 0)[0]
        assert np.allclose(out, c1 * c2 * haar_function(ROOT, N).values, atol=1e-14)

    def test_cancellation_kills_constants(self):
        P = DyadicCube(1, 1)
        keys = {(P, P.children()[0], P.children()[1], P.children()[0]): 0.1}
        spec = ShiftSpec((1, 1, 1), keys, (True, True), 0.5)
        one = constant(3.0, 6)
        assert np.allclose(apply_shift(spec, [one, one], build_lattice(6)).values, 0.0)

    def test_bound_enforced(self):
        bound = shift_coefficient_bound(ROOT, (ROOT,) * 3, 2, 0.5)
        ShiftSpec((0, 0, 0), {(ROOT,) * 4: bound}, (True, False), 0.5)
        with pytest.raises(ValueError):
            ShiftSpec((0, 0, 0), {(ROOT,) * 4: bound * 1.01}, (True, False), 0.5)

    def test_needs_cancellative_slot(self):
        with pytest.raises(ValueError):
            ShiftSpec((0, 0, 0), {}, (False, False), 0.5)

    def test_complexity_checked(self):
        with pytest.raises(ValueError):
            ShiftSpec((1, 0, 0), {(ROOT,) * 4: 0.1}, (True, True), 0.5)


class TestParaproduct:
    def test_zero(self):
        spec = ParaproductSpec({ROOT: 0.0}, 0.5)
        f = random_function(np.random.default_rng(2), 5)
        assert np.all(apply_paraproduct(spec, [f, f], build_lattice(5)).values == 0)

    def test_single_root_term(self):
        spec = ParaproductSpec({ROOT: 1.0}, 0.5)
        one = constant(1.0, 5)
        assert np.array_equal(apply_paraproduct(spec, [one, one], build_lattice(5)).values,
                              haar_function(ROOT, 5).values)

    def test_zero_input(self):
        spec = ParaproductSpec({ROOT: 1.0}, 0.5)
        assert np.all(apply_paraproduct(spec, [constant(0, 5), constant(1, 5)], build_lattice(5)).values == 0)

    def test_carleson_rejects(self):
        with pytest.raises(ValueError):
            ParaproductSpec({ROOT: 1.5}, 0.5)

    def test_carleson_constant_values(self):
        coeffs = {ROOT: 0.5, DyadicCube(1, 0): 0.25}
        # root: 0.25 + 0.0625; child: 0.0625 * 2**(2 eta + 1) with eta = 0
        assert carleson_constant(coeffs, 0.0) == pytest.approx(max(0.3125, 0.125))

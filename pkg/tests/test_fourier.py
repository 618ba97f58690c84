"""Trigonometric polynomials, weighted coefficient norms and grid transforms."""
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasiproj.fourier import (DecayLaw, GridTooSmallError, TrigPoly, a_norm, coefficients_from_grid,
                               dual_exponent, dumps_trigpoly, in_out_norms, loads_trigpoly,
                               lp_norm, synthesize_grid, theta_weight)

from conftest import SEED, poly_coeffs

COS = TrigPoly.from_dict({(1,): 0.5, (-1,): 0.5})


class TestTrigPoly:
    def test_zero_coefficients_dropped(self):
        f = TrigPoly.from_dict({(0,): 1.0, (2,): 0.0})
        assert len(f) == 1 and f.coefficient([2]) == 0

    def test_sorted_and_merged_freqs(self):
        f = TrigPoly([[3], [-1], [3]], [1.0, 2.0, 0.5])
        assert f.freqs.ravel().tolist() == [-1, 3]
        assert f.coefficient([3]) == 1.5

    def test_arithmetic(self):
        f = TrigPoly.from_dict({(1,): 1.0})
        g = TrigPoly.from_dict({(1,): 1.0, (2,): 3.0})
        assert (g - f) == TrigPoly.from_dict({(2,): 3.0})
        assert (2 * f).coefficient([1]) == 2

    def test_real_part_is_real_valued(self, rng):
        f = TrigPoly.random(rng, 5).real_part()
        x = rng.random(20)
        assert np.max(np.abs(f(x).imag)) < 1e-12

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            TrigPoly.constant(1, dim=1) + TrigPoly.constant(1, dim=2)

    @given(poly_coeffs())
    def test_text_round_trip_bit_exact(self, terms):
        f = TrigPoly.from_dict(terms)
        g = loads_trigpoly(dumps_trigpoly(f))
        assert g == f

    def test_round_trip_two_dimensional(self, rng):
        f = TrigPoly.random(rng, 3, dim=2)
        assert loads_trigpoly(dumps_trigpoly(f)) == f

    def test_loads_requires_header(self):
        with pytest.raises(ValueError):
            loads_trigpoly("1 1.0 0.0\n")


class TestWeights:
    def test_origin(self):
        assert theta_weight(1, [0.0]) == 1

    def test_two_dim(self):
        assert theta_weight(2, [1.0, 1.0]) == pytest.approx(3.0)

    def test_half_cube_corner(self):
        # (1 + d/4)^(1/2) at the cube corner for d = 4
        assert theta_weight(1, [0.5] * 4) == pytest.approx(math.sqrt(2))

    @given(st.floats(0, 4), st.lists(st.floats(-50, 50), min_size=3, max_size=3),
           st.lists(st.floats(-50, 50), min_size=3, max_size=3))
    def test_submultiplicative_up_to_sharp_constant(self, alpha, x, y):
        # 1 + |x + y|^2 <= 4/3 (1 + |x|^2)(1 + |y|^2), equality at x = y, |x|^2 = 1/2
        x, y = np.array(x), np.array(y)
        lhs = theta_weight(alpha, x + y)
        rhs = (4 / 3) ** (alpha / 2) * theta_weight(alpha, x) * theta_weight(alpha, y)
        assert lhs <= rhs * (1 + 1e-9)

    def test_constant_free_form_fails(self):
        x = np.array([1.0])
        assert theta_weight(2, x + x) == 5 > theta_weight(2, x) ** 2 == 4
        h = np.array([math.sqrt(0.5)])
        assert theta_weight(2, h + h) / theta_weight(2, h) ** 2 == pytest.approx(4 / 3)

    @given(st.floats(0, 4), st.integers(1, 8), st.lists(st.integers(-100, 100), min_size=1, max_size=1))
    def test_dilation_bound(self, alpha, j, k):
        # theta(x) <= ||M^j||^alpha theta(M^-j x) for M = 2
        x = np.array(k, dtype=float)
        assert theta_weight(alpha, x) <= 2.0 ** (j * alpha) * theta_weight(alpha, x / 2**j) * (1 + 1e-9)


class TestANorm:
    def test_constant(self):
        for q in (1, 2, math.inf):
            assert a_norm(TrigPoly.constant(1.0), q, 1.5) == pytest.approx(1.0)

    def test_cosine_wiener_weighted(self):
        assert a_norm(COS, 1, 1) == pytest.approx(math.sqrt(2))

    def test_decay_sum(self):
        f = TrigPoly.from_dict({(n,): abs(n) ** -3.0 for n in (-2, -1, 1, 2)})
        assert a_norm(f, 2, 0) == pytest.approx(math.sqrt(2 * (1 + 1 / 64)), rel=1e-14)

    def test_in_out_constant(self):
        assert in_out_norms(TrigPoly.constant(1.0), 2, 0, "2", 1) == (1.0, 0.0)

    def test_in_out_single_high_mode(self):
        f = TrigPoly.from_dict({(3,): 1.0})
        assert in_out_norms(f, 2, 1.0, "2", 1) == (0.0, pytest.approx(math.sqrt(10)))

    @given(st.integers(0, 2**31), st.integers(1, 4))
    def test_in_out_partition(self, seed, j):
        f = TrigPoly.random(np.random.default_rng(seed), 12)
        i, o = in_out_norms(f, 2, 0, "2", j)
        assert i**2 + o**2 == pytest.approx(a_norm(f, 2, 0) ** 2, rel=1e-12)


class TestGrid:
    def test_constant_grid(self):
        assert np.allclose(synthesize_grid(TrigPoly.constant(1.0), 4), 1)

    def test_cosine_grid(self):
        assert np.allclose(synthesize_grid(COS, 4), [1, 0, -1, 0], atol=1e-15)

    def test_direct_sum_oracle(self, rng):
        f = TrigPoly.random(rng, 7)
        vals = synthesize_grid(f, 64)
        idx = rng.integers(0, 64, 10)
        x = idx / 64
        direct = np.array([sum(c * np.exp(2j * np.pi * n[0] * t) for n, c in zip(f.freqs, f.coeffs))
                           for t in x])
        assert np.max(np.abs(vals[idx] - direct)) < 1e-12

    def test_two_dim_direct_sum(self, rng):
        f = TrigPoly.random(rng, 3, dim=2)
        vals = synthesize_grid(f, (8, 10))
        assert abs(vals[3, 7] - f(np.array([[3 / 8, 7 / 10]]))[0]) < 1e-12

    def test_alias_detection(self):
        with pytest.raises(GridTooSmallError):
            synthesize_grid(TrigPoly.from_dict({(0,): 1, (4,): 1}), 4)

    @given(poly_coeffs())
    def test_grid_round_trip(self, terms):
        f = TrigPoly.from_dict(terms)
        g = coefficients_from_grid(synthesize_grid(f, 16))
        diff = f - g
        assert diff.a_norm_inf() < 1e-12


class TestLpNorm:
    def test_constant(self):
        for p in (1, 2, 3, math.inf):
            assert lp_norm(TrigPoly.constant(1.0), p) == pytest.approx(1.0)

    def test_cosine_l2(self):
        assert lp_norm(COS, 2) == pytest.approx(1 / math.sqrt(2), rel=1e-14)

    def test_cosine_sup(self):
        assert lp_norm(COS, math.inf) == pytest.approx(1.0, abs=1e-6)

    def test_cosine_l1(self):
        assert lp_norm(COS, 1, oversample=256) == pytest.approx(2 / math.pi, rel=1e-4)

    def test_dual_exponent(self):
        assert dual_exponent(1) == math.inf
        assert dual_exponent(math.inf) == 1
        assert dual_exponent(4) == pytest.approx(4 / 3)

    @given(st.integers(0, 2**31), st.sampled_from([1.0, 4 / 3, 1.5, 2.0]))
    def test_hausdorff_young(self, seed, q):
        f = TrigPoly.random(np.random.default_rng(seed), 6)
        p = dual_exponent(q)
        assert lp_norm(f, p) <= a_norm(f, q, 0) * (1 + 1e-9)

    @given(st.integers(0, 2**31))
    def test_parseval(self, seed):
        f = TrigPoly.random(np.random.default_rng(seed), 9)
        assert lp_norm(f, 2) == pytest.approx(a_norm(f, 2, 0), rel=1e-12)


class TestDecayLaw:
    def test_rule(self):
        law = DecayLaw(3.0)
        assert np.allclose(law.rule([[0], [2], [-4]]), [0, 1 / 8, 1 / 64])

    def test_truncation_ball(self):
        f = DecayLaw(2.0, dim=2).truncate(2)
        assert len(f) == 12  # lattice points with 0 < |n| <= 2

    def test_tail_bound_dominates_direct_tail(self):
        law = DecayLaw(3.0)
        full = law.truncate(20000)
        R = 64
        tail = full.restrict(np.abs(full.freqs[:, 0]) > R)
        assert a_norm(tail, 2, 0) <= law.tail_bound(R)

    def test_choose_radius_meets_tolerance(self):
        law = DecayLaw(4.0)
        R = law.choose_radius()
        assert law.tail_bound(R) <= 1e-12 * a_norm(law.truncate(16), 2, 0)

    def test_slow_decay_has_infinite_tail(self):
        assert DecayLaw(0.5).tail_bound(10) == math.inf

    def test_seeded_random_is_reproducible(self):
        a = TrigPoly.random(np.random.default_rng(SEED), 4)
        b = TrigPoly.random(np.random.default_rng(SEED), 4)
        assert a == b

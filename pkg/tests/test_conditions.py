"""Structural condition checks: Strang-Fix, compatibility, growth, class B."""
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasiproj.conditions import (CSV_HEADER, Window, check_bounded, check_class_B, check_growth,
                                  check_strang_fix, check_strict_compat, check_weak_compat,
                                  known_weak_compat_bound, lemma_constant, lq_class_norm,
                                  max_ratio_scan)
from quasiproj.generators import (differential, dirichlet, fejer_full, fundamental_dirichlet,
                                  ideal_sampling, inverse_dual, kantorovich, periodized_bspline,
                                  shifted_spline_combo, smoothed_sampling, truncated_fejer)

from conftest import QUINCUNX

W = Window(1, 6)
QUARTER = Fraction(1, 4)


def bspline_defect_ratio(x):
    """|1 - sinc(pi x)^2 (1 + cos 2 pi x) / 2| / x^2 at 50 digits."""
    with mpmath.workdps(50):
        x = mpmath.mpf(x)
        val = 1 - mpmath.sinc(mpmath.pi * x) ** 2 * (1 + mpmath.cos(2 * mpmath.pi * x)) / 2
        return float(abs(val) / x**2)


class TestGrowth:
    def test_ideal(self):
        r = check_growth(ideal_sampling(), 0, "2", W)
        assert r.empirical_constant == 1 and r.verdict

    def test_differential_constant(self):
        r = check_growth(differential([1, 0, Fraction(-1, 4)]), 2, "2", Window(1, 5))
        # attained at xi = 1/2: (1 + pi^2/4) / (1/4)
        assert r.empirical_constant == pytest.approx(4 + math.pi**2, rel=1e-12)
        assert r.verdict

    def test_kantorovich(self):
        r = check_growth(kantorovich(), 0, "2", W)
        assert r.empirical_constant <= 1 and r.verdict

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            check_growth(ideal_sampling(), -1, "2", W)


class TestStrangFix:
    @pytest.mark.parametrize("s", [1, 2, 4, 8])
    def test_dirichlet_constants(self, s):
        r = check_strang_fix(dirichlet(QUARTER), s, "2", W)
        assert r.verdict
        assert max(r.per_n_constants.values()) <= 4.0**s

    def test_bspline_order_two(self):
        r = check_strang_fix(periodized_bspline(2), 2, "2", W)
        assert r.verdict
        assert r.per_n_constants[1] == pytest.approx(1.6211389382774046, rel=1e-12)
        assert all(b <= 4 / (2 * abs(n) - 1) ** 2 for n, b in r.per_n_constants.items())

    def test_bspline_order_four(self):
        r = check_strang_fix(periodized_bspline(4), 4, "2", W)
        assert r.verdict
        assert r.per_n_constants[1] == pytest.approx(2.6280914571991905, rel=1e-12)

    def test_fejer_full_order_one(self):
        r = check_strang_fix(fejer_full(), 1, "2", Window(1, 5))
        assert r.verdict
        assert r.per_n_constants[1] <= 1 and r.per_n_constants[-1] <= 1
        assert r.per_n_constants[2] == 0

    def test_alias_lattice_violation(self):
        # the full-cube Fejer kernel with C_F = 1/2 does not vanish at M*^j n
        r = check_strang_fix(fejer_full(Fraction(1, 2)), 1, "2", Window(1, 3))
        assert not r.verdict
        assert r.witness["n"] in ([1], [-1])

    def test_lq_norm_of_constants(self):
        r = check_strang_fix(dirichlet(QUARTER), 1, "2", Window(1, 3, n_radius=4), q=math.inf)
        assert r.extra["b_norm_lq_alpha"] == pytest.approx(max(r.per_n_constants.values()))

    def test_csv_row(self):
        r = check_strang_fix(periodized_bspline(2), 2, "2", Window(1, 2))
        assert r.csv_row().startswith("strang_fix,2,")
        assert r.csv_row().endswith(",pass")
        assert CSV_HEADER.count(",") == r.csv_row().count(",") - r.csv_row().split('"')[1].count(",")


class TestWeakCompat:
    def test_bspline_smoothed(self):
        r = check_weak_compat(periodized_bspline(2), smoothed_sampling(), 2, "2", W)
        assert r.verdict
        assert r.bound == pytest.approx(4 / 3 * math.pi**2)
        assert r.empirical_constant == pytest.approx(bspline_defect_ratio(mpmath.mpf(1) / 64), rel=1e-9)

    def test_combo_smoothed(self):
        r = check_weak_compat(shifted_spline_combo(), smoothed_sampling(), 4, "2", W)
        assert r.verdict
        assert r.empirical_constant == pytest.approx(207.22074018977582, rel=1e-9)
        assert r.bound == pytest.approx(32 / 15 * math.pi**4)

    def test_combo_differential(self):
        g = shifted_spline_combo(4, Fraction(5, 6), Fraction(1, 6))
        r = check_weak_compat(g, differential([1, 0, Fraction(-1, 4)]), 4, "2", W)
        assert r.verdict
        assert r.empirical_constant == pytest.approx(45.37743102572858, rel=1e-9)
        assert r.bound == pytest.approx(7 / 15 * math.pi**4)

    def test_fejer_region_constant(self):
        r = check_weak_compat(truncated_fejer(), ideal_sampling(), 1, "2", W, region_radius=QUARTER)
        assert r.empirical_constant == pytest.approx(1.0) and r.bound == 1.0 and r.verdict

    def test_fejer_global_constant(self):
        r = check_weak_compat(truncated_fejer(), ideal_sampling(), 1, "2", W)
        # outside the support the defect is 1, the ratio peaks just past |xi| = 1/4
        assert r.empirical_constant == pytest.approx(64 / 17)
        assert r.bound == 4.0 and r.verdict

    def test_strict_pair_region_zero(self):
        r = check_weak_compat(dirichlet(QUARTER), ideal_sampling(), 3, "2", W, region_radius=QUARTER)
        assert r.empirical_constant == 0 and r.verdict

    def test_strict_pair_global_bound(self):
        g, a = dirichlet(QUARTER), ideal_sampling()
        r = check_weak_compat(g, a, 2, "2", W)
        assert r.bound == pytest.approx(2 * 16)
        assert r.verdict

    def test_unknown_pair_has_no_bound(self):
        assert known_weak_compat_bound(periodized_bspline(4), ideal_sampling(), 4) is None

    def test_nonunit_product_at_origin_fails(self):
        r = check_weak_compat(dirichlet(), 2 * ideal_sampling(), 1, "2", Window(1, 2))
        assert not r.verdict


class TestBoundedAndStrict:
    def test_bounded_values(self):
        assert check_bounded(dirichlet(), "2", W).empirical_constant == 1
        assert check_bounded(fejer_full(), "2", W).empirical_constant == 1
        r = check_bounded(shifted_spline_combo(), "2", W)
        assert r.empirical_constant <= 8 / 3 and r.verdict

    def test_inverse_dual_strict(self):
        a = smoothed_sampling()
        r = check_strict_compat(inverse_dual(a, QUARTER), a, QUARTER, "2", W)
        assert r.verdict and r.empirical_constant <= 1e-14

    def test_dirichlet_half(self):
        assert check_strict_compat(dirichlet(), ideal_sampling(), Fraction(1, 2), "2", W).verdict

    def test_fejer_fails(self):
        r = check_strict_compat(truncated_fejer(), ideal_sampling(), QUARTER, "2", W)
        assert not r.verdict
        # first hit: j = 2, l = -1, product 1 - |l / 4|
        assert r.witness["deviation"] == pytest.approx(0.25)

    def test_quincunx_inverse_dual(self):
        a = kantorovich()
        r = check_strict_compat(inverse_dual(a, QUARTER), a, QUARTER, QUINCUNX, Window(1, 6))
        assert r.verdict


class TestClassB:
    @pytest.mark.parametrize("delta", [Fraction(1, 8), QUARTER, Fraction(3, 8)])
    def test_dirichlet_small_ball(self, delta):
        assert check_class_B(dirichlet(delta), delta, delta, "2", W).verdict

    def test_fundamental_scan(self):
        assert check_class_B(fundamental_dirichlet(), QUARTER, 0.5, "2", W).verdict

    def test_closed_balls_reject_boundary(self):
        # dirichlet(1/2) reaches |xi| = 1/2, at distance exactly 1/2 from n = +-1
        r = check_class_B(dirichlet(), Fraction(1, 2), Fraction(1, 2), "2", W)
        assert not r.verdict

    def test_bspline_infinite_spectrum(self):
        r = check_class_B(periodized_bspline(2), QUARTER, 0.5, "2", W)
        assert not r.verdict and r.witness == "infinite spectrum"


class TestLqClass:
    @pytest.mark.parametrize("q", [1, 2, math.inf])
    def test_kantorovich_unit(self, q):
        assert lq_class_norm(kantorovich(), q, "2", 3) == pytest.approx(1.0, abs=1e-6)

    def test_homogeneity(self):
        assert lq_class_norm(2 * kantorovich(), 1, QUINCUNX, 3) == pytest.approx(2.0, abs=1e-12)


class TestLemmaConstant:
    def test_closed_form(self):
        assert lemma_constant(2, 2, 1) == pytest.approx(math.sqrt(112 / 3), rel=1e-14)

    @given(st.floats(0.6, 6), st.sampled_from([1, 2, 4]))
    def test_dominates_exact_lattice_sum(self, excess, p):
        # exact C^p = max over xi of sum_{n != 0} |n + xi|^-e, attained at xi = -1/2
        e = p * excess
        if e <= 1.05:
            return
        with mpmath.workdps(30):
            exact = mpmath.zeta(e, mpmath.mpf(1) / 2) + mpmath.zeta(e, mpmath.mpf(3) / 2)
        assert lemma_constant(p, excess, 1) ** p >= float(exact) * (1 - 1e-12)

    def test_exact_sum_grows_with_excess(self):
        # the |n + xi| = 1/2 term alone contributes 2^e, so no decrease is possible
        values = [lemma_constant(2, x, 1) for x in (1, 2, 3, 4)]
        assert values == sorted(values)

    def test_domain_guard(self):
        with pytest.raises(ValueError):
            lemma_constant(2, 0.5, 1)


class TestRatioScan:
    def test_square(self):
        assert max_ratio_scan(lambda x: x**2, 2, grid_points=10001).sup == pytest.approx(1.0)

    def test_scan_is_below_true_supremum(self):
        res = max_ratio_scan(lambda x: np.sin(np.pi * x) ** 2, 2, grid_points=20001)
        assert res.sup <= math.pi**2

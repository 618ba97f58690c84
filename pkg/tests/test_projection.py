"""The operator Q_j: analysis values, both evaluation paths, approximation devices."""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from sklearn.base import clone

from quasiproj.fourier import DecayLaw, TrigPoly, a_norm, lp_norm, synthesize_grid
from quasiproj.generators import (dirichlet, fundamental_dirichlet, ideal_sampling, inverse_dual,
                                  kantorovich, periodized_bspline, smoothed_sampling,
                                  truncated_fejer)
from quasiproj.lattice import DilationMatrix
from quasiproj.projection import (QuasiProjector, analysis_coefficients, apply, apply_sampling,
                                  ball_region, besov_seminorm, best_approx_error, best_approx_l2,
                                  discrete_norm, grid_samples, mollifier, sampling_grid_size,
                                  vallee_poussin)

from conftest import QUINCUNX

M2 = DilationMatrix("2")
Q = DilationMatrix(QUINCUNX)
QUARTER = Fraction(1, 4)


def node_points(M, j):
    adj, D = M.inverse_power(j)
    return M.digits(j) @ adj.T / D


class TestAnalysis:
    def test_constant(self):
        av = analysis_coefficients(TrigPoly.constant(1.0), ideal_sampling(), M2, 3)
        assert np.allclose(av.values, 1) and len(av) == 8

    @pytest.mark.parametrize("M", [M2, Q, DilationMatrix("2,1;0,3")])
    def test_ideal_is_point_evaluation(self, M, rng):
        f = TrigPoly.random(rng, 6, dim=M.dim)
        j = 3
        av = analysis_coefficients(f, ideal_sampling(), M, j)
        assert np.max(np.abs(av.values - f(node_points(M, j)))) < 1e-12

    @pytest.mark.parametrize("M", [M2, Q])
    def test_fft_and_direct_agree(self, M, rng):
        f = TrigPoly.random(rng, 9, dim=M.dim)
        a = kantorovich()
        x = analysis_coefficients(f, a, M, 4, method="fft").values
        y = analysis_coefficients(f, a, M, 4, method="direct").values
        assert np.max(np.abs(x - y)) < 1e-11

    def test_ideal_matches_grid_synthesis(self, rng):
        f = TrigPoly.random(rng, 5)
        av = grid_samples(f, M2, 4)
        grid = synthesize_grid(f, 16)
        assert np.max(np.abs(av.values - grid[av.nodes[:, 0] % 16])) < 1e-12

    def test_kantorovich_is_local_average(self, rng):
        f = TrigPoly.random(rng, 4)
        j = 3
        av = analysis_coefficients(f, kantorovich(), M2, j)
        h = 2.0**-j
        for k, val in zip(M2.digits(j).ravel()[:4], av.values[:4]):
            c = k * h
            re = quad(lambda x: f(np.array([x]))[0].real, c - h / 2, c + h / 2)[0]
            im = quad(lambda x: f(np.array([x]))[0].imag, c - h / 2, c + h / 2)[0]
            assert abs((re + 1j * im) / h - val) < 1e-8


class TestApply:
    def test_constant_reproduced(self):
        res = apply(TrigPoly.constant(1.0), dirichlet(), ideal_sampling(), M2, 3)
        assert len(res.error_coeffs) == 0

    def test_alias_worked_example(self):
        res = apply(TrigPoly.from_dict({(3,): 1.0}), dirichlet(), ideal_sampling(), M2, 1)
        assert res.qf.to_dict() == {(-1,): 1, (1,): 1}
        assert res.error_coeffs.to_dict() == {(-1,): -1, (1,): -1, (3,): 1}

    @pytest.mark.parametrize("M", [M2, Q])
    @pytest.mark.parametrize("j", [2, 4, 6])
    def test_strict_pair_reproduces_band(self, M, j, rng):
        a = kantorovich()
        g = inverse_dual(a, QUARTER)
        band = g.spectrum(M, j)
        f = TrigPoly(band, rng.standard_normal(len(band)) + 1j * rng.standard_normal(len(band)),
                     dim=M.dim)
        err = apply(f, g, a, M, j).error_coeffs
        assert a_norm(err, 2) <= 1e-10 * a_norm(f, 2)

    def test_infinite_spectrum_needs_radius(self):
        from quasiproj.generators import InfiniteSpectrumError
        with pytest.raises(InfiniteSpectrumError):
            apply(TrigPoly.constant(1.0), periodized_bspline(2), smoothed_sampling(), M2, 2)

    @pytest.mark.parametrize("M", [M2, Q])
    def test_interpolation(self, M, rng):
        f = TrigPoly.random(rng, 10, dim=M.dim)
        for j in range(1, 7):
            qf = apply(f, fundamental_dirichlet(), ideal_sampling(), M, j).qf
            x = node_points(M, j)
            assert np.max(np.abs(qf(x) - f(x))) < 1e-10

    @given(st.integers(0, 2**31), st.sampled_from(["dirichlet", "fejer", "inverse_kant"]),
           st.integers(1, 4))
    def test_two_paths_agree(self, seed, family, j):
        rng = np.random.default_rng(seed)
        M = M2 if seed % 2 else Q
        f = TrigPoly.random(rng, 7, dim=M.dim)
        a = kantorovich() if family == "inverse_kant" else ideal_sampling()
        g = {"dirichlet": dirichlet(), "fejer": truncated_fejer(),
             "inverse_kant": inverse_dual(kantorovich(), QUARTER)}[family]
        x = apply(f, g, a, M, j).qf
        y = apply_sampling(f, g, a, M, j)
        assert a_norm(x - y, 2) <= 1e-9 * max(a_norm(x, 2), 1e-300)

    def test_sampling_grid_is_multiple_of_det(self):
        for D, n in [(4, 10), (9, 3), (11, 40)]:
            G = sampling_grid_size(D, n)
            assert G % D == 0 and G >= 2 * n + 1


class TestBestApproximation:
    def test_inside_region_exact(self, rng):
        f = TrigPoly.random(rng, 3)
        assert best_approx_l2(f, ball_region(M2, 4, QUARTER))[1] == 0

    def test_direct_sum(self):
        f = TrigPoly.from_dict({(n,): abs(n) ** -2.0 for n in range(-8, 9) if n})
        E = best_approx_l2(f, lambda k: np.abs(k[:, 0]) < 4)[1]
        assert E == pytest.approx(math.sqrt(2 * sum(n**-4.0 for n in range(4, 9))), rel=1e-14)

    def test_monotone_in_level(self):
        f = DecayLaw(2.0).truncate(200)
        errs = [best_approx_l2(f, ball_region(M2, j, QUARTER))[1] for j in range(1, 9)]
        assert errs == sorted(errs, reverse=True)

    def test_mollifier_plateaus(self):
        xi = np.array([0.0, 0.2, 0.25, 0.5, 0.7])
        v = mollifier(xi, 0.25)
        assert np.array_equal(v[[0, 1, 2]], [1, 1, 1]) and np.array_equal(v[[3, 4]], [0, 0])
        assert np.all(np.diff(mollifier(np.linspace(0.25, 0.5, 50), 0.25)) <= 0)

    def test_vallee_poussin_identity_and_cut(self):
        inner = TrigPoly.from_dict({(1,): 1.0, (-2,): 2.0})
        assert vallee_poussin(inner, 0.25, M2, 3) == inner
        outer = TrigPoly.from_dict({(4,): 1.0})
        assert len(vallee_poussin(outer, 0.25, M2, 3)) == 0

    @given(st.integers(0, 2**31), st.integers(2, 5))
    def test_vallee_poussin_near_best_l2(self, seed, j):
        f = TrigPoly.random(np.random.default_rng(seed), 20)
        err = a_norm(f - vallee_poussin(f, 0.25, M2, j), 2)
        assert err <= best_approx_l2(f, ball_region(M2, j, QUARTER, strict=False))[1] * (1 + 1e-12)

    def test_surrogate_for_sup_norm(self):
        f = DecayLaw(3.0).truncate(64)
        e_inf = best_approx_error(f, M2, 3, p=math.inf)
        assert 0 < e_inf <= lp_norm(f, math.inf)


class TestNorms:
    def test_discrete_constant(self):
        for p in (1, 2, math.inf):
            assert discrete_norm(np.ones(16), p) == 1

    @given(st.integers(0, 2**31), st.integers(2, 5))
    def test_discrete_parseval(self, seed, j):
        rng = np.random.default_rng(seed)
        M = M2 if seed % 2 else Q
        band = M.digits(j, adjoint=True)
        f = TrigPoly(band, rng.standard_normal(len(band)) + 1j * rng.standard_normal(len(band)),
                     dim=M.dim)
        v = grid_samples(f, M, j)
        assert discrete_norm(v, 2) == pytest.approx(a_norm(f, 2), rel=1e-12)

    def test_besov_finite_for_polynomial(self):
        f = TrigPoly.from_dict({(1,): 1.0, (5,): 1.0})
        vals = [besov_seminorm(f, 2, 1.0, nu, M2) for nu in range(0, 6)]
        assert vals == sorted(vals)
        assert vals[-1] == vals[4]  # E vanishes from nu = 3 on

    def test_besov_terms_decay_geometrically(self):
        f = DecayLaw(4.0).truncate(2048)
        terms = [2.0**nu * best_approx_error(f, M2, nu) for nu in range(2, 9)]
        ratios = np.array(terms[1:]) / np.array(terms[:-1])
        assert np.all(ratios < 0.3)


class TestEstimator:
    def test_doc_example(self):
        qp = QuasiProjector("dirichlet", "ideal", [[2]], level=1)
        assert qp.fit_transform(TrigPoly([[3]], [1.0])).to_dict() == {(-1,): 1, (1,): 1}

    def test_params_round_trip(self):
        qp = QuasiProjector("truncated_fejer", "ideal", "2", level=3,
                            generator_params={"delta": QUARTER})
        twin = clone(qp)
        assert twin.get_params() == qp.get_params()
        twin.set_params(level=4)
        assert twin.level == 4

    def test_not_fitted(self):
        with pytest.raises(RuntimeError):
            QuasiProjector().transform(TrigPoly.constant(1.0))

    def test_paths_match_and_batch(self, rng):
        fs = [TrigPoly.random(rng, 6) for _ in range(3)]
        a = QuasiProjector("dirichlet", "kantorovich", "2", level=3).fit()
        b = QuasiProjector("dirichlet", "kantorovich", "2", level=3, path="sampling").fit()
        for x, y in zip(a.transform(fs), b.transform(fs)):
            assert a_norm(x - y, 2) < 1e-10
        assert len(a.error(fs)) == 3

    def test_bad_level(self):
        with pytest.raises(ValueError):
            QuasiProjector(level=0).fit()

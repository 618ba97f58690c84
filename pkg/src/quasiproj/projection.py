"""The quasi-projection operator ``Q_j`` and related approximation devices.

``Q_j f = m^-j sum_{k in D(M^j)} <f, phi~_j(. - M^-j k)> phi_j(. - M^-j k)``.

Two independent evaluations are provided. :func:`apply` works on Fourier
coefficients through the alias sum

    (Q_j f)^(n) = phi_j^(n) sum_l f^(n + M*^j l) conj(phi~_j^(n + M*^j l)),

and :func:`apply_sampling` literally sums translated kernels on an FFT grid.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_dilation, check_exponent, check_level, check_trigpoly
from .fourier import (TrigPoly, a_norm, coefficients_from_grid, in_out_norms, lp_norm,
                      synthesize_grid)
from .generators import (AnalyzerFamily, GeneratorFamily, ideal_sampling, make_analyzer,
                         make_generator)
from .lattice import DilationMatrix, decompose_many

_FFT_LIMIT = 1 << 24


@dataclass(frozen=True)
class AnalysisVector:
    """Analysis values ``<f, phi~_j(. - M^-j k)>`` indexed by ``k in D(M^j)``."""

    M: DilationMatrix
    j: int
    nodes: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def to_dict(self) -> dict:
        return {tuple(int(v) for v in k): complex(c) for k, c in zip(self.nodes, self.values)}


@dataclass
class OperatorResult:
    """``qf = Q_j f`` and ``error_coeffs = f - Q_j f`` with diagnostics."""

    qf: TrigPoly
    error_coeffs: TrigPoly
    diagnostics: dict = field(default_factory=dict)


def generator_spectrum(g: GeneratorFamily, M: DilationMatrix, j: int,
                       spectrum_radius: float | None = None) -> np.ndarray:
    """Frequencies of ``phi_j``; infinite families need ``spectrum_radius``."""
    return g.spectrum(M, j, None if g.finite_spectrum else spectrum_radius)


def _weighted(f: TrigPoly, a: AnalyzerFamily, M: DilationMatrix, j: int) -> np.ndarray:
    return f.coeffs * np.conj(a.rule(M, j, f.freqs))


def _coset_sums(freqs: np.ndarray, weights: np.ndarray, M: DilationMatrix, j: int):
    """Digits of ``freqs`` modulo ``M*^j`` and the weight summed per digit."""
    _, r = decompose_many(M.power(j, adjoint=True), freqs)
    uniq, inv = np.unique(r, axis=0, return_inverse=True)
    sums = np.zeros(len(uniq), dtype=complex)
    np.add.at(sums, inv.ravel(), weights)
    return uniq, sums


def analysis_coefficients(f: TrigPoly, a: AnalyzerFamily, M, j: int,
                          method: str = "auto") -> AnalysisVector:
    """``values[k] = sum_l f^(l) conj(phi~_j^(l)) exp(2 pi i (k, M*^-j l))``.

    Parameters
    ----------
    method : {"auto", "fft", "direct"}
        ``fft`` synthesizes the weighted polynomial on the ``D``-periodic grid
        (``D = |det M^j|``), which is exact at the nodes ``M^-j k``; ``direct``
        sums over coset digits with exact integer phases.
    """
    M = check_dilation(M)
    j = check_level(j)
    f = check_trigpoly(f, M.dim)
    nodes = M.digits(j)
    adj, D = M.inverse_power(j)
    if len(f) == 0:
        return AnalysisVector(M, j, nodes, np.zeros(len(nodes), dtype=complex))
    w = _weighted(f, a, M, j)
    if method == "auto":
        method = "fft" if D ** M.dim <= _FFT_LIMIT else "direct"
    if method == "fft":
        buf = np.zeros((D,) * M.dim, dtype=complex)
        np.add.at(buf, tuple(np.mod(f.freqs, D).T), w)
        grid = np.fft.ifftn(buf) * float(D) ** M.dim
        idx = np.mod(nodes @ adj.T, D)
        values = grid[tuple(idx.T)]
    elif method == "direct":
        digits, sums = _coset_sums(f.freqs, w, M, j)
        adj_star, D_star = M.inverse_power(j, adjoint=True)
        red = np.mod(digits @ adj_star.T, D_star)
        values = np.empty(len(nodes), dtype=complex)
        step = max(1, (1 << 22) // max(1, len(digits)))
        for s in range(0, len(nodes), step):
            ph = np.mod(nodes[s:s + step] @ red.T, D_star)
            values[s:s + step] = np.exp(2j * np.pi * ph / D_star) @ sums
    else:
        raise ValueError(f"unknown method {method!r}")
    return AnalysisVector(M, j, nodes, values)


def grid_samples(f: TrigPoly, M, j: int) -> AnalysisVector:
    """Point values ``f(M^-j k)`` on the level-``j`` grid."""
    return analysis_coefficients(f, ideal_sampling(), M, j)


def apply(f: TrigPoly, g: GeneratorFamily, a: AnalyzerFamily, M, j: int,
          spectrum_radius: float | None = None) -> OperatorResult:
    """``Q_j f`` from the Fourier-coefficient alias formula.

    Raises
    ------
    InfiniteSpectrumError
        If ``g`` is not a trigonometric polynomial family and
        ``spectrum_radius`` is not given.
    """
    t0 = time.perf_counter()
    M = check_dilation(M)
    j = check_level(j)
    f = check_trigpoly(f, M.dim)
    spec = generator_spectrum(g, M, j, spectrum_radius)
    if len(f) == 0 or len(spec) == 0:
        qf = TrigPoly.zero(M.dim)
    else:
        digits, sums = _coset_sums(f.freqs, _weighted(f, a, M, j), M, j)
        _, r_spec = decompose_many(M.power(j, adjoint=True), spec)
        both = np.concatenate([digits, r_spec])
        _, inv = np.unique(both, axis=0, return_inverse=True)
        inv = inv.ravel()
        table = np.zeros(inv.max() + 1, dtype=complex)
        table[inv[: len(digits)]] = sums
        qf = TrigPoly(spec, g.rule(M, j, spec) * table[inv[len(digits):]], dim=M.dim)
    err = f - qf
    diag = {"spectrum_size": int(len(spec)), "seconds": time.perf_counter() - t0}
    if spectrum_radius is not None and not g.finite_spectrum:
        diag["spectrum_radius"] = float(spectrum_radius)
    return OperatorResult(qf, err, diag)


def _smooth_size(n: int) -> bool:
    for p in (2, 3, 5, 7):
        while n % p == 0:
            n //= p
    return n == 1


def sampling_grid_size(D: int, max_freq: int, oversample: int = 1) -> int:
    """Smallest multiple of ``D`` above ``oversample * (2 max_freq + 1)``.

    When ``D`` itself is 7-smooth the multiple is bumped to a 7-smooth size.
    """
    need = oversample * (2 * int(max_freq) + 1)
    t = max(1, -(-need // D))
    if _smooth_size(D):
        while not _smooth_size(t):
            t += 1
    return D * t


def apply_sampling(f: TrigPoly, g: GeneratorFamily, a: AnalyzerFamily, M, j: int,
                   grid_oversample: int = 1, spectrum_radius: float | None = None) -> TrigPoly:
    """``Q_j f`` by summing translated kernels ``phi_j(x - M^-j k)`` on a grid.

    The grid size is a multiple of ``|det M^j|`` so every translate is an
    exact cyclic shift; coefficients are read back by a forward FFT.
    """
    M = check_dilation(M)
    j = check_level(j)
    f = check_trigpoly(f, M.dim)
    spec = generator_spectrum(g, M, j, spectrum_radius)
    if len(spec) == 0:
        return TrigPoly.zero(M.dim)
    av = analysis_coefficients(f, a, M, j)
    adj, D = M.inverse_power(j)
    G = sampling_grid_size(D, int(np.max(np.abs(spec))), grid_oversample)
    kernel = synthesize_grid(TrigPoly(spec, g.rule(M, j, spec), dim=M.dim), G)
    shifts = (av.nodes @ adj.T) * (G // D)
    total = np.zeros_like(kernel)
    for value, shift in zip(av.values, shifts):
        if value != 0:
            total += value * np.roll(kernel, tuple(int(s) for s in shift), axis=tuple(range(M.dim)))
    total /= float(len(av))
    return coefficients_from_grid(total)


# best approximation and de la Vallee-Poussin means ----------------------------------

def ball_region(M, j: int, radius: float, adjoint: bool = False, strict: bool = True) -> Callable:
    """Predicate ``|M^-j k| < radius`` (the class of ``radius * M^j``)."""
    M = check_dilation(M)
    return lambda k: M.in_ball(j, k, radius, adjoint=adjoint, strict=strict)


def digit_region(M, j: int, adjoint: bool = True) -> Callable:
    """Predicate ``k in D(M*^j)``."""
    M = check_dilation(M)
    return lambda k: M.in_digits(j, k, adjoint=adjoint)


def best_approx_l2(f: TrigPoly, region: Callable) -> tuple[TrigPoly, float]:
    """Best ``L_2`` approximation with spectrum in ``region`` and its error."""
    f = check_trigpoly(f)
    mask = np.asarray(region(f.freqs), dtype=bool) if len(f) else np.zeros(0, dtype=bool)
    rest = f.restrict(~mask)
    return f.restrict(mask), a_norm(rest, 2, 0)


def _bump(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def mollifier(xi, delta: float) -> np.ndarray:
    """Smooth radial cutoff: 1 on ``|xi| <= delta``, 0 on ``|xi| >= 1/2``.

    The bridge ``h(1-t) / (h(1-t) + h(t))`` with ``h(t) = exp(-1/t)`` is
    infinitely differentiable.
    """
    if not 0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    xi = np.asarray(xi, dtype=float)
    r = np.sqrt(np.sum(xi**2, axis=-1)) if xi.ndim > 1 else np.abs(xi)
    t = np.clip((r - delta) / (0.5 - delta), 0.0, 1.0)
    up, down = _bump(1.0 - t), _bump(t)
    return up / (up + down)


def vallee_poussin(f: TrigPoly, delta: float, M, j: int,
                   profile: Callable | None = None) -> TrigPoly:
    """``V_j f = sum_k v(M^-j k) f^(k) e^{2 pi i (k, x)}`` with a smooth cutoff ``v``."""
    M = check_dilation(M)
    f = check_trigpoly(f, M.dim)
    if len(f) == 0:
        return f
    xi = M.scaled(j, f.freqs, adjoint=False)
    v = (profile or (lambda x: mollifier(x, delta)))(xi)
    return f.multiply_coeffs(v)


def discrete_norm(v, p: float) -> float:
    """``(m^-j sum_k |a_k|^p)^(1/p)``, the maximum for ``p = inf``."""
    vals = np.abs(v.values if isinstance(v, AnalysisVector) else np.asarray(v))
    p = check_exponent(p)
    if vals.size == 0:
        return 0.0
    if math.isinf(p):
        return float(vals.max())
    top = vals.max()
    if top == 0:
        return 0.0
    return float(top * np.mean((vals / top) ** p) ** (1.0 / p))


def best_approx_error(f: TrigPoly, M, nu: int, p: float = 2, delta: float = 0.25,
                      oversample: int = 16) -> float:
    """``E_{M^nu}(f)_p``: exact for ``p = 2``; de la Vallee-Poussin surrogate otherwise."""
    M = check_dilation(M)
    if p == 2:
        return best_approx_l2(f, ball_region(M, nu, 1.0))[1]
    return lp_norm(f - vallee_poussin(f, delta, M, nu), p, oversample)


def besov_seminorm(f: TrigPoly, p: float, s: float, nu_max: int, M,
                   oversample: int = 16) -> float:
    """Truncated ``||f||_p + sum_{nu=0}^{nu_max} m^{(s/d) nu} E_{M^nu}(f)_p``.

    A finite diagnostic; for ``p`` other than 2 the best approximation is the
    de la Vallee-Poussin surrogate.
    """
    M = check_dilation(M)
    p = check_exponent(p)
    m, d = M.det_abs, M.dim
    total = lp_norm(f, p, oversample)
    for nu in range(0, int(nu_max) + 1):
        E = best_approx_error(f, M, nu, p, oversample=oversample)
        total += m ** (s / d * nu) * E
    return float(total)


# estimator facade --------------------------------------------------------------------

class QuasiProjector(BaseEstimator, TransformerMixin):
    """Estimator-style wrapper around :func:`apply`.

    Parameters
    ----------
    generator : str or GeneratorFamily
    analyzer : str or AnalyzerFamily
    dilation : array_like, str or DilationMatrix
    level : int
    generator_params, analyzer_params : dict, optional
        Keyword parameters when the families are given by name.
    spectrum_radius : float, optional
        Truncation radius for infinite-spectrum generators.
    path : {"fourier", "sampling"}
        Which evaluation of the operator ``transform`` uses.

    Examples
    --------
    >>> from quasiproj import QuasiProjector, TrigPoly
    >>> qp = QuasiProjector("dirichlet", "ideal", [[2]], level=1)
    >>> qp.fit_transform(TrigPoly([[3]], [1.0])).to_dict()
    {(-1,): (1+0j), (1,): (1+0j)}
    """

    def __init__(self, generator="dirichlet", analyzer="ideal", dilation=((2,),), level=1,
                 generator_params=None, analyzer_params=None, spectrum_radius=None,
                 path="fourier"):
        self.generator = generator
        self.analyzer = analyzer
        self.dilation = dilation
        self.level = level
        self.generator_params = generator_params
        self.analyzer_params = analyzer_params
        self.spectrum_radius = spectrum_radius
        self.path = path

    def _families(self):
        a = self.analyzer
        if isinstance(a, str):
            a = make_analyzer(a, **(self.analyzer_params or {}))
        g = self.generator
        if isinstance(g, str):
            g = make_generator(g, analyzer=a, **(self.generator_params or {}))
        return g, a

    def fit(self, X=None, y=None):
        """Validate parameters and resolve the kernel families (``X`` is unused)."""
        self.dilation_ = check_dilation(self.dilation)
        self.level_ = check_level(self.level)
        if self.path not in ("fourier", "sampling"):
            raise ValueError(f"unknown path {self.path!r}")
        self.generator_, self.analyzer_ = self._families()
        self.spectrum_ = generator_spectrum(self.generator_, self.dilation_, self.level_,
                                            self.spectrum_radius)
        return self

    def _one(self, f: TrigPoly) -> TrigPoly:
        check_trigpoly(f, self.dilation_.dim)
        if self.path == "sampling":
            return apply_sampling(f, self.generator_, self.analyzer_, self.dilation_,
                                  self.level_, spectrum_radius=self.spectrum_radius)
        return apply(f, self.generator_, self.analyzer_, self.dilation_, self.level_,
                     self.spectrum_radius).qf

    def transform(self, X):
        """``Q_j f`` for a TrigPoly or a list of them."""
        if not hasattr(self, "generator_"):
            raise RuntimeError("QuasiProjector is not fitted; call fit first")
        if isinstance(X, TrigPoly):
            return self._one(X)
        return [self._one(f) for f in X]

    def error(self, X, q: float = 2, alpha: float = 0.0):
        """``||f - Q_j f||_{A_q^alpha}`` for a TrigPoly or a list of them."""
        single = isinstance(X, TrigPoly)
        fs = [X] if single else list(X)
        out = [a_norm(f - q_f, q, alpha) for f, q_f in zip(fs, [self._one(f) for f in fs])]
        return out[0] if single else out

    def in_out(self, f: TrigPoly, q: float = 2, alpha: float = 0.0):
        """In/Out split of ``f`` at the fitted level."""
        return in_out_norms(f, q, alpha, self.dilation_, self.level_)

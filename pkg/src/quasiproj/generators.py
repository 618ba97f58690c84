"""Synthesis kernels ``phi_j`` and analysis functionals ``phi~_j``.

Every family is a rule ``(M, j, k) -> coefficient`` over integer frequencies
``k``. Families whose coefficients depend only on ``xi = M*^{-j} k`` also
expose a one-dimensional ``profile(x, ops)`` that can be evaluated either
with numpy or with mpmath, the latter for high-precision ratio scans.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

import mpmath
import numpy as np

from .lattice import DilationMatrix, as_dilation


class FamilyError(ValueError):
    """Invalid family parameters or unsupported dilation."""


class ConstructionError(FamilyError):
    """A derived family could not be built; ``witness`` locates the failure."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class InfiniteSpectrumError(FamilyError):
    """The family is not a trigonometric polynomial and no radius was given."""


# arithmetic backends for the 1-D profiles --------------------------------

class _NumpyOps:
    pi = np.pi
    sin = staticmethod(np.sin)
    cos = staticmethod(np.cos)
    name = "numpy"

    @staticmethod
    def const(v):
        return float(v)

    @staticmethod
    def sinc(t):
        t = np.asarray(t, dtype=float)
        small = np.abs(t) < 1e-4
        safe = np.where(small, 1.0, t)
        t2 = t * t
        return np.where(small, 1.0 - t2 / 6.0 + t2 * t2 / 120.0, np.sin(safe) / safe)


class _MpOps:
    pi = property(lambda self: mpmath.mp.pi)
    name = "mpmath"

    @staticmethod
    def sin(x):
        return mpmath.sin(x)

    @staticmethod
    def cos(x):
        return mpmath.cos(x)

    @staticmethod
    def const(v):
        v = Fraction(v) if not isinstance(v, Fraction) else v
        return mpmath.mpf(v.numerator) / v.denominator

    @staticmethod
    def sinc(t):
        return mpmath.mpf(1) if t == 0 else mpmath.sin(t) / t


NUMPY = _NumpyOps()
MPMATH = _MpOps()


def sinc(t):
    """``sin(t)/t`` with the removable point filled and a series branch near 0."""
    return NUMPY.sinc(t)


def _exact(v):
    """Keep rationals exact (Fraction) and pass floats through."""
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    return v


# metadata -----------------------------------------------------------------

@dataclass(frozen=True)
class ClassB:
    """Spectrum inside ``M*^j B_R(0)`` and outside ``M*^j B_delta(n)``, ``n != 0``."""

    delta: float
    radius: float
    per_dim: bool = False

    def radius_for(self, dim: int) -> float:
        """Effective ``R``; ``per_dim`` scales it by ``sqrt(d)``."""
        return self.radius * math.sqrt(dim) if self.per_dim else self.radius


def _box(radius_per_axis) -> np.ndarray:
    axes = [np.arange(-int(r), int(r) + 1) for r in radius_per_axis]
    return np.array(np.meshgrid(*axes, indexing="ij")).reshape(len(axes), -1).T.astype(np.int64)


def _ball_box(M: DilationMatrix, j: int, rho: float) -> np.ndarray:
    """All ``k`` with ``|M*^{-j} k| <= rho`` lie in this box."""
    r = int(math.floor(M.norm_power(j, adjoint=True) * rho)) + 1
    return _box([r] * M.dim)


def _check_level(j: int) -> None:
    if int(j) != j or j < 0:
        raise FamilyError(f"level j must be a non-negative integer, got {j!r}")


class GeneratorFamily:
    """Fourier coefficients of a synthesis kernel sequence ``{phi_j}``.

    Parameters
    ----------
    name : str
    params : dict
        Family parameters, kept for reporting.
    value : callable
        ``value(M, j, k) -> complex array`` without the support cut.
    support : callable or None
        ``support(M, j, k) -> bool mask``; ``None`` marks an infinite spectrum.
    support_rho : float or None
        Euclidean radius in ``xi`` containing the support (for enumeration).
    bound : float
        Declared uniform bound ``C'_phi`` on ``|phi_j^(k)|``.
    sf_order : float
        Claimed Strang-Fix order (``inf`` for compactly supported symbols).
    class_b : ClassB or None
    sf_bound : callable or None
        ``sf_bound(n, s) -> b_n`` closed-form Strang-Fix constant.
    profile : callable or None
        ``profile(x, ops)`` for 1-D families.
    dims : tuple of int or None
        Supported dimensions (``None`` means any).
    """

    kind = "generator"

    def __init__(self, name: str, params: Mapping, value: Callable, support: Callable | None,
                 support_rho: float | None, bound: float, sf_order: float,
                 class_b: ClassB | None = None, sf_bound: Callable | None = None,
                 profile: Callable | None = None, dims: tuple | None = None,
                 spectrum_fn: Callable | None = None):
        self.name = name
        self.params = dict(params)
        self._value = value
        self._support = support
        self._rho = support_rho
        self.bound = float(bound)
        self.sf_order = sf_order
        self.class_b = class_b
        self._sf_bound = sf_bound
        self.profile = profile
        self.dims = dims
        self._spectrum_fn = spectrum_fn
        self._cache: dict = {}

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.name}({args})"

    @property
    def finite_spectrum(self) -> bool:
        return self._support is not None

    def _check_dim(self, M: DilationMatrix) -> None:
        if self.dims is not None and M.dim not in self.dims:
            raise FamilyError(f"{self.name} supports d in {self.dims} only, got d={M.dim}")

    def support(self, M, j: int, k) -> np.ndarray:
        M = as_dilation(M)
        k = np.asarray(k, dtype=np.int64).reshape(-1, M.dim)
        if self._support is None:
            return np.ones(len(k), dtype=bool)
        return self._support(M, j, k)

    def rule(self, M, j: int, k) -> np.ndarray:
        """``phi_j^(k)`` for each row of ``k``."""
        M = as_dilation(M)
        self._check_dim(M)
        _check_level(j)
        k = np.asarray(k, dtype=np.int64).reshape(-1, M.dim)
        out = np.zeros(len(k), dtype=complex)
        mask = self.support(M, j, k)
        if mask.any():
            out[mask] = self._value(M, j, k[mask])
        return out

    def spectrum(self, M, j: int, radius: float | None = None) -> np.ndarray:
        """Sorted frequencies with nonzero coefficient (``|k| <= radius`` if infinite)."""
        M = as_dilation(M)
        self._check_dim(M)
        key = (M, int(j), radius)
        if key in self._cache:
            return self._cache[key]
        if self._support is None:
            if radius is None:
                raise InfiniteSpectrumError(
                    f"{self.name} has infinite spectrum; pass a truncation radius")
            cand = _box([int(radius)] * M.dim)
            cand = cand[np.sum(cand.astype(float) ** 2, axis=1) <= float(radius) ** 2]
        elif self._spectrum_fn is not None:
            cand = self._spectrum_fn(M, j)
        else:
            cand = _ball_box(M, j, self._rho)
        vals = self.rule(M, j, cand)
        spec = cand[vals != 0]
        order = np.lexsort(spec.T[::-1]) if len(spec) else np.zeros(0, dtype=int)
        spec = spec[order]
        spec.flags.writeable = False
        if len(self._cache) > 64:
            self._cache.clear()
        self._cache[key] = spec
        return spec

    def sf_bound(self, n, s: float) -> float | None:
        if self._sf_bound is None:
            return None
        return self._sf_bound(n, s)


class AnalyzerFamily:
    """Fourier coefficients of an analysis distribution sequence ``{phi~_j}``.

    Parameters
    ----------
    name : str
    params : dict
    value : callable
        ``value(M, j, k) -> complex array``.
    growth_order : float
        ``N`` in the growth condition.
    growth_constant : float
        Declared ``C_phi~``.
    profile : callable or None
        ``profile(x, ops)`` for 1-D families.
    space_density : callable or None
        ``space_density(M, j, x) -> |phi~_j(x)|`` on points of the torus.
    """

    kind = "analyzer"

    def __init__(self, name: str, params: Mapping, value: Callable, growth_order: float,
                 growth_constant: float, profile: Callable | None = None,
                 space_density: Callable | None = None, dims: tuple | None = None,
                 scale: complex = 1.0):
        self.name = name
        self.params = dict(params)
        self._value = value
        self.growth_order = growth_order
        self.growth_constant = float(growth_constant)
        self._profile = profile
        self._density = space_density
        self.dims = dims
        self.scale = scale

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.params.items())
        tag = f"{self.name}({args})"
        return tag if self.scale == 1 else f"{self.scale}*{tag}"

    def rule(self, M, j: int, k) -> np.ndarray:
        M = as_dilation(M)
        if self.dims is not None and M.dim not in self.dims:
            raise FamilyError(f"{self.name} supports d in {self.dims} only, got d={M.dim}")
        _check_level(j)
        k = np.asarray(k, dtype=np.int64).reshape(-1, M.dim)
        return self.scale * np.asarray(self._value(M, j, k), dtype=complex)

    @property
    def profile(self):
        if self._profile is None:
            return None
        base, c = self._profile, self.scale
        return base if c == 1 else (lambda x, ops=NUMPY: ops.const(c) * base(x, ops))

    @property
    def has_density(self) -> bool:
        return self._density is not None

    def space_density(self, M, j: int, x) -> np.ndarray:
        if self._density is None:
            raise FamilyError(f"{self.name} has no space-domain density")
        M = as_dilation(M)
        x = np.asarray(x, dtype=float).reshape(-1, M.dim)
        return abs(self.scale) * self._density(M, j, x)

    def scaled(self, c) -> "AnalyzerFamily":
        """The analyzer ``c * phi~_j``."""
        return AnalyzerFamily(self.name, self.params, self._value, self.growth_order,
                              abs(c) * self.growth_constant, self._profile, self._density,
                              self.dims, self.scale * c)

    def __rmul__(self, c):
        return self.scaled(c)


# generator families ---------------------------------------------------------

def _xi(M: DilationMatrix, j: int, k: np.ndarray) -> np.ndarray:
    return M.scaled(j, k, adjoint=True)


def _ball_support(radius):
    return lambda M, j, k: M.in_ball(j, k, radius, adjoint=True)


def _check_delta(delta, upper_closed: bool) -> Fraction | float:
    delta = _exact(delta)
    ok = 0 < delta <= 0.5 if upper_closed else 0 < delta < 0.5
    if not ok:
        rng = "(0, 1/2]" if upper_closed else "(0, 1/2)"
        raise FamilyError(f"delta must lie in {rng}, got {delta}")
    return delta


def _avoid_radius(delta) -> float:
    """Class-B avoidance radius for a kernel supported in ``|xi| <= delta``."""
    return float(delta + Fraction(1, 2)) / 2 if delta < 0.5 else 0.25


def _class_b_sf_bound(bound: float, delta: float):
    return lambda n, s: bound * float(delta) ** (-s) if np.any(np.asarray(n) != 0) else None


def dirichlet(delta=Fraction(1, 2)) -> GeneratorFamily:
    """Indicator of the ball ``|M*^{-j} k| <= delta``."""
    delta = _check_delta(delta, upper_closed=True)
    return GeneratorFamily(
        "dirichlet", {"delta": delta},
        value=lambda M, j, k: np.ones(len(k), dtype=complex),
        support=_ball_support(delta), support_rho=float(delta), bound=1.0,
        sf_order=math.inf, class_b=ClassB(_avoid_radius(delta), float(delta)),
        sf_bound=_class_b_sf_bound(1.0, delta),
    )


def fundamental_dirichlet() -> GeneratorFamily:
    """Indicator of the digit set ``D(M*^j)``: the fundamental interpolant."""
    return GeneratorFamily(
        "fundamental_dirichlet", {},
        value=lambda M, j, k: np.ones(len(k), dtype=complex),
        support=lambda M, j, k: M.in_digits(j, k, adjoint=True), support_rho=None,
        bound=1.0, sf_order=math.inf, class_b=ClassB(0.25, 0.5, per_dim=True),
        spectrum_fn=lambda M, j: M.digits(j, adjoint=True),
    )


def _maxnorm_exact(M, j, k):
    u, D = M.scaled_exact(j, k, adjoint=True)
    return np.max(np.abs(u), axis=1), D


def truncated_fejer(delta=Fraction(1, 4), c_f=1.0) -> GeneratorFamily:
    """``1 - C_F ||M*^{-j} k||_inf`` on the ball ``|M*^{-j} k| <= delta``."""
    delta = _check_delta(delta, upper_closed=False)
    c_f = _exact(c_f)
    if not c_f > 0:
        raise FamilyError("C_F must be positive")

    def value(M, j, k):
        num, D = _maxnorm_exact(M, j, k)
        return 1.0 - float(c_f) * num / D

    bound = max(1.0, float(c_f * delta) - 1.0)
    return GeneratorFamily(
        "truncated_fejer", {"delta": delta, "c_f": c_f}, value=value,
        support=_ball_support(delta), support_rho=float(delta), bound=bound,
        sf_order=math.inf, class_b=ClassB(_avoid_radius(delta), float(delta)),
        sf_bound=_class_b_sf_bound(bound, delta),
    )


def fejer_full(c_f=1.0) -> GeneratorFamily:
    """``1 - C_F ||M*^{-j} k||_inf`` on the cube ``||M*^{-j} k||_inf <= 1``."""
    c_f = _exact(c_f)
    if not c_f > 0:
        raise FamilyError("C_F must be positive")

    def support(M, j, k):
        num, D = _maxnorm_exact(M, j, k)
        return num <= D

    def value(M, j, k):
        num, D = _maxnorm_exact(M, j, k)
        return 1.0 - float(c_f) * num / D

    def sf_bound(n, s):
        # |phi(M*^j n + r)| <= |M*^{-j} r| for ||n||_inf = 1 when C_F = 1
        return 1.0 if np.max(np.abs(np.atleast_1d(n))) == 1 else 0.0

    return GeneratorFamily(
        "fejer_full", {"c_f": c_f}, value=value, support=support, support_rho=None,
        bound=max(1.0, abs(1.0 - float(c_f))), sf_order=1,
        sf_bound=sf_bound if c_f == 1 else None,
        spectrum_fn=lambda M, j: _ball_box(M, j, math.sqrt(M.dim)),
    )


def _scalar_check(M: DilationMatrix, name: str) -> None:
    if M.dim != 1:
        raise FamilyError(f"{name} is defined for d = 1 with a scalar dilation only")


def _from_profile(profile):
    def value(M, j, k):
        _scalar_check(M, "this family")
        return profile(_xi(M, j, k)[:, 0], NUMPY)
    return value


def periodized_bspline(s: int = 2) -> GeneratorFamily:
    """Periodized B-spline of even order ``s``: ``sinc(pi xi)^s``."""
    if int(s) != s or s <= 0 or s % 2:
        raise FamilyError(f"B-spline order must be an even positive integer, got {s}")
    s = int(s)

    def profile(x, ops=NUMPY):
        return ops.sinc(ops.pi * x) ** s

    return GeneratorFamily(
        "bspline", {"s": s}, value=_from_profile(profile), support=None, support_rho=None,
        bound=1.0, sf_order=s,
        sf_bound=lambda n, t: 2.0**t / (2.0 * abs(int(np.atleast_1d(n)[0])) - 1.0) ** t,
        profile=profile, dims=(1,),
    )


def shifted_spline_combo(s: int = 4, u1=Fraction(11, 6), u2=Fraction(-5, 6)) -> GeneratorFamily:
    """``(u1 + u2 cos(2 pi xi)) sinc(pi xi)^s``: shifted B-spline combination."""
    if int(s) != s or s <= 0 or s % 2:
        raise FamilyError(f"spline order must be an even positive integer, got {s}")
    s = int(s)
    u1, u2 = _exact(u1), _exact(u2)

    def profile(x, ops=NUMPY):
        return (ops.const(u1) + ops.const(u2) * ops.cos(2 * ops.pi * x)) * ops.sinc(ops.pi * x) ** s

    amp = abs(float(u1)) + abs(float(u2))
    return GeneratorFamily(
        "combo", {"s": s, "u1": u1, "u2": u2}, value=_from_profile(profile), support=None,
        support_rho=None, bound=amp, sf_order=s,
        sf_bound=lambda n, t: amp * 2.0**t / (2.0 * abs(int(np.atleast_1d(n)[0])) - 1.0) ** t,
        profile=profile, dims=(1,),
    )


def inverse_dual(analyzer: "AnalyzerFamily", delta=Fraction(1, 4), scan_points: int = 20001
                 ) -> GeneratorFamily:
    """Strictly compatible kernel: ``conj(phi^) = 1 / phi~^`` on ``|xi| <= delta``.

    The lower bound ``c`` of ``|phi~^|`` on the region is estimated by a dense
    scan in ``xi`` (1-D profile) or on levels 1..6 of the dyadic grid, and
    every rule evaluation re-checks the values it divides by.

    Raises
    ------
    ConstructionError
        If the analyzer vanishes on the region; ``witness`` holds the point.
    """
    delta = _check_delta(delta, upper_closed=True)
    c_low = None
    prof = analyzer.profile
    if prof is not None:
        x = np.linspace(-float(delta), float(delta), scan_points)
        vals = np.abs(prof(x, NUMPY))
        i = int(np.argmin(vals))
        c_low = float(vals[i])
        if c_low <= 1e-12:
            raise ConstructionError(
                f"{analyzer!r} vanishes at xi = {x[i]:.6g} inside |xi| <= {delta}", witness=x[i])

    def value(M, j, k):
        a = analyzer.rule(M, j, k)
        small = np.abs(a) <= 1e-12
        if small.any():
            bad = k[np.argmax(small)]
            raise ConstructionError(
                f"{analyzer!r} vanishes at j={j}, k={bad.tolist()}", witness=(j, bad.tolist()))
        return 1.0 / np.conj(a)

    bound = 1.0 / c_low if c_low else math.inf
    return GeneratorFamily(
        "inverse_dual", {"analyzer": repr(analyzer), "delta": delta}, value=value,
        support=_ball_support(delta), support_rho=float(delta), bound=bound,
        sf_order=math.inf, class_b=ClassB(_avoid_radius(delta), float(delta)),
        sf_bound=_class_b_sf_bound(bound, delta), dims=analyzer.dims,
    )


# analyzer families ------------------------------------------------------------

def ideal_sampling() -> AnalyzerFamily:
    """Point evaluation: ``phi~^ == 1``."""
    return AnalyzerFamily(
        "ideal", {}, value=lambda M, j, k: np.ones(len(k), dtype=complex),
        growth_order=0, growth_constant=1.0,
        profile=lambda x, ops=NUMPY: ops.const(1) + 0 * x,
    )


def smoothed_sampling() -> AnalyzerFamily:
    """Three-point average ``f(x)/2 + f(x + h)/4 + f(x - h)/4``, ``h = M^{-j}``."""
    def profile(x, ops=NUMPY):
        return ops.const(Fraction(1, 2)) + ops.cos(2 * ops.pi * x) / 2

    def value(M, j, k):
        _scalar_check(M, "smoothed_sampling")
        return profile(_xi(M, j, k)[:, 0], NUMPY)

    return AnalyzerFamily("smoothed", {}, value=value, growth_order=0, growth_constant=1.0,
                          profile=profile, dims=(1,))


def differential(coeffs, order: int | None = None) -> AnalyzerFamily:
    """Symbol ``sum_beta c_beta (2 pi i xi)^beta`` of a differential operator.

    Parameters
    ----------
    coeffs : sequence or mapping
        For ``d = 1`` a list ``[c_0, c_1, ...]``; for ``d > 1`` a mapping from
        multi-indices to coefficients.
    order : int, optional
        Growth order ``N``; defaults to the highest nonzero degree.
    """
    if isinstance(coeffs, Mapping):
        terms = {tuple(int(b) for b in np.atleast_1d(beta)): _exact(c) for beta, c in coeffs.items()}
    else:
        terms = {(i,): _exact(c) for i, c in enumerate(coeffs)}
    terms = {b: c for b, c in terms.items() if c != 0}
    dim = len(next(iter(terms))) if terms else 1
    zero = (0,) * dim
    if terms.get(zero, 0) == 0:
        raise FamilyError("differential analyzer needs c_0 != 0")
    degree = max(sum(b) for b in terms)
    N = degree if order is None else int(order)
    if N < degree:
        raise FamilyError("declared order below the symbol degree")
    # outside D(M*^j) |xi| >= 1/2, inside |xi| <= sqrt(d)/2
    growth = max(
        sum(abs(float(c)) * (2 * math.pi) ** sum(b) * 2.0 ** (N - sum(b)) for b, c in terms.items()),
        sum(abs(float(c)) * (math.pi * math.sqrt(dim)) ** sum(b) for b, c in terms.items()),
    )
    i_pow = (1, 1j, -1, -1j)

    def profile(x, ops=NUMPY):
        total = 0
        for (b,), c in terms.items():
            unit = i_pow[b % 4]
            if ops is not NUMPY and isinstance(unit, complex):
                unit = mpmath.mpc(unit.real, unit.imag)
            total = total + unit * ops.const(c) * (2 * ops.pi * x) ** b
        return total

    def value(M, j, k):
        if M.dim != dim:
            raise FamilyError(f"coefficients are {dim}-dimensional, M is {M.dim}-dimensional")
        xi = _xi(M, j, k)
        out = np.zeros(len(k), dtype=complex)
        for b, c in terms.items():
            mono = np.prod((2j * np.pi * xi) ** np.array(b), axis=1)
            out += float(c) * mono
        return out

    label = {"coeffs": [str(_exact(c)) for c in coeffs], "order": N} if dim == 1 else {
        "coeffs": {str(b): str(c) for b, c in terms.items()}, "order": N}
    return AnalyzerFamily("differential", label, value=value, growth_order=N,
                          growth_constant=growth, profile=profile if dim == 1 else None,
                          dims=(dim,))


def _kantorovich_density(M: DilationMatrix, j: int, x: np.ndarray) -> np.ndarray:
    # m^j on the periodized cell M^{-j}[-1/2,1/2)^d
    Mj = M.power(j).astype(float)
    x = x - np.floor(x + 0.5)
    out = np.zeros(len(x))
    for z in _box([1] * M.dim):
        y = (x + z) @ Mj.T
        inside = np.all((y >= -0.5) & (y < 0.5), axis=1)
        out += inside
    return float(M.det_abs) ** j * out


def kantorovich() -> AnalyzerFamily:
    """Normalized indicator ``m^j chi`` of ``M^{-j}[-1/2, 1/2)^d``: local averages."""
    def profile(x, ops=NUMPY):
        return ops.sinc(ops.pi * x)

    def value(M, j, k):
        xi = _xi(M, j, k)
        return np.prod(NUMPY.sinc(np.pi * xi), axis=1)

    return AnalyzerFamily("kantorovich", {}, value=value, growth_order=0, growth_constant=1.0,
                          profile=profile, space_density=_kantorovich_density)


# registries --------------------------------------------------------------------

GENERATORS = {
    "dirichlet": dirichlet,
    "fundamental_dirichlet": fundamental_dirichlet,
    "truncated_fejer": truncated_fejer,
    "fejer_full": fejer_full,
    "bspline": periodized_bspline,
    "combo": shifted_spline_combo,
    "inverse_dual": inverse_dual,
}

ANALYZERS = {
    "ideal": ideal_sampling,
    "smoothed": smoothed_sampling,
    "differential": differential,
    "kantorovich": kantorovich,
}


def make_analyzer(name: str, **params) -> AnalyzerFamily:
    """Build an analyzer from its registry name and keyword parameters."""
    try:
        factory = ANALYZERS[name]
    except KeyError:
        raise FamilyError(f"unknown analyzer {name!r}; known: {sorted(ANALYZERS)}") from None
    return factory(**params)


def make_generator(name: str, analyzer: AnalyzerFamily | None = None, **params) -> GeneratorFamily:
    """Build a generator; ``inverse_dual`` takes the paired ``analyzer``."""
    try:
        factory = GENERATORS[name]
    except KeyError:
        raise FamilyError(f"unknown generator {name!r}; known: {sorted(GENERATORS)}") from None
    if name == "inverse_dual":
        if analyzer is None:
            raise FamilyError("inverse_dual needs an analyzer")
        return factory(analyzer, **params)
    return factory(**params)


def compatibility_defect(g: GeneratorFamily, a: AnalyzerFamily):
    """Profile ``x -> 1 - phi^(x) conj(phi~^(x))`` of a 1-D pair (``ops``-generic)."""
    if g.profile is None or a.profile is None:
        raise FamilyError("both families need a 1-D profile")
    gp, ap = g.profile, a.profile

    def defect(x, ops=NUMPY):
        prod = gp(x, ops) * (np.conj(ap(x, ops)) if ops is NUMPY else mpmath.conj(ap(x, ops)))
        return 1 - prod

    return defect

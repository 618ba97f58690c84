"""Empirical verification of the structural conditions on kernel pairs.

Each check is a supremum over an explicit finite window of levels and
frequencies. Constants are therefore "empirical over the window" and are
compared against declared or closed-form bounds, never extrapolated.
"""
from __future__ import annotations

import inspect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np

from ._parallel import ordered_map
from .generators import (MPMATH, NUMPY, AnalyzerFamily, FamilyError, GeneratorFamily,
                         compatibility_defect)
from .lattice import DilationMatrix, as_dilation

ZERO_TOL = 1e-12
RATIO_SLACK = 1e-9

CSV_HEADER = "condition,order,constant,witness,verdict"


@dataclass(frozen=True)
class Window:
    """Tested levels ``j_min..j_max`` and frequency ranges.

    ``freq_radius`` bounds ``|k_i|`` for growth scans; ``n_radius`` bounds
    ``|n_i|`` of the alias index in Strang-Fix scans. ``None`` picks the
    defaults for the dimension (512 / 64 and 64 / 4 for d = 1 / d >= 2).
    """

    j_min: int = 1
    j_max: int = 6
    freq_radius: int | None = None
    n_radius: int | None = None

    def levels(self) -> range:
        if self.j_min < 1 or self.j_max < self.j_min:
            raise ValueError(f"bad level range {self.j_min}..{self.j_max}")
        return range(self.j_min, self.j_max + 1)

    def resolved(self, dim: int) -> "Window":
        fr = self.freq_radius if self.freq_radius is not None else (512 if dim == 1 else 64)
        nr = self.n_radius if self.n_radius is not None else (64 if dim == 1 else 4)
        return Window(self.j_min, self.j_max, fr, nr)

    def as_dict(self) -> dict:
        return {"j_min": self.j_min, "j_max": self.j_max,
                "freq_radius": self.freq_radius, "n_radius": self.n_radius}


@dataclass
class ConditionReport:
    """Outcome of one condition check.

    Attributes
    ----------
    condition : str
        One of ``growth, strang_fix, weak_compat, bounded, strict_compat,
        class_B, lq_class``.
    order : float or None
        ``s`` or ``N`` where applicable.
    empirical_constant : float
        Supremum of the tested ratio over the window.
    window : dict
    verdict : bool
    witness : object
        Location attaining the supremum, or the first violation.
    bound : float or None
        Declared bound the constant was compared with.
    per_n_constants : dict
        ``n -> b_n`` (Strang-Fix only).
    notes : list of str
    extra : dict
    """

    condition: str
    order: float | None
    empirical_constant: float
    window: dict
    verdict: bool
    witness: object = None
    bound: float | None = None
    per_n_constants: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def verdict_text(self) -> str:
        return "pass" if self.verdict else "fail"

    def to_text(self) -> str:
        lines = [f"[{self.condition}]",
                 f"order = {_fmt(self.order)}",
                 f"empirical_constant = {_fmt(self.empirical_constant)}",
                 f"bound = {_fmt(self.bound)}",
                 f"witness = {_witness_text(self.witness)}",
                 "window = " + ", ".join(f"{k}={v}" for k, v in self.window.items()),
                 f"verdict = {self.verdict_text}"]
        for k, v in self.extra.items():
            lines.append(f"{k} = {_fmt(v)}")
        if self.per_n_constants:
            shown = sorted(self.per_n_constants.items())[:8]
            lines.append("b_n = " + ", ".join(f"{n}:{_fmt(b)}" for n, b in shown)
                         + (" ..." if len(self.per_n_constants) > 8 else ""))
        lines += [f"note = {n}" for n in self.notes]
        return "\n".join(lines)

    def csv_row(self) -> str:
        return ",".join([self.condition, _fmt(self.order), _fmt(self.empirical_constant),
                         '"' + _witness_text(self.witness).replace('"', "'") + '"',
                         self.verdict_text])


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _witness_text(w) -> str:
    if w is None:
        return "-"
    if isinstance(w, dict):
        return " ".join(f"{k}={_witness_text(v)}" for k, v in w.items())
    if isinstance(w, np.ndarray):
        return str(w.tolist())
    return str(w)


def _box(radius: int, dim: int) -> np.ndarray:
    axes = [np.arange(-radius, radius + 1)] * dim
    return np.array(np.meshgrid(*axes, indexing="ij")).reshape(dim, -1).T.astype(np.int64)


def _norms(M: DilationMatrix, j: int, k: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(M.scaled(j, k, adjoint=True) ** 2, axis=1))


def _best(results):
    """Max over per-level ``(value, witness)`` pairs, first level wins ties."""
    best_v, best_w = -math.inf, None
    for v, w in results:
        if v > best_v:
            best_v, best_w = v, w
    return best_v, best_w


# growth ----------------------------------------------------------------------

def check_growth(a: AnalyzerFamily, N: float | None, M, window: Window = Window(),
                 bound: float | None = None) -> ConditionReport:
    """``|phi~_j^(k)| <= C |M*^{-j} k|^N`` outside ``D(M*^j)``, ``<= C`` inside."""
    M = as_dilation(M)
    win = window.resolved(M.dim)
    N = a.growth_order if N is None else N
    if N < 0:
        raise ValueError("growth order must be non-negative")
    box = _box(win.freq_radius, M.dim)

    def level(j):
        vals = np.abs(a.rule(M, j, box))
        inside = M.in_digits(j, box, adjoint=True)
        ratio = np.where(inside, vals, vals / np.where(inside, 1.0, _norms(M, j, box)) ** N)
        i = int(np.argmax(ratio))
        return float(ratio[i]), {"j": j, "k": box[i].tolist()}

    const, wit = _best(ordered_map(level, win.levels()))
    bound = a.growth_constant if bound is None else bound
    ok = math.isfinite(const) and const <= bound * (1 + RATIO_SLACK)
    return ConditionReport("growth", N, const, win.as_dict(), ok, wit, bound)


# Strang-Fix -------------------------------------------------------------------

def _alias_rows(M: DilationMatrix, j: int, n_radius: int):
    """Pairs ``(n, r)`` with ``n != 0`` and the frequencies ``M*^j n + r``."""
    digits = M.digits(j, adjoint=True)
    ns = _box(n_radius, M.dim)
    ns = ns[np.any(ns != 0, axis=1)]
    Mj = M.power(j, adjoint=True)
    base = ns @ Mj.T
    k = (base[:, None, :] + digits[None, :, :]).reshape(-1, M.dim)
    n_idx = np.repeat(np.arange(len(ns)), len(digits))
    r_idx = np.tile(np.arange(len(digits)), len(ns))
    return ns, digits, k, n_idx, r_idx


def check_strang_fix(g: GeneratorFamily, s: float, M, window: Window = Window(),
                     q: float | None = None, alpha: float = 0.0) -> ConditionReport:
    """Per-alias constants ``b_n = sup_{j,r} |phi_j^(M*^j n + r)| / |M*^{-j} r|^s``.

    A nonzero coefficient where ``r = 0`` is a violation (reported with witness).
    The verdict compares each ``b_n`` with the family's closed-form bound when
    it has one, and otherwise requires finiteness.
    """
    if not s > 0:
        raise ValueError("Strang-Fix order must be positive")
    M = as_dilation(M)
    win = window.resolved(M.dim)

    def level(j):
        ns, digits, k, n_idx, r_idx = _alias_rows(M, j, win.n_radius)
        num = np.abs(g.rule(M, j, k))
        den = _norms(M, j, digits)[r_idx] ** s
        zero = den == 0
        bad = zero & (num > ZERO_TOL)
        violation = None
        if bad.any():
            i = int(np.argmax(bad))
            violation = {"j": j, "n": ns[n_idx[i]].tolist(), "value": float(num[i])}
        ratio = np.where(zero, 0.0, num / np.where(zero, 1.0, den)).reshape(len(ns), len(digits))
        per_n = ratio.max(axis=1)
        arg = ratio.argmax(axis=1)
        return ns, per_n, [(j, digits[i].tolist()) for i in arg], violation

    results = ordered_map(level, win.levels())
    ns = results[0][0]
    per_n = np.max(np.array([r[1] for r in results]), axis=0)
    which = np.argmax(np.array([r[1] for r in results]), axis=0)
    wits = [results[w][2][i] for i, w in enumerate(which)]
    violations = [r[3] for r in results if r[3] is not None]

    b = {tuple(int(v) for v in n) if M.dim > 1 else int(n[0]): float(v) for n, v in zip(ns, per_n)}
    i_max = int(np.argmax(per_n))
    const = float(per_n[i_max])
    witness = {"n": ns[i_max].tolist(), "j,r": wits[i_max]}
    notes, ok = [], math.isfinite(const)
    if violations:
        ok = False
        witness = violations[0]
        notes.append("nonzero coefficient on the alias lattice M*^j n")
    worst = None
    if g.sf_bound(ns[0], s) is not None:
        for n, v in zip(ns, per_n):
            ref = g.sf_bound(n, s)
            if ref is not None and v > ref * (1 + RATIO_SLACK):
                ok = False
                worst = worst or {"n": n.tolist(), "b_n": float(v), "bound": ref}
        if worst:
            witness = worst
    extra = {}
    if q is not None:
        from .fourier import theta_weight
        w = np.array([theta_weight(alpha, n) for n in ns]) * per_n
        extra["b_norm_lq_alpha"] = (float(np.max(w)) if math.isinf(q)
                                    else float(np.sum(w**q) ** (1 / q)))
    return ConditionReport("strang_fix", s, const, win.as_dict(), ok, witness,
                           None, b, notes, extra)


# weak and strict compatibility --------------------------------------------------

def _same_fraction(v, target) -> bool:
    try:
        return Fraction(v) == Fraction(target)
    except (TypeError, ValueError):
        return False


def known_weak_compat_bound(g: GeneratorFamily, a: AnalyzerFamily, s: float,
                            region: bool = False) -> float | None:
    """Closed-form weak-compatibility constant for the pairs where one is known.

    ``region=True`` asks for the bound restricted to the support ball of a
    compactly supported generator (relevant for the truncated Fejer kernel).
    """
    gp, ap = g.params, a.params
    if a.scale != 1:
        return None
    if g.name == "bspline" and a.name == "smoothed" and gp["s"] == 2 and s == 2:
        return 4 / 3 * math.pi**2
    if g.name == "combo" and gp["s"] == 4 and s == 4:
        if (a.name == "smoothed" and _same_fraction(gp["u1"], Fraction(11, 6))
                and _same_fraction(gp["u2"], Fraction(-5, 6))):
            return 32 / 15 * math.pi**4
        if (a.name == "differential" and _same_fraction(gp["u1"], Fraction(5, 6))
                and _same_fraction(gp["u2"], Fraction(1, 6))
                and [Fraction(c) for c in ap["coeffs"]] == [1, 0, Fraction(-1, 4)]):
            return 7 / 15 * math.pi**4
    strict = ((g.name == "dirichlet" and a.name == "ideal")
              or (g.name == "inverse_dual" and gp["analyzer"] == repr(a)))
    if strict:
        delta = float(gp["delta"])
        return 0.0 if region else (1 + g.bound * a.growth_constant) * delta ** (-s)
    if g.name == "truncated_fejer" and a.name == "ideal" and s == 1:
        c_f, delta = float(gp["c_f"]), float(gp["delta"])
        return c_f if region else max(c_f, 1 / delta)
    return None


def check_weak_compat(g: GeneratorFamily, a: AnalyzerFamily, s: float, M,
                      window: Window = Window(), region_radius=None,
                      bound: float | None = None) -> ConditionReport:
    """``b_0 = sup |1 - phi^(r) conj(phi~^(r))| / |M*^{-j} r|^s`` over ``D(M*^j)``.

    With ``region_radius`` only ``|M*^{-j} r| <= region_radius`` is scanned.
    At ``r = 0`` the product must equal 1 within ``1e-12``.
    """
    if not s > 0:
        raise ValueError("compatibility order must be positive")
    M = as_dilation(M)
    win = window.resolved(M.dim)

    def level(j):
        r = M.digits(j, adjoint=True)
        if region_radius is not None:
            r = r[M.in_ball(j, r, region_radius, adjoint=True)]
        defect = np.abs(1 - g.rule(M, j, r) * np.conj(a.rule(M, j, r)))
        nrm = _norms(M, j, r)
        zero = nrm == 0
        residual0 = float(defect[zero].max()) if zero.any() else 0.0
        ratio = np.where(zero, 0.0, defect / np.where(zero, 1.0, nrm) ** s)
        i = int(np.argmax(ratio)) if len(ratio) else 0
        val = float(ratio[i]) if len(ratio) else 0.0
        return val, {"j": j, "r": r[i].tolist() if len(r) else None}, residual0

    results = ordered_map(level, win.levels())
    const, wit = _best([(v, w) for v, w, _ in results])
    residual0 = max(res for _, _, res in results)
    if bound is None:
        bound = known_weak_compat_bound(g, a, s, region=region_radius is not None)
    notes = []
    ok = math.isfinite(const)
    if residual0 > ZERO_TOL:
        ok = False
        notes.append(f"product at r=0 differs from 1 by {residual0:.3g}")
        wit = {"r": 0, "residual": residual0}
    if bound is not None and const > bound * (1 + RATIO_SLACK) + ZERO_TOL:
        ok = False
    extra = {"residual_at_zero": residual0}
    if region_radius is not None:
        extra["region_radius"] = float(region_radius)
    return ConditionReport("weak_compat", s, const, win.as_dict(), ok, wit, bound,
                           notes=notes, extra=extra)


def check_bounded(g: GeneratorFamily, M, window: Window = Window()) -> ConditionReport:
    """``C_phi = sup_{j, k in D(M*^j)} |phi_j^(k)|`` against the declared bound."""
    M = as_dilation(M)
    win = window.resolved(M.dim)

    def level(j):
        r = M.digits(j, adjoint=True)
        vals = np.abs(g.rule(M, j, r))
        i = int(np.argmax(vals))
        return float(vals[i]), {"j": j, "k": r[i].tolist()}

    const, wit = _best(ordered_map(level, win.levels()))
    ok = const <= g.bound * (1 + RATIO_SLACK)
    return ConditionReport("bounded", None, const, win.as_dict(), ok, wit, g.bound)


def _ball_points(M: DilationMatrix, j: int, radius: float, cap: int | None) -> np.ndarray:
    r = int(math.floor(M.norm_power(j, adjoint=True) * float(radius))) + 1
    if cap is not None:
        r = min(r, cap)
    box = _box(r, M.dim)
    return box[M.in_ball(j, box, radius, adjoint=True)]


def check_strict_compat(g: GeneratorFamily, a: AnalyzerFamily, delta, M,
                        window: Window = Window()) -> ConditionReport:
    """``phi~_j^(l) conj(phi_j^(l)) = 1`` for every ``|M*^{-j} l| <= delta``."""
    M = as_dilation(M)
    win = window.resolved(M.dim)

    def level(j):
        pts = _ball_points(M, j, delta, win.freq_radius)
        dev = np.abs(a.rule(M, j, pts) * np.conj(g.rule(M, j, pts)) - 1)
        bad = np.flatnonzero(dev > ZERO_TOL)
        first = {"j": j, "l": pts[bad[0]].tolist(), "deviation": float(dev[bad[0]])} if len(bad) else None
        i = int(np.argmax(dev))
        return float(dev[i]), {"j": j, "l": pts[i].tolist()}, first

    results = ordered_map(level, win.levels())
    const, wit = _best([(v, w) for v, w, _ in results])
    firsts = [f for _, _, f in results if f is not None]
    ok = not firsts
    return ConditionReport("strict_compat", None, const, win.as_dict(), ok,
                           firsts[0] if firsts else wit, ZERO_TOL,
                           extra={"delta": float(delta)})


def _min_dist2_nonzero(u: np.ndarray, D: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``min_{n != 0} |u - D n|^2`` (scaled by ``D^2``) and the minimizer."""
    dim = u.shape[1]
    centre = np.floor_divide(2 * u + D, 2 * D)
    best = np.full(len(u), np.iinfo(np.int64).max, dtype=np.int64)
    arg = np.zeros_like(u)
    for off in _box(1, dim):
        n = centre + off
        d2 = np.sum((u - D * n) ** 2, axis=1)
        d2 = np.where(np.all(n == 0, axis=1), np.iinfo(np.int64).max, d2)
        better = d2 < best
        best = np.where(better, d2, best)
        arg[better] = n[better]
    return best, arg


def check_class_B(g: GeneratorFamily, delta, R, M, window: Window = Window()) -> ConditionReport:
    """Spectrum inside ``M*^j B_R(0)`` and off every ``M*^j B_delta(n)``, ``n != 0``.

    Balls are closed: a frequency at distance exactly ``delta`` from a nonzero
    lattice point counts as a leak.
    """
    M = as_dilation(M)
    win = window.resolved(M.dim)
    if not g.finite_spectrum:
        return ConditionReport("class_B", None, math.inf, win.as_dict(), False,
                               "infinite spectrum", g.bound,
                               notes=[f"{g.name} is not a trigonometric polynomial family"])
    d2 = Fraction(delta) ** 2

    def level(j):
        spec = g.spectrum(M, j)
        u, D = M.scaled_exact(j, spec, adjoint=True)
        outside_R = ~M.in_ball(j, spec, R, adjoint=True)
        dist2, near = _min_dist2_nonzero(u, D)
        leak = np.array([Fraction(int(v), D * D) <= d2 for v in dist2], dtype=bool)
        vals = np.abs(g.rule(M, j, spec))
        first = None
        if outside_R.any():
            i = int(np.argmax(outside_R))
            first = {"j": j, "k": spec[i].tolist(), "reason": "outside B_R"}
        elif leak.any():
            i = int(np.argmax(leak))
            first = {"j": j, "k": spec[i].tolist(), "reason": f"in B_delta({near[i].tolist()})"}
        return float(vals.max()) if len(vals) else 0.0, {"j": j}, first

    results = ordered_map(level, win.levels())
    const, wit = _best([(v, w) for v, w, _ in results])
    firsts = [f for _, _, f in results if f is not None]
    ok = not firsts and const <= g.bound * (1 + RATIO_SLACK)
    return ConditionReport("class_B", None, const, win.as_dict(), ok,
                           firsts[0] if firsts else wit, g.bound,
                           extra={"delta": float(delta), "R": float(R)})


# L_q class, lemma constant, profile scans ------------------------------------------

def lq_class_norm(a: AnalyzerFamily, q: float, M, j: int, oversample: int = 64) -> float:
    """``||phi~_j||_{L_{q,j}}`` by the midpoint rule over ``M^{-j} T^d``.

    ``oversample`` is the number of midpoints per axis in the pulled-back
    unit cube (rounded up to an even number so no node sits on a cell edge
    of the Kantorovich indicator).
    """
    if not a.has_density:
        raise FamilyError(f"{a!r} has no space-domain density")
    M = as_dilation(M)
    n = int(oversample) + (int(oversample) % 2)
    axes = [(np.arange(n) + 0.5) / n] * M.dim
    y = np.array(np.meshgrid(*axes, indexing="ij")).reshape(M.dim, -1).T
    adj, D = M.inverse_power(j)
    x = y @ adj.T / D
    shifts = M.digits(j) @ adj.T / D
    total = np.zeros(len(x))
    for sft in shifts:
        total += a.space_density(M, j, x - sft)
    inner = total / float(D)
    if math.isinf(q):
        return float(inner.max())
    return float(np.mean(inner**q) ** (1.0 / q))


def lemma_constant(p: float, excess: float, d: int) -> float:
    """Binomial-sum upper bound on ``C_{p,gamma,N}`` with ``excess = gamma - N``.

    ``C^p <= 2^e sum_{v=1}^d 2^v v^{-e/2} binom(d, v) (1 + v / (2 (e - v)))^v``
    where ``e = p * excess`` must exceed ``d``.
    """
    e = p * excess
    if not e > d:
        raise ValueError(f"lemma constant diverges: p*(gamma-N) = {e} <= d = {d}")
    total = sum(2.0**v * v ** (-e / 2) * math.comb(d, v) * (1 + v / (2 * (e - v))) ** v
                for v in range(1, d + 1))
    return float((2.0**e * total) ** (1.0 / p))


@dataclass(frozen=True)
class ScanResult:
    sup: float
    argmax: float


def _accepts_ops(fn: Callable) -> bool:
    try:
        return len(inspect.signature(fn).parameters) >= 2
    except (TypeError, ValueError):
        return False


def max_ratio_scan(g: Callable, s: float, grid_points: int = 1_000_000,
                   exclusion: float = 1e-6, precise_radius: float = 0.02,
                   dps: int = 40) -> ScanResult:
    """Dense-grid supremum of ``|g(x)| / |x|^s`` on ``[-1/2, 1/2]``.

    Points with ``|x| < exclusion`` are skipped. If ``g`` accepts an
    ``ops`` backend argument, points with ``|x| < precise_radius`` are
    evaluated in mpmath at ``dps`` digits, since double precision loses all
    significant digits of ``g`` there to cancellation.
    """
    x = np.linspace(-0.5, 0.5, int(grid_points))
    x = x[np.abs(x) >= exclusion]
    generic = _accepts_ops(g)
    vals = np.abs(np.asarray(g(x, NUMPY) if generic else g(x), dtype=complex))
    ratio = vals / np.abs(x) ** s
    if generic and precise_radius > 0:
        near = np.flatnonzero(np.abs(x) < precise_radius)
        with mpmath.workdps(dps):
            for i in near:
                xm = mpmath.mpf(float(x[i]))
                ratio[i] = float(abs(g(xm, MPMATH)) / abs(xm) ** s)
    i = int(np.argmax(ratio))
    return ScanResult(float(ratio[i]), float(x[i]))


def defect_scan(g: GeneratorFamily, a: AnalyzerFamily, s: float, **kwargs) -> ScanResult:
    """``max_ratio_scan`` of the compatibility defect of a 1-D pair."""
    return max_ratio_scan(compatibility_defect(g, a), s, **kwargs)


CHECKS = ("growth", "strang_fix", "weak_compat", "bounded", "strict_compat", "class_B", "lq_class")

"""Periodic functions as finite Fourier-coefficient maps, and their norms.

A :class:`TrigPoly` stores ``f(x) = sum_n c_n exp(2 pi i (n, x))`` on the
torus ``T^d = R^d / Z^d``. Weighted coefficient norms are exact; Lebesgue
norms use FFT synthesis on a uniform grid (rectangle rule on the torus).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .lattice import as_dilation


class GridTooSmallError(ValueError):
    """Two stored frequencies alias to the same FFT bin."""


def _normalise(freqs: np.ndarray, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if len(freqs) == 0:
        return freqs, coeffs
    uniq, inv = np.unique(freqs, axis=0, return_inverse=True)
    summed = np.zeros(len(uniq), dtype=complex)
    np.add.at(summed, inv.ravel(), coeffs)
    keep = summed != 0
    return uniq[keep], summed[keep]


class TrigPoly:
    """Trigonometric polynomial on ``T^d`` keyed by integer frequencies.

    Parameters
    ----------
    freqs : array_like, shape (n, d)
        Integer frequency vectors. Duplicates are summed.
    coeffs : array_like, shape (n,)
        Complex Fourier coefficients.
    dim : int, optional
        Needed only when ``freqs`` is empty.

    Only nonzero coefficients are stored; rows are sorted lexicographically.
    Instances are immutable.
    """

    __slots__ = ("_freqs", "_coeffs", "_dim")

    def __init__(self, freqs, coeffs, dim: int | None = None):
        coeffs = np.asarray(coeffs, dtype=complex).ravel()
        freqs = np.asarray(freqs, dtype=np.int64)
        if freqs.size == 0:
            if dim is None:
                dim = freqs.shape[1] if freqs.ndim == 2 else 1
            freqs = np.zeros((0, dim), dtype=np.int64)
            coeffs = np.zeros(0, dtype=complex)
        else:
            if freqs.ndim == 1:
                freqs = freqs.reshape(-1, 1) if dim in (None, 1) else freqs.reshape(-1, dim)
            if len(freqs) != len(coeffs):
                raise ValueError("freqs and coeffs differ in length")
            freqs, coeffs = _normalise(freqs, coeffs)
        freqs.flags.writeable = False
        coeffs.flags.writeable = False
        self._freqs = freqs
        self._coeffs = coeffs
        self._dim = freqs.shape[1]

    # construction helpers -------------------------------------------------
    @classmethod
    def zero(cls, dim: int = 1) -> "TrigPoly":
        return cls(np.zeros((0, dim), dtype=np.int64), [], dim=dim)

    @classmethod
    def constant(cls, value: complex = 1.0, dim: int = 1) -> "TrigPoly":
        return cls(np.zeros((1, dim), dtype=np.int64), [value])

    @classmethod
    def from_dict(cls, terms: dict, dim: int | None = None) -> "TrigPoly":
        keys = [tuple(np.atleast_1d(k).tolist()) for k in terms]
        if dim is None:
            dim = len(keys[0]) if keys else 1
        return cls(np.array(keys, dtype=np.int64).reshape(-1, dim), list(terms.values()), dim=dim)

    @classmethod
    def random(cls, rng: np.random.Generator, radius: int, dim: int = 1,
               real: bool = False, density: float = 1.0) -> "TrigPoly":
        """Complex Gaussian coefficients on the box ``|n_i| <= radius``."""
        axes = [np.arange(-radius, radius + 1)] * dim
        box = np.array(np.meshgrid(*axes, indexing="ij")).reshape(dim, -1).T
        c = rng.standard_normal(len(box)) + 1j * rng.standard_normal(len(box))
        if density < 1.0:
            c = c * (rng.random(len(box)) < density)
        f = cls(box, c)
        return f.real_part() if real else f

    # basic accessors ------------------------------------------------------
    @property
    def dim(self) -> int:
        return self._dim

    @property
    def freqs(self) -> np.ndarray:
        return self._freqs

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    def __len__(self) -> int:
        return len(self._coeffs)

    @property
    def support_radius(self) -> float:
        """Largest Euclidean frequency norm in the support (0 if empty)."""
        if len(self) == 0:
            return 0.0
        return float(np.sqrt(np.max(np.sum(self._freqs.astype(float) ** 2, axis=1))))

    @property
    def max_abs_freq(self) -> np.ndarray:
        """Per-axis ``max |n_i|``."""
        if len(self) == 0:
            return np.zeros(self._dim, dtype=np.int64)
        return np.max(np.abs(self._freqs), axis=0)

    def to_dict(self) -> dict:
        return {tuple(int(v) for v in n): complex(c) for n, c in zip(self._freqs, self._coeffs)}

    def coefficient(self, n) -> complex:
        n = np.asarray(n, dtype=np.int64).reshape(1, -1)
        hit = np.all(self._freqs == n, axis=1)
        return complex(self._coeffs[hit][0]) if hit.any() else 0j

    def lookup(self, k) -> np.ndarray:
        """Coefficients at the rows of ``k`` (zero where absent)."""
        k = np.asarray(k, dtype=np.int64).reshape(-1, self._dim)
        out = np.zeros(len(k), dtype=complex)
        if len(self) == 0 or len(k) == 0:
            return out
        both = np.concatenate([self._freqs, k])
        _, inv = np.unique(both, axis=0, return_inverse=True)
        inv = inv.ravel()
        table = np.zeros(inv.max() + 1, dtype=complex)
        table[inv[: len(self)]] = self._coeffs
        return table[inv[len(self):]]

    def is_real_valued(self, tol: float = 1e-12) -> bool:
        return (self - self.conj_reflect()).a_norm_inf() <= tol * max(1.0, self.a_norm_inf())

    def conj_reflect(self) -> "TrigPoly":
        """Coefficients of ``conj(f(x))``: ``n -> conj(c_{-n})``."""
        return TrigPoly(-self._freqs, np.conj(self._coeffs), dim=self._dim)

    def real_part(self) -> "TrigPoly":
        return (self + self.conj_reflect()) * 0.5

    def restrict(self, mask_or_predicate) -> "TrigPoly":
        mask = mask_or_predicate(self._freqs) if callable(mask_or_predicate) else mask_or_predicate
        mask = np.asarray(mask, dtype=bool)
        return TrigPoly(self._freqs[mask], self._coeffs[mask], dim=self._dim)

    def multiply_coeffs(self, weights) -> "TrigPoly":
        """Fourier multiplier: ``c_n -> weights[n] c_n`` (``weights`` per stored row)."""
        return TrigPoly(self._freqs, self._coeffs * np.asarray(weights), dim=self._dim)

    # arithmetic -----------------------------------------------------------
    def _check(self, other: "TrigPoly"):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return TrigPoly(np.concatenate([self._freqs, other._freqs]),
                        np.concatenate([self._coeffs, other._coeffs]), dim=self._dim)

    def __neg__(self):
        return TrigPoly(self._freqs, -self._coeffs, dim=self._dim)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return TrigPoly(self._freqs, self._coeffs * scalar, dim=self._dim)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return (self.dim == other.dim and np.array_equal(self._freqs, other._freqs)
                and np.array_equal(self._coeffs, other._coeffs))

    def __repr__(self):
        return f"TrigPoly(dim={self._dim}, terms={len(self)}, radius={self.support_radius:g})"

    # evaluation -----------------------------------------------------------
    def __call__(self, x) -> np.ndarray:
        """Direct evaluation at points ``x`` (shape ``(m, d)`` or ``(m,)`` for d=1)."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0 or (x.ndim == 1 and self._dim > 1)
        x = x.reshape(-1, self._dim)
        phase = 2 * np.pi * (x @ self._freqs.T.astype(float))
        out = np.exp(1j * phase) @ self._coeffs
        return out[0] if scalar else out

    def a_norm_inf(self) -> float:
        return float(np.max(np.abs(self._coeffs))) if len(self) else 0.0


# weights and coefficient norms ---------------------------------------------

def theta_weight(alpha: float, x) -> np.ndarray | float:
    """``(1 + |x|^2)^(alpha/2)`` for one vector, or for each row of a 2-D array."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    x = np.asarray(x, dtype=float)
    if x.ndim <= 1:
        return float((1.0 + np.sum(x**2)) ** (alpha / 2))
    return (1.0 + np.sum(x**2, axis=-1)) ** (alpha / 2)


def _weighted_lq(values: np.ndarray, q: float) -> float:
    if values.size == 0:
        return 0.0
    if math.isinf(q):
        return float(np.max(values))
    if q < 1:
        raise ValueError("q must be >= 1")
    top = np.max(values)
    if top == 0:
        return 0.0
    return float(top * np.sum((values / top) ** q) ** (1.0 / q))


def a_norm(f: TrigPoly, q: float, alpha: float = 0.0) -> float:
    """``||f||_{A_q^alpha}``: the ``l_q`` norm of ``theta_alpha(n) |c_n|``."""
    vals = np.abs(f.coeffs) * theta_weight(alpha, f.freqs.reshape(-1, f.dim))
    return _weighted_lq(np.atleast_1d(vals), q)


def in_out_norms(f: TrigPoly, q: float, alpha: float, M, j: int) -> tuple[float, float]:
    """Weighted coefficient norm of ``f`` inside and outside ``D(M*^j)``."""
    M = as_dilation(M)
    if j < 1:
        raise ValueError("level j must be >= 1")
    if len(f) == 0:
        return 0.0, 0.0
    inside = M.in_digits(j, f.freqs, adjoint=True)
    vals = np.abs(f.coeffs) * theta_weight(alpha, f.freqs)
    return _weighted_lq(vals[inside], q), _weighted_lq(vals[~inside], q)


# grid synthesis and Lebesgue norms -----------------------------------------

def _grid_shape(grid_size, dim: int) -> tuple[int, ...]:
    if np.isscalar(grid_size):
        return (int(grid_size),) * dim
    shape = tuple(int(g) for g in grid_size)
    if len(shape) != dim:
        raise ValueError("grid_size has wrong length")
    return shape


def synthesize_grid(f: TrigPoly, grid_size) -> np.ndarray:
    """Exact values ``f(m / G)`` on the uniform grid, via inverse FFT.

    Raises
    ------
    GridTooSmallError
        If two frequencies of ``f`` coincide modulo the grid size.
    """
    shape = _grid_shape(grid_size, f.dim)
    buf = np.zeros(shape, dtype=complex)
    if len(f) == 0:
        return buf
    idx = np.mod(f.freqs, np.array(shape))
    flat = np.ravel_multi_index(tuple(idx.T), shape)
    if len(np.unique(flat)) != len(flat):
        raise GridTooSmallError(f"grid {shape} aliases frequencies of radius {f.max_abs_freq}")
    buf.flat[flat] = f.coeffs
    return np.fft.ifftn(buf) * float(np.prod(shape))


def coefficients_from_grid(values: np.ndarray) -> TrigPoly:
    """Inverse of :func:`synthesize_grid` on the centred frequency window."""
    shape = values.shape
    c = np.fft.fftn(values) / float(np.prod(shape))
    axes = [np.fft.fftfreq(g, 1.0 / g).round().astype(np.int64) for g in shape]
    freqs = np.array(np.meshgrid(*axes, indexing="ij")).reshape(len(shape), -1).T
    return TrigPoly(freqs, c.ravel())


def default_grid(f: TrigPoly, oversample: int) -> tuple[int, ...]:
    return tuple(int(oversample * (2 * r + 1)) for r in f.max_abs_freq)


def lp_norm(f: TrigPoly, p: float, oversample: int = 16, grid_size=None) -> float:
    """``||f||_p`` on the torus by the rectangle rule on a uniform grid.

    For ``p = inf`` the grid maximum is returned; it underestimates the true
    supremum by ``O(oversample^-2) ||f''||``.
    """
    if oversample < 2:
        raise ValueError("oversample must be >= 2")
    if len(f) == 0:
        return 0.0
    shape = default_grid(f, oversample) if grid_size is None else _grid_shape(grid_size, f.dim)
    vals = np.abs(synthesize_grid(f, shape))
    if math.isinf(p):
        return float(vals.max())
    if p < 1:
        raise ValueError("p must be >= 1")
    top = vals.max()
    if top == 0:
        return 0.0
    return float(top * np.mean((vals / top) ** p) ** (1.0 / p))


def dual_exponent(p: float) -> float:
    """Hölder conjugate ``q`` with ``1/p + 1/q = 1``."""
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


# coefficient decay laws -----------------------------------------------------

@dataclass(frozen=True)
class DecayLaw:
    """Coefficients ``scale * |n|^-kappa`` for ``n != 0`` (``zero_mode`` at 0).

    ``truncate`` keeps the Euclidean ball ``|n| <= R``; ``tail_bound`` is an
    integral upper estimate of the discarded ``A_q^gamma`` mass.
    """

    kappa: float
    scale: float = 1.0
    dim: int = 1
    zero_mode: complex = 0.0
    q: float = 2.0
    gamma: float = 0.0

    def rule(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float).reshape(-1, self.dim)
        r = np.sqrt(np.sum(n**2, axis=1))
        out = np.full(len(r), complex(self.zero_mode))
        nz = r > 0
        out[nz] = self.scale * r[nz] ** (-self.kappa)
        return out

    def truncate(self, radius: int) -> TrigPoly:
        radius = int(radius)
        axes = [np.arange(-radius, radius + 1)] * self.dim
        box = np.array(np.meshgrid(*axes, indexing="ij")).reshape(self.dim, -1).T
        box = box[np.sum(box**2, axis=1) <= radius * radius]
        return TrigPoly(box, self.rule(box), dim=self.dim)

    def tail_bound(self, radius: float) -> float:
        """Upper estimate of ``(sum_{|n|>R} (theta_gamma(n) |c_n|)^q)^(1/q)``."""
        e = (self.kappa - self.gamma) * self.q
        d = self.dim
        if e <= d:
            return math.inf
        r0 = max(radius - math.sqrt(d) / 2, 0.5)
        surface = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
        mass = (abs(self.scale) ** self.q * 2 ** (self.gamma * self.q / 2)
                * surface * (2.0 ** d) * r0 ** (d - e) / (e - d))
        return mass ** (1.0 / self.q)

    def choose_radius(self, rel_tol: float = 1e-12, cap: int | None = None) -> int:
        """Smallest power of two with relative tail below ``rel_tol``, capped."""
        if cap is None:
            cap = 4096 if self.dim == 1 else 128
        ref = a_norm(self.truncate(4 if self.dim > 1 else 16), self.q, self.gamma)
        radius = 8
        while radius < cap and self.tail_bound(radius) > rel_tol * ref:
            radius *= 2
        return min(radius, cap)


# serialisation ---------------------------------------------------------------

def dumps_trigpoly(f: TrigPoly) -> str:
    lines = [f"# trigpoly d={f.dim}"]
    for n, c in zip(f.freqs, f.coeffs):
        lines.append(" ".join(str(int(v)) for v in n) + f" {c.real:.17g} {c.imag:.17g}")
    return "\n".join(lines) + "\n"


def loads_trigpoly(text: str) -> TrigPoly:
    dim = None
    freqs, coeffs = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if tok.startswith("d="):
                    dim = int(tok[2:])
            continue
        parts = line.split()
        if dim is None:
            raise ValueError("TrigPoly text lacks a '# trigpoly d=<dim>' header")
        if len(parts) != dim + 2:
            raise ValueError(f"bad coefficient line {raw!r}")
        freqs.append([int(v) for v in parts[:dim]])
        coeffs.append(complex(float(parts[dim]), float(parts[dim + 1])))
    if dim is None:
        raise ValueError("TrigPoly text lacks a '# trigpoly d=<dim>' header")
    return TrigPoly(np.array(freqs, dtype=np.int64).reshape(-1, dim), coeffs, dim=dim)


def save_trigpoly(f: TrigPoly, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dumps_trigpoly(f))


def load_trigpoly(path) -> TrigPoly:
    with open(path, encoding="ascii") as fh:
        return loads_trigpoly(fh.read())

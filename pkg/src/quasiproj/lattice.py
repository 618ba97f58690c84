"""Integer dilation matrices: digit sets, coset decomposition, norms.

All membership tests against the half-open cell ``A[-1/2, 1/2)^d`` are done
in exact integer arithmetic. With ``A^{-1} = adj / D`` (``D > 0``) a point
``k`` lies in the cell iff ``-D <= 2 (adj k)_i < D`` for every axis.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

ISOTROPY_TOL = 1e-9

_INT_LIMIT = 2**62


class InvalidMatrixError(ValueError):
    """Singular, non-integer, non-square or non-expanding matrix."""


def as_int_matrix(A) -> np.ndarray:
    """Coerce ``A`` (scalar, nested list or array) to a square int64 matrix."""
    arr = np.asarray(A)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InvalidMatrixError(f"expected a square matrix, got shape {arr.shape}")
    if arr.dtype.kind not in "iu":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise InvalidMatrixError("matrix entries must be integers")
    return np.round(arr).astype(np.int64)


def parse_matrix(text: str) -> np.ndarray:
    """Parse a row-major matrix string such as ``"1,-1;1,1"`` or ``"2"``."""
    text = text.strip().strip('"').strip("'").strip("[]")
    if not text:
        raise InvalidMatrixError("empty matrix string")
    try:
        rows = [[int(v) for v in row.replace(" ", "").split(",") if v != ""]
                for row in text.split(";")]
    except ValueError as exc:
        raise InvalidMatrixError(f"malformed matrix string {text!r}") from exc
    if any(len(r) != len(rows) for r in rows):
        raise InvalidMatrixError(f"matrix string {text!r} is not square")
    return as_int_matrix(rows)


def _key(A: np.ndarray) -> tuple:
    return tuple(tuple(int(v) for v in row) for row in A)


@lru_cache(maxsize=512)
def _inverse_cached(key: tuple) -> tuple[np.ndarray, int]:
    d = len(key)
    # Gauss-Jordan over the rationals
    aug = [[Fraction(v) for v in row] + [Fraction(int(i == r)) for i in range(d)]
           for r, row in enumerate(key)]
    det = Fraction(1)
    for col in range(d):
        piv = next((r for r in range(col, d) if aug[r][col] != 0), None)
        if piv is None:
            raise InvalidMatrixError("matrix is singular")
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
            det = -det
        p = aug[col][col]
        det *= p
        aug[col] = [v / p for v in aug[col]]
        for r in range(d):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    D = abs(int(det))
    adj = [[int(aug[r][d + c] * D) for c in range(d)] for r in range(d)]
    if max(abs(v) for row in adj for v in row) >= _INT_LIMIT or D >= _INT_LIMIT:
        raise OverflowError("matrix power too large for int64 arithmetic")
    out = np.array(adj, dtype=np.int64)
    out.flags.writeable = False
    return out, D


def integer_inverse(A) -> tuple[np.ndarray, int]:
    """Return ``(adj, D)`` with ``A^{-1} = adj / D`` and ``D = |det A| > 0``."""
    return _inverse_cached(_key(as_int_matrix(A)))


def _as_points(k, d: int) -> np.ndarray:
    pts = np.asarray(k, dtype=np.int64)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(-1, d) if d > 1 or pts.size != 1 else pts.reshape(1, 1)
        if d == 1:
            pts = pts.reshape(-1, 1)
    if pts.shape[1] != d:
        raise ValueError(f"lattice points must have {d} coordinates")
    return pts


def in_cell(A, k) -> np.ndarray:
    """Boolean mask: ``A^{-1} k`` lies in the half-open cube ``[-1/2, 1/2)^d``."""
    A = as_int_matrix(A)
    adj, D = integer_inverse(A)
    pts = _as_points(k, A.shape[0])
    u = pts @ adj.T
    return np.all((-D <= 2 * u) & (2 * u < D), axis=1)


@lru_cache(maxsize=256)
def _digit_set_cached(key: tuple) -> np.ndarray:
    A = np.array(key, dtype=np.int64)
    d = A.shape[0]
    corners = np.array(np.meshgrid(*[[-0.5, 0.5]] * d, indexing="ij")).reshape(d, -1)
    img = A @ corners
    lo = np.floor(img.min(axis=1)).astype(np.int64) - 1
    hi = np.ceil(img.max(axis=1)).astype(np.int64) + 1
    axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    box = np.array(np.meshgrid(*axes, indexing="ij")).reshape(d, -1).T
    digits = box[in_cell(A, box)]
    order = np.lexsort(digits.T[::-1])
    digits = np.ascontiguousarray(digits[order])
    digits.flags.writeable = False
    return digits


def digit_set(A) -> np.ndarray:
    """Digits ``D(A) = A[-1/2, 1/2)^d ∩ Z^d`` as an ``(|det A|, d)`` array.

    Rows are sorted lexicographically.

    >>> digit_set([[3]]).ravel().tolist()
    [-1, 0, 1]
    """
    A = as_int_matrix(A)
    _, D = integer_inverse(A)
    digits = _digit_set_cached(_key(A))
    assert len(digits) == D, "digit enumeration missed points"
    return digits


@dataclass(frozen=True)
class Coset:
    """``point = A @ quotient + digit`` with ``digit`` in ``D(A)``."""

    quotient: tuple
    digit: tuple


def decompose_many(A, k) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised coset decomposition; returns ``(quotients, digits)``.

    The quotient is ``floor(A^{-1} k + 1/2)`` per axis, which places the
    remainder's preimage in ``[-1/2, 1/2)^d``.
    """
    A = as_int_matrix(A)
    adj, D = integer_inverse(A)
    pts = _as_points(k, A.shape[0])
    u = pts @ adj.T
    n = np.floor_divide(2 * u + D, 2 * D)
    r = pts - n @ A.T
    return n, r


def decompose(A, k) -> Coset:
    """Unique ``k = A n + r`` with ``r`` in the digit set of ``A``.

    >>> decompose([[2]], [5])
    Coset(quotient=(3,), digit=(-1,))
    """
    n, r = decompose_many(A, np.atleast_1d(np.asarray(k)).reshape(1, -1))
    return Coset(tuple(int(v) for v in n[0]), tuple(int(v) for v in r[0]))


def spectral_norm(A) -> float:
    return float(np.linalg.norm(np.asarray(A, dtype=float), 2))


@dataclass(frozen=True)
class SpectralInfo:
    op_norm: float
    inverse_op_norm: float
    min_eig_abs: float
    isotropic: bool
    eig_abs: float | None


class DilationMatrix:
    """An expanding integer matrix ``M`` together with its powers.

    Parameters
    ----------
    entries : array_like or str
        Integer ``d x d`` matrix, or a row-major string like ``"1,-1;1,1"``.

    Notes
    -----
    Methods taking ``adjoint=True`` work with ``M* = M^T``; the frequency-side
    quantities (``D(M*^j)``, ``M*^{-j} k``) all use the adjoint.
    """

    def __init__(self, entries):
        mat = parse_matrix(entries) if isinstance(entries, str) else as_int_matrix(entries)
        _, det = integer_inverse(mat)
        eig = np.abs(np.linalg.eigvals(mat.astype(float)))
        if np.any(eig <= 1.0):
            raise InvalidMatrixError(f"not a dilation matrix, eigenvalue moduli {eig}")
        if det < 2:
            raise InvalidMatrixError("|det M| must be at least 2")
        mat.flags.writeable = False
        self._m = mat
        self._key = _key(mat)
        self._eig = eig

    @property
    def entries(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    @property
    def det_abs(self) -> int:
        return integer_inverse(self._m)[1]

    def __eq__(self, other):
        return isinstance(other, DilationMatrix) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"DilationMatrix({self.to_string()!r})"

    def to_string(self) -> str:
        return ";".join(",".join(str(v) for v in row) for row in self._key)

    @property
    def is_scalar(self) -> bool:
        return self.dim == 1

    def power(self, j: int, adjoint: bool = False) -> np.ndarray:
        """Integer matrix ``M^j`` (or ``M*^j``), ``j >= 0``."""
        return _power(self._key, j, adjoint)

    def inverse_power(self, j: int, adjoint: bool = False) -> tuple[np.ndarray, int]:
        """``(adj, D)`` with ``M^{-j} = adj / D`` (adjoint variant on request)."""
        return integer_inverse(self.power(j, adjoint))

    def digits(self, j: int, adjoint: bool = False) -> np.ndarray:
        return digit_set(self.power(j, adjoint))

    def scaled_exact(self, j: int, k, adjoint: bool = True) -> tuple[np.ndarray, int]:
        """Integer numerators ``u`` and denominator ``D`` with ``M*^{-j} k = u / D``."""
        adj, D = self.inverse_power(j, adjoint)
        return _as_points(k, self.dim) @ adj.T, D

    def scaled(self, j: int, k, adjoint: bool = True) -> np.ndarray:
        """Float coordinates ``M*^{-j} k`` (rows)."""
        u, D = self.scaled_exact(j, k, adjoint)
        return u / D

    def in_ball(self, j: int, k, radius: float, adjoint: bool = True,
                strict: bool = False) -> np.ndarray:
        """Mask ``|M*^{-j} k| <= radius`` (``<`` when ``strict``), exact when possible."""
        u, D = self.scaled_exact(j, k, adjoint)
        rad2 = Fraction(radius) ** 2 * D * D
        num, den = rad2.numerator, rad2.denominator
        lhs = np.sum(u**2, axis=1)
        if lhs.size and (den * int(lhs.max()) >= _INT_LIMIT or num >= _INT_LIMIT):
            lhs = lhs.astype(object)
        lhs = lhs * den
        return np.asarray(lhs < num if strict else lhs <= num, dtype=bool)

    def in_digits(self, j: int, k, adjoint: bool = True) -> np.ndarray:
        return in_cell(self.power(j, adjoint), k)

    def norm_power(self, j: int, adjoint: bool = False) -> float:
        """Spectral norm of ``M^j`` for any integer ``j``."""
        if j >= 0:
            return spectral_norm(self.power(j, adjoint))
        adj, D = self.inverse_power(-j, adjoint)
        return spectral_norm(adj) / D

    def spectral_info(self, j: int = 1) -> SpectralInfo:
        eig = self._eig
        spread = float(eig.max() - eig.min())
        isotropic = spread <= ISOTROPY_TOL * float(eig.max())
        if isotropic and self.dim > 1:
            _, vecs = np.linalg.eig(self._m.astype(float))
            isotropic = bool(np.linalg.matrix_rank(vecs, tol=1e-8) == self.dim)
        return SpectralInfo(
            op_norm=self.norm_power(j),
            inverse_op_norm=self.norm_power(-j),
            min_eig_abs=float(eig.min()),
            isotropic=isotropic,
            eig_abs=float(eig.max()) if isotropic else None,
        )

    def rate_base(self, j_values) -> float:
        """``|lambda|`` if isotropic, else the geometric mean of ``||M^{-j}||^{-1/j}``."""
        info = self.spectral_info()
        if info.isotropic:
            return info.eig_abs
        js = [j for j in j_values if j > 0]
        return float(np.exp(np.mean([-np.log(self.norm_power(-j)) / j for j in js])))


@lru_cache(maxsize=1024)
def _power(key: tuple, j: int, adjoint: bool) -> np.ndarray:
    if j < 0:
        raise ValueError("use inverse_power for negative exponents")
    base = [list(r) for r in key]
    if adjoint:
        base = [list(r) for r in zip(*base)]
    d = len(base)
    out = [[int(r == c) for c in range(d)] for r in range(d)]
    for _ in range(j):
        out = [[sum(out[r][t] * base[t][c] for t in range(d)) for c in range(d)]
               for r in range(d)]
    if max(abs(v) for row in out for v in row) >= _INT_LIMIT:
        raise OverflowError("matrix power too large for int64 arithmetic")
    arr = np.array(out, dtype=np.int64)
    arr.flags.writeable = False
    return arr


def as_dilation(M) -> DilationMatrix:
    return M if isinstance(M, DilationMatrix) else DilationMatrix(M)

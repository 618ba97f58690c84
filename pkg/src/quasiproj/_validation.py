"""Input validation shared by the operator and experiment layers."""
from __future__ import annotations

import math
from numbers import Integral

from .fourier import TrigPoly
from .lattice import DilationMatrix, InvalidMatrixError, as_dilation


def check_dilation(M) -> DilationMatrix:
    """Coerce to :class:`DilationMatrix`, raising ``ValueError`` on bad input."""
    try:
        return as_dilation(M)
    except InvalidMatrixError:
        raise
    except (TypeError, ValueError) as exc:
        raise InvalidMatrixError(f"cannot interpret {M!r} as a dilation matrix: {exc}") from exc


def check_level(j, minimum: int = 1) -> int:
    if isinstance(j, bool) or not isinstance(j, Integral) and not (isinstance(j, float) and j.is_integer()):
        raise ValueError(f"level must be an integer, got {j!r}")
    j = int(j)
    if j < minimum:
        raise ValueError(f"level must be >= {minimum}, got {j}")
    return j


def check_trigpoly(f, dim: int | None = None) -> TrigPoly:
    if not isinstance(f, TrigPoly):
        raise TypeError(f"expected a TrigPoly, got {type(f).__name__}")
    if dim is not None and f.dim != dim:
        raise ValueError(f"TrigPoly has dimension {f.dim}, expected {dim}")
    return f


def check_exponent(p, name: str = "p") -> float:
    p = float(p)
    if not (p >= 1 or math.isinf(p)):
        raise ValueError(f"{name} must lie in [1, inf], got {p}")
    return p

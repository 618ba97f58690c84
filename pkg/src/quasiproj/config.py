"""Flat ``key = value`` configuration files for experiments and checks.

Grammar (one entry per line)::

    # comment
    key = value            # trailing comments allowed
    dilation = "1,-1;1,1"  # quotes are stripped
    coeffs = [1, 0, -0.25] # arrays: comma-separated, brackets optional
    u1 = 11/6              # rationals stay exact

Unknown keys are rejected. Every key, its type and default is listed in
:data:`KEYS` (and by ``quasiproj --help``).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from .lattice import DilationMatrix, InvalidMatrixError


class ConfigError(ValueError):
    """Malformed configuration file or value."""


def parse_number(text: str):
    """``int`` or ``Fraction`` for exact literals, ``float`` otherwise (``inf`` allowed)."""
    t = text.strip()
    if not t:
        raise ConfigError("empty number")
    low = t.lower()
    if low in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        if "/" in t:
            return Fraction(t)
        if all(c in "+-0123456789" for c in t):
            return int(t)
        return float(t)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


def _strip_brackets(text: str) -> str:
    t = text.strip()
    if t[:1] in "[(" and t[-1:] in "])":
        t = t[1:-1]
    return t


def parse_list(text: str) -> list:
    t = _strip_brackets(text)
    return [parse_number(x) for x in t.split(",") if x.strip()] if t.strip() else []


def parse_str_list(text: str) -> list[str]:
    t = _strip_brackets(text)
    return [x.strip().strip("\"'") for x in t.split(",") if x.strip()]


def parse_terms(text: str) -> dict:
    """``"3:1; -3:1"`` (d = 1) or ``"1 2:0.5; 0 0:1"`` (d = 2) -> ``{freq: coeff}``.

    A coefficient may be complex (``1+2j``).
    """
    out = {}
    for item in text.split(";"):
        if not item.strip():
            continue
        if ":" not in item:
            raise ConfigError(f"term {item!r} lacks ':'")
        key, val = item.split(":", 1)
        try:
            freq = tuple(int(v) for v in key.replace(",", " ").split())
            coeff = complex(val.strip().replace(" ", ""))
        except ValueError as exc:
            raise ConfigError(f"bad term {item!r}") from exc
        out[freq] = out.get(freq, 0) + coeff
    return out


def parse_matrix_value(text: str) -> DilationMatrix:
    t = text.strip()
    if t.startswith("[["):
        t = ";".join(re.findall(r"\[([^\[\]]*)\]", t))
    try:
        return DilationMatrix(t)
    except (InvalidMatrixError, ValueError) as exc:
        raise ConfigError(f"bad dilation matrix {text!r}: {exc}") from exc


def _opt_number(text: str):
    return None if text.strip().lower() in ("", "none", "auto") else parse_number(text)


def _opt_str(text: str):
    return None if text.strip().lower() in ("", "none") else text


@dataclass(frozen=True)
class KeySpec:
    parser: Callable[[str], Any]
    default: Any
    help: str


KEYS: dict[str, KeySpec] = {
    # problem setup
    "dilation": KeySpec(parse_matrix_value, DilationMatrix([[2]]), "dilation matrix, row-major: 2 or 1,-1;1,1"),
    "j_min": KeySpec(int, 2, "first level of the run"),
    "j_max": KeySpec(int, 8, "last level of the run"),
    "level": KeySpec(int, 3, "single level for the approx verb"),
    # test function
    "f_kind": KeySpec(str, "decay", "decay | terms | file"),
    "kappa": KeySpec(parse_number, 3, "decay exponent of |n|^-kappa coefficients"),
    "f_scale": KeySpec(parse_number, 1, "coefficient scale of the decay law"),
    "truncation_radius": KeySpec(_opt_number, None, "R_f of the decay law (auto if unset)"),
    "f_terms": KeySpec(parse_terms, {}, "explicit coefficients 'n:c; ...' (d=2: 'n1 n2:c')"),
    "f_file": KeySpec(_opt_str, None, "TrigPoly text file"),
    # families
    "generator": KeySpec(str, "dirichlet", "dirichlet | fundamental_dirichlet | truncated_fejer"
                         " | fejer_full | bspline | combo | inverse_dual"),
    "analyzer": KeySpec(str, "ideal", "ideal | smoothed | differential | kantorovich"),
    "analyzer_scale": KeySpec(parse_number, 1, "multiplies the analyzer (e.g. 2 x kantorovich)"),
    "s": KeySpec(_opt_number, None, "spline order for bspline / combo (family default: 2 / 4)"),
    "delta": KeySpec(_opt_number, None, "ball radius for dirichlet / fejer / inverse_dual (family default)"),
    "c_f": KeySpec(parse_number, 1, "Fejer constant C_F"),
    "u1": KeySpec(parse_number, Fraction(11, 6), "combo coefficient u1"),
    "u2": KeySpec(parse_number, Fraction(-5, 6), "combo coefficient u2"),
    "coeffs": KeySpec(parse_list, [1], "differential analyzer coefficients c_0, c_1, ..."),
    "order": KeySpec(_opt_number, None, "differential growth order N (auto if unset)"),
    # norms and rates
    "norm": KeySpec(str, "a", "error norm: a (A_q^alpha) | lp (L_p on a grid)"),
    "p": KeySpec(parse_number, 2, "Lebesgue exponent"),
    "q": KeySpec(parse_number, 2, "coefficient exponent"),
    "alpha": KeySpec(parse_number, 0, "smoothness weight of the error norm"),
    "gamma": KeySpec(_opt_number, None, "source smoothness (auto: kappa - d/q - 1/4)"),
    "rate_law": KeySpec(str, "decay", "decay | lp | a_norm | none"),
    "rate_s": KeySpec(_opt_number, None, "approximation order s for the rate law (auto)"),
    "predicted_slope": KeySpec(_opt_number, None, "override of the predicted exponent"),
    "tolerance": KeySpec(parse_number, 0.2, "allowed |fitted - predicted| slope"),
    "oversample": KeySpec(int, 16, "grid oversampling for L_p norms"),
    "spectrum_periods": KeySpec(int, 32, "truncation of infinite kernels, in periods m^j"),
    # checks
    "conditions": KeySpec(parse_str_list, ["bounded"], "checks: growth, strang_fix, weak_compat,"
                          " bounded, strict_compat, class_B, lq_class"),
    "check_j_min": KeySpec(int, 1, "first level of condition windows"),
    "check_j_max": KeySpec(int, 6, "last level of condition windows"),
    "freq_radius": KeySpec(_opt_number, None, "growth-scan frequency radius (auto 512 / 64)"),
    "n_radius": KeySpec(_opt_number, None, "Strang-Fix alias radius (auto 64 / 4)"),
    "bound": KeySpec(_opt_number, None, "override of the bound a check compares with"),
    "region_radius": KeySpec(_opt_number, None, "restrict weak_compat to |xi| <= radius"),
    "strict_delta": KeySpec(_opt_number, None, "delta for strict_compat (auto: generator delta)"),
    "class_b_delta": KeySpec(_opt_number, None, "class_B avoidance radius (auto from generator)"),
    "class_b_radius": KeySpec(_opt_number, None, "class_B outer radius (auto from generator)"),
    "lq_q": KeySpec(parse_number, 2, "exponent of the L_q class norm"),
    # experiments
    "experiment": KeySpec(str, "convergence", "convergence | weak_split | kantorovich_ratio | mz"),
    "trials": KeySpec(int, 20, "random trials per level (mz)"),
    "lambda_factor": KeySpec(parse_number, Fraction(1, 2), "spectrum radius of mz test polynomials"),
    "p_list": KeySpec(parse_list, [1, 2, 4, math.inf], "Lebesgue exponents for mz"),
    "seed": KeySpec(int, 0xA1B2, "seed of random trials"),
    "output": KeySpec(_opt_str, None, "output path (CSV or TrigPoly text)"),
}


@dataclass
class Config:
    """Parsed configuration; attribute names equal the file keys."""

    values: dict = field(default_factory=dict)

    def __getattr__(self, name):
        vals = self.__dict__.get("values", {})
        if name in vals:
            return vals[name]
        if name in KEYS:
            return KEYS[name].default
        raise AttributeError(name)

    def get(self, name, default=None):
        return self.values.get(name, default)

    def is_set(self, name: str) -> bool:
        return name in self.values

    def with_overrides(self, overrides: dict) -> "Config":
        vals = dict(self.values)
        vals.update(overrides)
        return Config(vals)


def _split_line(line: str) -> tuple[str, str] | None:
    body = line
    in_q = None
    for i, c in enumerate(line):
        if c in "\"'":
            in_q = None if in_q == c else (in_q or c)
        elif c == "#" and in_q is None:
            body = line[:i]
            break
    body = body.strip()
    if not body:
        return None
    if "=" not in body:
        raise ConfigError(f"expected 'key = value', got {line.strip()!r}")
    key, val = body.split("=", 1)
    val = val.strip()
    if len(val) >= 2 and val[0] == val[-1] and val[0] in "\"'":
        val = val[1:-1]
    return key.strip(), val


def parse_value(key: str, raw: str):
    if key not in KEYS:
        raise ConfigError(f"unknown key {key!r}")
    try:
        return KEYS[key].parser(raw)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from exc


def loads(text: str) -> Config:
    vals = {}
    for n, line in enumerate(text.splitlines(), 1):
        try:
            kv = _split_line(line)
        except ConfigError as exc:
            raise ConfigError(f"line {n}: {exc}") from None
        if kv is None:
            continue
        key, raw = kv
        try:
            vals[key] = parse_value(key, raw)
        except ConfigError as exc:
            raise ConfigError(f"line {n}: {exc}") from None
    return Config(vals)


def load(path) -> Config:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    return loads(p.read_text(encoding="utf-8"))


def parse_overrides(items) -> dict:
    """``["key=value", ...]`` -> parsed values."""
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} must be key=value")
        key, raw = item.split("=", 1)
        raw = raw.strip()
        if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
            raw = raw[1:-1]
        out[key.strip()] = parse_value(key.strip(), raw)
    return out


def keys_help() -> str:
    width = max(len(k) for k in KEYS)
    return "\n".join(f"  {k.ljust(width)}  {spec.help} [default: {_show(spec.default)}]"
                     for k, spec in KEYS.items())


def _show(v) -> str:
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, list):
        return ",".join(_show(x) for x in v)
    if isinstance(v, dict):
        return "{}" if not v else str(v)
    return str(v)

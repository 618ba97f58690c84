"""Command-line entry point: ``quasiproj {check,approx,rates,report}``.

Exit codes: 0 when every check or fit passes, 1 when one fails, 2 for a
configuration error (bad key or value, malformed matrix, missing file or
output directory).
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import conditions as cond
from .config import Config, ConfigError, keys_help, load, parse_overrides
from .experiments import (build_analyzer, build_function, build_generator, dumps_csv,
                          effective_order, run_experiment)
from .fourier import a_norm, dumps_trigpoly, lp_norm
from .generators import FamilyError
from .lattice import InvalidMatrixError, as_dilation
from .projection import apply

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _window(cfg: Config) -> cond.Window:
    fr = None if cfg.freq_radius is None else int(cfg.freq_radius)
    nr = None if cfg.n_radius is None else int(cfg.n_radius)
    return cond.Window(int(cfg.check_j_min), int(cfg.check_j_max), fr, nr)


def _order(cfg: Config, g, a) -> float:
    if cfg.rate_s is not None:
        return float(cfg.rate_s)
    s = effective_order(g, a)
    return s if math.isfinite(s) else 1.0


def _spectrum_radius(cfg: Config, g, M, j: int):
    return None if g.finite_spectrum else float(cfg.spectrum_periods) * M.norm_power(j, adjoint=True)


def _write(text: str, output) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    p = Path(output)
    if not p.parent.is_dir():
        raise ConfigError(f"output directory does not exist: {p.parent}")
    p.write_text(text, encoding="utf-8")


def condition_reports(cfg: Config) -> list:
    """Run every check named in ``cfg.conditions``."""
    M = as_dilation(cfg.dilation)
    a = build_analyzer(cfg)
    g = build_generator(cfg, a)
    win = _window(cfg)
    s = _order(cfg, g, a)
    reports = []
    for name in cfg.conditions:
        if name == "growth":
            reports.append(cond.check_growth(a, cfg.order, M, win, cfg.bound))
        elif name == "strang_fix":
            reports.append(cond.check_strang_fix(g, s, M, win, float(cfg.q), float(cfg.alpha)))
        elif name == "weak_compat":
            reports.append(cond.check_weak_compat(g, a, s, M, win, cfg.region_radius, cfg.bound))
        elif name == "bounded":
            reports.append(cond.check_bounded(g, M, win))
        elif name == "strict_compat":
            delta = cfg.strict_delta if cfg.strict_delta is not None else g.params.get("delta")
            if delta is None:
                raise ConfigError("strict_compat needs strict_delta for this generator")
            reports.append(cond.check_strict_compat(g, a, delta, M, win))
        elif name == "class_B":
            cb = g.class_b
            delta = cfg.class_b_delta if cfg.class_b_delta is not None else (cb and cb.delta)
            R = cfg.class_b_radius if cfg.class_b_radius is not None else (cb and cb.radius_for(M.dim))
            if delta is None or R is None:
                raise ConfigError("class_B needs class_b_delta and class_b_radius for this generator")
            reports.append(cond.check_class_B(g, delta, R, M, win))
        elif name == "lq_class":
            val = cond.lq_class_norm(a, float(cfg.lq_q), M, int(cfg.check_j_max))
            ok = math.isfinite(val)
            reports.append(cond.ConditionReport("lq_class", float(cfg.lq_q), val, win.as_dict(), ok,
                                                {"j": int(cfg.check_j_max)}))
        else:
            raise ConfigError(f"unknown condition {name!r}")
    return reports


def run_check(cfg: Config) -> int:
    reports = condition_reports(cfg)
    print("\n\n".join(r.to_text() for r in reports))
    if cfg.output is not None:
        _write("\n".join([cond.CSV_HEADER] + [r.csv_row() for r in reports]) + "\n", cfg.output)
    return EXIT_OK if all(r.verdict for r in reports) else EXIT_FAIL


def run_approx(cfg: Config) -> int:
    """Apply ``Q_j`` once at ``cfg.level``; dump the error polynomial and its norms."""
    M = as_dilation(cfg.dilation)
    a = build_analyzer(cfg)
    g = build_generator(cfg, a)
    f, _ = build_function(cfg, M)
    j = int(cfg.level)
    res = apply(f, g, a, M, j, _spectrum_radius(cfg, g, M, j))
    err = res.error_coeffs
    fnorm = a_norm(f, 2, 0)
    lines = [f"level = {j}",
             f"error_a_norm = {a_norm(err, float(cfg.q), float(cfg.alpha)):.17g}",
             f"relative_error_A2 = {(a_norm(err, 2, 0) / fnorm if fnorm else 0.0):.17g}",
             f"error_lp_norm = {lp_norm(err, float(cfg.p), int(cfg.oversample)):.17g}",
             f"spectrum_size = {res.diagnostics['spectrum_size']}"]
    print("\n".join(lines))
    _write(dumps_trigpoly(err), cfg.output)
    return EXIT_OK


def run_rates(cfg: Config) -> int:
    res = run_experiment(cfg)
    for note in getattr(res, "notes", []):
        print(f"note: {note}", file=sys.stderr)
    _write(dumps_csv(res), cfg.output)
    return EXIT_OK if res.passed else EXIT_FAIL


def run_report(cfg: Config) -> int:
    """Condition checks followed by the configured experiment."""
    reports = condition_reports(cfg)
    print("\n\n".join(r.to_text() for r in reports))
    res = run_experiment(cfg)
    print()
    print(dumps_csv(res), end="")
    if cfg.output is not None:
        _write(dumps_csv(res), cfg.output)
    ok = all(r.verdict for r in reports) and res.passed
    return EXIT_OK if ok else EXIT_FAIL


VERBS = {"check": run_check, "approx": run_approx, "rates": run_rates, "report": run_report}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasiproj",
        description="Periodic quasi-projection operators: condition checks and rate experiments.",
        epilog="exit codes: 0 pass, 1 fail, 2 configuration error\n\nconfiguration keys:\n"
               + keys_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("verb", choices=sorted(VERBS))
    parser.add_argument("-c", "--config", help="key = value configuration file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a configuration key (repeatable)")
    parser.add_argument("-o", "--output", help="output path (overrides the output key)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args.config) if args.config else Config()
        cfg = cfg.with_overrides(parse_overrides(args.overrides))
        if args.output is not None:
            cfg = cfg.with_overrides({"output": args.output})
        return VERBS[args.verb](cfg)
    except (ConfigError, InvalidMatrixError, FamilyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

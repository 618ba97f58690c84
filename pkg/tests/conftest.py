"""Shared fixtures and hypothesis strategies."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from quasiproj import TrigPoly

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

SEED = 0xA1B2
QUINCUNX = "1,-1;1,1"


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


def random_poly(rng, radius: int, dim: int = 1, real: bool = False) -> TrigPoly:
    return TrigPoly.random(rng, radius, dim=dim, real=real)


@st.composite
def nonsingular_matrices(draw, max_det: int = 12):
    """Integer 1x1 or 2x2 matrices with ``2 <= |det| <= max_det``."""
    d = draw(st.sampled_from([1, 2]))
    if d == 1:
        v = draw(st.integers(2, max_det))
        return np.array([[v * draw(st.sampled_from([1, -1]))]])
    entries = st.integers(-4, 4)
    m = draw(st.lists(entries, min_size=4, max_size=4)
             .filter(lambda e: 2 <= abs(e[0] * e[3] - e[1] * e[2]) <= max_det))
    return np.array(m).reshape(2, 2)


@st.composite
def poly_coeffs(draw, radius: int = 6):
    """Dictionary ``{n: c}`` for a small 1-D polynomial."""
    ns = draw(st.lists(st.integers(-radius, radius), min_size=1, max_size=8, unique=True))
    vals = draw(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False,
                                            allow_infinity=False),
                         min_size=len(ns), max_size=len(ns)))
    return {(n,): c for n, c in zip(ns, vals)}


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion."""
    outcome = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            num = int(nodeid.split("test_criterion_")[1][:2])
            ok = key == "passed"
            outcome[num] = outcome.get(num, True) and ok
    if not outcome:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(outcome):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if outcome[num] else 'FAIL'}")

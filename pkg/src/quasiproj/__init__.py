"""Periodic quasi-projection operators with integer matrix dilations."""
from .fourier import DecayLaw, TrigPoly, a_norm, in_out_norms, lp_norm, synthesize_grid, theta_weight
from .generators import (dirichlet, differential, fejer_full, fundamental_dirichlet, ideal_sampling,
                         inverse_dual, kantorovich, make_analyzer, make_generator,
                         periodized_bspline, shifted_spline_combo, smoothed_sampling,
                         truncated_fejer)
from .lattice import DilationMatrix, decompose, digit_set
from .projection import (QuasiProjector, analysis_coefficients, apply, apply_sampling,
                         best_approx_l2, discrete_norm, vallee_poussin)

__version__ = "0.1.0"

"""Numerical workbench for the argument principle over families of analytic
discs: winding and linking numbers, logarithmic residues, complex moments,
rank fields of disc families and CR dimensions of real submanifolds."""

__version__ = "0.1.0"

from .contour import ClosedCurve, FourierData, sample_curve, spectral_derivative, contour_integral  # noqa: E402
from .argument import (winding_number, zero_count, linking_number, curve_degree, locate_zeros,  # noqa: E402
                       log_residue_pv, ZeroList, ResidueValue)
from .moments import complex_moments, disc_extension, dbar_residual, MomentReport  # noqa: E402
from .families import (ParamManifold, DiscFamily, build_family, partials, rank_field, regularity_check,  # noqa: E402
                       jacobian_field, fiber_ratio_test, track_zeros, degeneracy_check,
                       orbit_nontriviality, parametric_ap_verdict, RankField)
from .cr import ManifoldPatch, tangent_frame, cr_dimension, classify, graph_lift, cr_verdict_from_rank  # noqa: E402
from .scenarios import load_scenario, list_builtins, ScenarioError  # noqa: E402
from .report import Report, emit  # noqa: E402
from .runner import run, run_ref, run_many, RunError  # noqa: E402

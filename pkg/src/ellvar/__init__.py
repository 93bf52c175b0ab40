"""ellvar: desk-scale variational toolkit for a nonhomogeneous quasilinear
elliptic system with concave-convex terms and sign-changing weights.

The package evaluates the system's energy functional and its exact
discrete gradient on rectangular Dirichlet grids, certifies the built-in
coefficient families, computes the explicit admissibility thresholds from
discrete Sobolev constants, and numerically locates the two critical
pairs the admissible regime supports: a negative-energy minimizer inside
a norm ball and a positive-energy saddle across the energy barrier.
"""

from importlib import resources

__version__ = "0.1.0"

from .config import RunConfig, loads as load_config, dumps as dump_config
from .energy import (EnergyBreakdown, ProblemSpec, energy, energy_gradient,
                     gradient_check, residual, residual_dual)
from .grid import (FieldPair, Grid, gradient_field, norm_Linf, norm_Lp,
                   norm_W, random_field)
from .phi import (ConditionReport, PhiSpec, Phi_eval, certify,
                  family_in_paper_range, phi_eval)
from .pipeline import ResolvedSetup, resolve
from .solvers import (Classification, SolveResult, SolverOptions, classify,
                      endpoint_beyond_sphere, minimize_on_ball, mountain_pass,
                      seed_negative)
from .thresholds import (SobolevConstants, ThresholdReport, compute_thresholds,
                         estimate_S2, estimate_Sp, sphere_lower_bound_check)
from .weights import WeightSet, check_hypotheses, sample, sample_weights


def demo_config_path() -> str:
    """Filesystem path of the bundled demo configuration."""
    return str(resources.files("ellvar").joinpath("data/demo.cfg"))

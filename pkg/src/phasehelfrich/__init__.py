"""Phase-dependent Helfrich energy of graphs over a planar domain.

Contact curves and their signed distance, a cut-cell grid discretisation,
energy and first variation, distance-based test functions, discrete critical
points and checks of the contact-line jump conditions.
"""
from __future__ import annotations

from .critical import Problem, SolveReport, discrete_gradient, minimize, minimize_two_patch
from .curve import ContactCurve, circle_curve, ellipse_curve, normal_lipschitz_constant, resample_arclength, segment_curve
from .energy import (
    EnergyBreakdown,
    HelfrichParams,
    area_volume_terms,
    bulk_energy,
    line_tension,
    total_energy,
)
from .errors import *  # noqa: F401,F403
from .kernels import BACKEND
from .reach import (
    ProjectionResult,
    one_sided_distance,
    project,
    reach_radius,
    signed_distance,
    signed_distance_gradient,
)
from .scenario import Scenario, load_scenario
from .surface import (
    A0,
    A1,
    NEAR_E,
    Discretization,
    Domain,
    Grid,
    OneSidedJet,
    ScalarField,
    derivatives,
    extend_to_interface,
    label_phases,
    mean_curvature,
)
from .testfn import bump, build_phi, build_psi, partition_of_unity
from .variation import (
    C1_PHI,
    ONESIDED_PSI,
    SMOOTH,
    TestFunction,
    boundary_functional,
    delta_bulk,
    delta_H,
    fd_first_variation,
    first_variation,
)
from .verify import jump_residual, one_sided_residual, prefactor, refinement_study

__version__ = "0.1.0"

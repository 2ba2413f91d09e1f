"""Discontinuous Galerkin superconvergence toolkit for 1-D linear advection."""

from dgsc.dg_core import DgState, Mesh, RunConfig, rk4_step, run, semidiscrete_rhs
from dgsc.diagnostics import (
    ErrorReport,
    convergence_rates,
    downwind_error,
    error_report,
    moment_error,
    period_difference,
    radau_point_error,
)
from dgsc.fourier import FrequencySet, damping_time, frequencies, mode_coefficients, operator_residual
from dgsc.pade import FGPair, build_fg, nonphysical_roots, pade_defect
from dgsc.projections import (
    InitialCondition,
    project,
    project_equidistant_interp,
    project_l2,
    project_left_radau,
)

__version__ = "0.1.0"

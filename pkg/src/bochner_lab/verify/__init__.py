"""Tolerance-bearing checks over quadrature grids and machine-readable reports."""
from .checks import (
    CHECKS,
    Context,
    check_bochner,
    check_chart_overlap,
    check_classify,
    check_constants,
    check_convergence,
    check_d_squared,
    check_energy_bound,
    check_frame_rotation,
    check_hermitian_identities,
    check_inequalities,
    check_integral_criteria,
    check_perturbation_sweep,
    check_harmonic_integrable,
    check_selfadjoint,
    check_volume,
    check_weitzenbock,
    check_zero_fixture,
    d_squared_residual,
    random_endomorphism,
    run_check,
)
from .integrals import GridMismatchError, global_inner
from .pointwise import NodeValues, evaluate, evaluate_points
from .report import CheckResult, Report, validate
from .suite import run_suite
from .tolerances import PROFILES, Tolerances, profile


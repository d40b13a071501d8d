"""Traveling fronts for ignition-temperature combustion with fractional reaction order."""

from .asymptotics import (AsymptoticRegime, alpha_zero_kappa, front_alpha_one,
                          front_alpha_zero, front_theta_near_one, front_theta_small,
                          phi_zeta_asymptotic, w0_profile, w_asymptotic, w_upper_bound)
from .front_solver import (BracketError, FrontSolution, ProfileTable, ResidualReport, phi,
                           reconstruct_profiles, solve_front, solve_sigma, validate_front, zeta)
from .phase_portrait import AngleReport, PolarTrace, angle_monotonicity_report, to_polar
from .profile_ode import (ConsistencyError, IntegrationError, ModelParams, ParameterError,
                          WTrajectory, build_trajectory, series_seed)

__all__ = [
    "AngleReport", "AsymptoticRegime", "BracketError", "ConsistencyError", "FrontSolution",
    "IntegrationError", "ModelParams", "ParameterError", "PolarTrace", "ProfileTable",
    "ResidualReport", "WTrajectory", "alpha_zero_kappa", "angle_monotonicity_report",
    "build_trajectory", "front_alpha_one", "front_alpha_zero", "front_theta_near_one",
    "front_theta_small", "phi", "phi_zeta_asymptotic", "reconstruct_profiles", "series_seed",
    "solve_front", "solve_sigma", "to_polar", "validate_front", "w0_profile", "w_asymptotic",
    "w_upper_bound", "zeta",
]

"""Thresholds and Mourre-positivity bands for the Molchanov-Vainberg Laplacian."""

__version__ = "0.1.0"

from .cheb import Well, bracket, cheb_T, cheb_T_prime, cheb_U, cheb_U_prime, inv_T_on_well
from .gfun import G, G_prime, ConjugateOperator, ModelConfig, g2, g2_prime, g3, m
from .solver import (PingPongSchedule, ThresholdSolution, construct_chain,
                     continued_fraction_solve, convergence_study, lift_threshold,
                     omega_alignment, omega_closed_form, omega_matrix_oracle,
                     solve_alignment, solve_F, solve_J2, solve_well, theta0_set)
from .interp import build_system, search_sigma, solve_rho
from .scan import PositivityReport, ScanConfig, emit_profile, find_bands, min_G_2d, min_G_3d

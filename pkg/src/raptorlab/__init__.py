"""Raptor-code toolkit for the low-SNR BI-AWGN regime.

Submodules:

* numerics      - phi and friends, EXIT function, capacity, density evolution
* degree_design - LP degree-distribution designs, searches, bounds
* asymptotic    - infinite-degree closed forms and moment recovery
* codec         - LDPC precode + LT layer + sum-product decoding
* channel_sim   - AWGN channel, rateless transmission loop, measurements
* cli           - command-line frontend
"""

from .numerics import (FOUR_LN2, NumericalRangeError, QuadratureSpec, Snr,
                       bi_awgn_capacity, density_evolution_trace, exit_fd,
                       exit_profile, one_minus_phi, phi, phi_inv,
                       phi_inv_integral)
from .degree_design import (DegreeDistribution, DesignResult, LpGrid,
                            LtParameters, avg_degree_lower_bound,
                            design_lowsnr, design_original, design_practical,
                            iteration_upper_bound, max_eta_upper_bound,
                            search_max_eta, search_max_mu,
                            solve_linear_program, verify_on_refined_grid)
from .asymptotic import (beta_min, hilbert_moment_distribution,
                         omega_infinity, phi_derivative_at_zero,
                         small_degree_fractions)

__version__ = "0.1.0"

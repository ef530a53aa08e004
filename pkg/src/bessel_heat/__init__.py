"""Heat kernels of Bessel processes killed at a level a > 0.

Asymptotic expansions and rigorous brackets, exact mu = 1/2 formulas,
the Hunt convolution route, hitting-time densities and a Monte Carlo
oracle. Special functions and quadrature are implemented in-house.
"""

from .errors import (BesselOverflowError, BudgetExceeded, CatastrophicSubtraction,
                     DomainError, PrecisionLossError, QuadratureFailure,
                     SeriesBudgetExceeded)
from .hitting import q_asymptotic, q_bounds, q_envelope, q_half_exact, to_unit_level
from .kernels import (Bracket, ExpansionEval, KernelQuery, Regime, bracket_kernel,
                      classify_regime, envelope_sharp, evaluate_asymptotic,
                      exact_half_kernel, exact_half_r, expansion_boundary,
                      expansion_interior, free_kernel, free_kernel_expansion,
                      hunt_kernel, hunt_kernel_eval, leading_term, reflect_index,
                      rescale)
from .montecarlo import (DensityEstimate, McConfig, Scheme, estimate_hitting_mc,
                         estimate_hunt_mc, estimate_kernel_mc, simulate_paths)

__version__ = "0.1.0"

"""Numerical laboratory for two tunnel-coupled Bose-Einstein condensates.

Equilibrium thermodynamics, the two-branch quasiparticle spectrum, static
fluctuation-operator moments of the total and relative canonical pairs,
their oscillation dynamics, and an independent finite-volume lattice oracle
that cross-checks every closed form.
"""

__version__ = "0.1.0"

from .dynamics import (
    EvolutionMatrix,
    SignalTrace,
    autocorrelation_n,
    commutator_conservation,
    evolution_matrix,
    phi_current_trace,
    superposition_signal,
)
from .equilibrium import (
    EquilibriumSolution,
    OrderParameters,
    critical_density,
    order_parameters,
    phase_diagram_sweep,
    solve_equilibrium,
)
from .errors import (
    CondensateModelError,
    ConvergenceError,
    CrossCheckError,
    DegenerateStateError,
    DivergenceError,
    DomainError,
    EmptyLatticeError,
    InconsistentMomentsError,
)
from .fluctuations import (
    RelativePairReport,
    TotalPairReport,
    coarse_grain_distance,
    coarse_grain_equal,
    current_split_moments,
    phase_link_moments,
    relative_commutator_scalar,
    relative_current_variance,
    relative_number_variance,
    relative_pair_report,
    relative_phase_report,
    relative_phase_variance,
    symmetrized_pair_kernel,
    total_commutator_scalar,
    total_number_variance,
    total_pair_report,
    total_phase_variance,
    uncertainty_product_ground,
)
from .lattice import (
    ConvergenceReport,
    LatticeSpec,
    compensated_sum,
    convergence_report,
    lattice_c_rel,
    lattice_density,
    lattice_modes,
    lattice_rel_number_variance,
    lattice_total_number_variance,
    lattice_total_phase_variance,
)
from .model import (
    BranchPoint,
    ModelParams,
    branch_energies,
    branch_point,
    dispersion,
    occupation,
    quasiparticle_map,
)
from .numerics import (
    DensityValue,
    QuadratureSpec,
    adaptive_quad,
    find_root,
    polylog_bose,
    rho_alpha,
    rho_quadrature,
    rho_series,
    thermal_wavelength,
)

__all__ = [name for name in dir() if not name.startswith("_")]

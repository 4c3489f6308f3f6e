"""Static fluctuation theory of the total and relative canonical pairs.

Total pair: the k-mode number fluctuation and the conjugate phase-like
fluctuation built from the gapless branch.  Their commutator is the scalar
sqrt(rho0), the phase variance is (1/2)coth(beta*eps_k/2) in closed form,
and the number variance adds two momentum integrals over the pair kernel
n(a) + n(b) + 2 n(a) n(b) to the condensate term.

Relative pair: the zero-mode relative number and relative current
fluctuations, a canonical pair with scalar c_rel = (rho0 + rho(0) -
rho(2*gamma)) / gamma.  Their variances are tied by the virial relation
Var(n_rel) = (2*gamma)^2 Var(j_rel), and the condensate part of the current
is locked to the relative phase fluctuation through the coefficient
sqrt(rho0)/gamma.

Two fluctuation observables are identified when the variance of their
difference vanishes; :func:`coarse_grain_distance` computes exactly that
quantity from the moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateStateError, DomainError, InconsistentMomentsError
from .equilibrium import EquilibriumSolution
from .model import ModelParams, as_momentum, occupation
from .numerics import QuadratureSpec, adaptive_quad

_BETA_EPS_MAX = 745.0


def symmetrized_pair_kernel(a, b):
    """Pair kernel n(a) + n(b) + 2 n(a) n(b) with n(x) = 1/(e^x - 1).

    Accepts scalars or arrays of positive dimensionless energies.  For
    b - a = 2*beta*gamma this equals (n(a) - n(b)) * coth((b - a)/2), the
    per-mode identity behind the virial relation.
    """
    with np.errstate(over="ignore"):
        na = 1.0 / np.expm1(a)
        nb = 1.0 / np.expm1(b)
    return na + nb + 2.0 * na * nb


def _coth_from(energy: float, beta: float) -> float:
    """coth(beta*energy/2) = 1 + 2 n(energy), exact limit 1 at beta = inf."""
    return 1.0 + 2.0 * occupation(energy, beta)


def total_phase_variance(params: ModelParams, k: Sequence[float]) -> float:
    """Variance (1/2) coth(beta*eps_k/2) of the total phase fluctuation.

    The k = 0 value exists only in the ground state, where it is exactly
    1/2; at finite beta the k -> 0 limit diverges and k = 0 is rejected.
    """
    eps = float(as_momentum(k) @ as_momentum(k)) / (2.0 * params.mass)
    if eps == 0.0:
        if params.is_ground_state:
            return 0.5
        raise DomainError(
            "total-pair variances at k = 0 exist only in the ground state"
        )
    return 0.5 + occupation(eps, params.beta)


def _log_bose_weight(y: float) -> float:
    # log(1 - e^-y) for y > 0; the clamp only matters at the measure-zero
    # sample where the radial quadrature lands exactly on the singular line
    if y < 1e-300:
        y = 1e-300
    if y > 1e-8:
        return math.log1p(-math.exp(-y))
    return math.log(-math.expm1(-y))


def _pair_integral(params: ModelParams, gap: float, kmag: float, rel_tol: float) -> float:
    """Momentum integral of the pair kernel over one branch.

    integral d^3p/(2 pi)^3 of kernel(beta*E_p, beta*E_{p+k}) with E_p =
    eps_p + gap, reduced by azimuthal symmetry; the angular (cos theta)
    integral is done in closed form, leaving one adaptive radial quadrature.
    A gapless branch has an integrable logarithmic singularity at p = kmag,
    handed to the integrator as a breakpoint.
    """
    beta = params.beta
    m = params.mass
    pmax = math.sqrt(2.0 * m * _BETA_EPS_MAX / beta)
    c = 2.0 * m / beta

    def radial(p: float) -> float:
        a = beta * (p * p / (2.0 * m) + gap)
        if a <= 0.0:
            return 0.0
        if a > 700.0:
            e = math.exp(-a)
            na = e / (1.0 - e)
        else:
            na = 1.0 / math.expm1(a)
        y_hi = beta * ((p + kmag) ** 2 / (2.0 * m) + gap)
        y_lo = beta * ((p - kmag) ** 2 / (2.0 * m) + gap)
        angular = (1.0 + 2.0 * na) * c * (_log_bose_weight(y_hi) - _log_bose_weight(y_lo))
        return p * (4.0 * p * kmag * na + angular) / (8.0 * math.pi ** 2 * kmag)

    spec = QuadratureSpec(rel_tol=rel_tol, abs_tol=1e-300, max_subdivisions=2000)
    val, _ = adaptive_quad(radial, 0.0, pmax, spec, points=(kmag,) if kmag < pmax else None)
    return val


def total_number_variance(
    params: ModelParams,
    sol: EquilibriumSolution,
    k: Sequence[float],
    rel_tol: float = 1e-7,
) -> float:
    """Variance of the total number fluctuation at momentum k != 0.

    Sum of the condensate term (rho0/2) coth(beta*eps_k/2) and the two
    branch integrals of the pair kernel, each evaluated to ``rel_tol``.  In
    the ground state all thermal terms vanish and the value is exactly
    rho0/2 (k = 0 included, where the limit is regular).
    """
    if params.is_ground_state:
        return 0.5 * sol.rho0
    arr = as_momentum(k)
    kmag = math.sqrt(float(arr @ arr))
    if kmag == 0.0:
        raise DomainError(
            "total-pair variances at k = 0 exist only in the ground state"
        )
    eps_k = kmag * kmag / (2.0 * params.mass)
    condensate = sol.rho0 * (0.5 + occupation(eps_k, params.beta))
    gap_minus = sol.delta - params.gamma
    gap_plus = sol.delta + params.gamma
    i_minus = _pair_integral(params, gap_minus, kmag, rel_tol)
    i_plus = _pair_integral(params, gap_plus, kmag, rel_tol)
    return condensate + 0.5 * (i_minus + i_plus)


def total_commutator_scalar(sol: EquilibriumSolution) -> float:
    """Scalar sqrt(rho0) of the total-pair commutator; zero without condensate."""
    return math.sqrt(sol.rho0)


def uncertainty_product_ground(sol: EquilibriumSolution) -> float:
    """Ground-state uncertainty product (rho0/2) * (1/2) = rho0/4."""
    return 0.25 * sol.rho0


@dataclass(frozen=True)
class TotalPairReport:
    """Variances, commutator scalar and uncertainty product of the total pair."""

    k: tuple[float, float, float]
    var_n_tot: float
    var_phi_tot: float
    commutator_scalar: float
    uncertainty_product: float


def total_pair_report(
    params: ModelParams,
    sol: EquilibriumSolution,
    k: Sequence[float],
    rel_tol: float = 1e-7,
) -> TotalPairReport:
    arr = as_momentum(k)
    var_n = total_number_variance(params, sol, arr, rel_tol)
    var_phi = total_phase_variance(params, arr)
    return TotalPairReport(
        k=(float(arr[0]), float(arr[1]), float(arr[2])),
        var_n_tot=var_n,
        var_phi_tot=var_phi,
        commutator_scalar=total_commutator_scalar(sol),
        uncertainty_product=var_n * var_phi,
    )


def relative_commutator_scalar(params: ModelParams, sol: EquilibriumSolution) -> float:
    """Commutator scalar c_rel = (rho0 + rho(0) - rho(2*gamma)) / gamma.

    In the normal phase the same expression is evaluated with rho0 = 0 and
    the thermal densities at the solved gap variable; that value is a
    thermal remainder outside the condensed regime the canonical-pair
    statement refers to, and reports carry a flag for it.
    """
    return (sol.rho0 + sol.rho_th_minus - sol.rho_th_plus) / params.gamma


def relative_number_variance(params: ModelParams, sol: EquilibriumSolution) -> float:
    """Variance c_rel * gamma * coth(beta*gamma) of the relative number pair.

    The ground-state limit is exactly rho0.
    """
    if params.is_ground_state:
        return sol.rho0
    c_rel = relative_commutator_scalar(params, sol)
    return c_rel * params.gamma * _coth_from(2.0 * params.gamma, params.beta)


def relative_current_variance(params: ModelParams, sol: EquilibriumSolution) -> float:
    """Relative current variance, fixed by the virial relation as
    Var(n_rel) / (2*gamma)^2."""
    return relative_number_variance(params, sol) / (2.0 * params.gamma) ** 2


def relative_phase_variance(params: ModelParams, sol: EquilibriumSolution) -> float:
    """Variance (1/4) coth(beta*gamma) of the relative phase fluctuation."""
    return 0.25 * _coth_from(2.0 * params.gamma, params.beta)


def relative_phase_report(
    params: ModelParams, sol: EquilibriumSolution
) -> tuple[float, float, float]:
    """(var_phi_rel, link_coefficient, j0_variance) of the relative pair.

    The condensate part of the relative current is the relative phase
    fluctuation scaled by sqrt(rho0)/gamma, so its variance is the exact
    product link^2 * var_phi_rel.  Undefined without condensate.
    """
    if not sol.condensed or sol.rho0 == 0.0:
        raise DegenerateStateError(
            "relative phase link undefined without condensate (rho0 = 0)"
        )
    var_phi = relative_phase_variance(params, sol)
    link = math.sqrt(sol.rho0) / params.gamma
    return var_phi, link, link * link * var_phi


@dataclass(frozen=True)
class RelativePairReport:
    """Commutator scalar, variances and phase link of the relative pair.

    ``duhamel_nn`` is c_rel/beta and exists only at finite temperature.
    ``condensed`` is False when the numbers are the thermal remainder of a
    normal-phase state rather than the condensed-regime quantities.
    """

    c_rel: float
    duhamel_nn: float | None
    var_n_rel: float
    var_j_rel: float
    var_phi_rel: float
    phase_link_coefficient: float
    condensed: bool


def relative_pair_report(params: ModelParams, sol: EquilibriumSolution) -> RelativePairReport:
    c_rel = relative_commutator_scalar(params, sol)
    var_n = relative_number_variance(params, sol)
    link = math.sqrt(sol.rho0) / params.gamma if sol.rho0 > 0.0 else 0.0
    return RelativePairReport(
        c_rel=c_rel,
        duhamel_nn=None if params.is_ground_state else c_rel / params.beta,
        var_n_rel=var_n,
        var_j_rel=var_n / (2.0 * params.gamma) ** 2,
        var_phi_rel=relative_phase_variance(params, sol),
        phase_link_coefficient=link,
        condensed=sol.condensed and sol.rho0 > 0.0,
    )


def coarse_grain_distance(var_a: float, var_b: float, cross_sym: float) -> float:
    """Variance of the difference of two fluctuation observables.

    var_a + var_b - 2 * cross_sym, where ``cross_sym`` is the symmetrized
    cross moment (the antisymmetric, purely imaginary commutator part
    cancels in the square of the difference).  A result below -1e-12 means
    the moments cannot come from one state.
    """
    for name, v in (("var_a", var_a), ("var_b", var_b)):
        if not math.isfinite(v) or v < 0.0:
            raise DomainError(f"{name} must be a non-negative finite variance")
    if not math.isfinite(cross_sym):
        raise DomainError("cross_sym must be finite")
    d = var_a + var_b - 2.0 * cross_sym
    if d < -1e-12:
        raise InconsistentMomentsError(
            f"negative squared distance {d!r} from moments "
            f"({var_a!r}, {var_b!r}, {cross_sym!r})"
        )
    return d


def coarse_grain_equal(
    var_a: float, var_b: float, cross_sym: float, rel_tol: float = 1e-10
) -> bool:
    """Whether two fluctuation observables coincide as operators."""
    return coarse_grain_distance(var_a, var_b, cross_sym) < rel_tol * max(var_a, var_b)


def phase_link_moments(
    params: ModelParams, sol: EquilibriumSolution
) -> tuple[float, float, float]:
    """Moments (var_A, var_B, cross) of A = F(j0_rel), B = (sqrt(rho0)/gamma) F(phi_rel).

    The condensate current IS the scaled phase fluctuation, so all three
    moments coincide at (rho0 / (2*gamma)^2) coth(beta*gamma); they are
    returned from one shared evaluation, making the coarse-graining
    distance vanish identically.
    """
    if not sol.condensed or sol.rho0 == 0.0:
        raise DegenerateStateError(
            "relative phase link undefined without condensate (rho0 = 0)"
        )
    v = sol.rho0 / (2.0 * params.gamma) ** 2 * _coth_from(2.0 * params.gamma, params.beta)
    return v, v, v


def current_split_moments(
    params: ModelParams, sol: EquilibriumSolution
) -> tuple[float, float, float]:
    """Moments (var_A, var_B, cross) of A = F(j_rel), B = F(j0_rel).

    The condensate part and the k != 0 remainder of the relative current
    are uncorrelated, so the cross moment equals the condensate variance.
    The coarse-graining distance is then Var(j_rel) - Var(j0_rel) =
    coth(beta*gamma) (rho(0) - rho(2*gamma)) / (2*gamma)^2: strictly
    positive at finite beta, zero in the ground state.
    """
    if not sol.condensed or sol.rho0 == 0.0:
        raise DegenerateStateError(
            "relative current split undefined without condensate (rho0 = 0)"
        )
    var_j = relative_current_variance(params, sol)
    var_j0 = sol.rho0 / (2.0 * params.gamma) ** 2 * _coth_from(2.0 * params.gamma, params.beta)
    return var_j, var_j0, var_j0

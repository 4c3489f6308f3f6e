"""Equilibrium state of the coupled gases: chemical potential, condensate
density and phase structure.

Above the critical density the chemical potential locks to mu = lam*rho -
gamma, the gap variable delta = lam*rho - mu sticks at gamma, and the
excess density over rho(0) + rho(2*gamma) condenses into the k = 0 mode of
the minus branch.  Below it, delta > gamma solves the density closure
rho(delta - gamma) + rho(delta + gamma) = rho.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .errors import ConvergenceError, CrossCheckError, DomainError
from .model import ModelParams
from .numerics import find_root, rho_alpha, rho_series

_BRACKET_GROWTH_LIMIT = 200


@dataclass(frozen=True)
class EquilibriumSolution:
    """Solved equilibrium data at one parameter point.

    Invariants: ``condensed`` iff rho >= rho_c iff delta == gamma; the
    densities close, rho0 + rho_th_minus + rho_th_plus = rho, to 1e-10
    relative in either phase.
    """

    mu: float
    delta: float
    rho0: float
    rho_th_minus: float
    rho_th_plus: float
    rho_c: float
    condensed: bool


@dataclass(frozen=True)
class OrderParameters:
    """Expectation values of the creation fields in the symmetry-broken state.

    ``b_minus`` is sqrt(rho0) in the gauge where the minus-branch order
    parameter is real; the bare-gas expectations then carry phases +-phi/2.
    All three vanish without condensation.
    """

    b_minus: complex
    a1: complex
    a2: complex


def critical_density(params: ModelParams) -> float:
    """Condensation threshold rho(0) + rho(2*gamma); zero in the ground state."""
    return (
        rho_alpha(params, 0.0).value
        + rho_alpha(params, 2.0 * params.gamma).value
    )


def solve_equilibrium(params: ModelParams) -> EquilibriumSolution:
    """Solve the density closure for the chemical potential and condensate.

    Condensed branch (rho >= rho_c, the threshold itself included so that
    every rho0-proportional quantity vanishes continuously): mu is pinned to
    lam*rho - gamma and rho0 absorbs the density the thermal branches cannot
    carry.  Normal branch: delta is bracketed on (gamma, delta_hi], growing
    delta_hi geometrically until the thermal density drops below rho, and
    then solved to root residual ~1e-14.
    """
    gamma = params.gamma
    if params.is_ground_state:
        return EquilibriumSolution(
            mu=params.lam * params.rho - gamma,
            delta=gamma,
            rho0=params.rho,
            rho_th_minus=0.0,
            rho_th_plus=0.0,
            rho_c=0.0,
            condensed=True,
        )

    rho_minus = rho_alpha(params, 0.0).value
    rho_plus = rho_alpha(params, 2.0 * gamma).value
    rho_c = rho_minus + rho_plus

    if params.rho >= rho_c:
        rho0 = max(0.0, params.rho - rho_minus - rho_plus)
        return EquilibriumSolution(
            mu=params.lam * params.rho - gamma,
            delta=gamma,
            rho0=rho0,
            rho_th_minus=rho_minus,
            rho_th_plus=rho_plus,
            rho_c=rho_c,
            condensed=True,
        )

    def excess(delta: float) -> float:
        return (
            rho_series(params, delta - gamma)
            + rho_series(params, delta + gamma)
            - params.rho
        )

    # The thermal density decays like e^(-beta*delta), so doubling the
    # bracket width past gamma + 1/beta terminates after a handful of steps.
    width = 1.0 / params.beta
    for _ in range(_BRACKET_GROWTH_LIMIT):
        if excess(gamma + width) < 0.0:
            break
        width *= 2.0
    else:
        raise ConvergenceError(
            "could not bracket the normal-phase gap variable; "
            f"density sum never fell below rho = {params.rho!r}"
        )

    delta = find_root(excess, (gamma, gamma + width), tol=1e-15)
    th_minus = rho_alpha(params, delta - gamma).value
    th_plus = rho_alpha(params, delta + gamma).value
    return EquilibriumSolution(
        mu=params.lam * params.rho - delta,
        delta=delta,
        rho0=0.0,
        rho_th_minus=th_minus,
        rho_th_plus=th_plus,
        rho_c=rho_c,
        condensed=False,
    )


def order_parameters(sol: EquilibriumSolution, params: ModelParams) -> OrderParameters:
    """Order parameters in the gauge where the minus-branch value is real."""
    if not sol.condensed or sol.rho0 == 0.0:
        return OrderParameters(b_minus=0j, a1=0j, a2=0j)
    amp = math.sqrt(sol.rho0)
    half = math.sqrt(0.5 * sol.rho0)
    phase = cmath.exp(0.5j * params.phi)
    return OrderParameters(
        b_minus=complex(amp),
        a1=half * phase,
        a2=half * phase.conjugate(),
    )


def _monotone_direction(grid: Sequence[float]) -> int:
    diffs = [grid[i + 1] - grid[i] for i in range(len(grid) - 1)]
    if all(d > 0.0 for d in diffs):
        return 1
    if all(d < 0.0 for d in diffs):
        return -1
    raise DomainError("sweep grid must be strictly monotone")


def phase_diagram_sweep(
    params: ModelParams,
    axis: str,
    grid: Iterable[float],
    max_workers: int = 1,
) -> tuple[EquilibriumSolution, ...]:
    """Solve the equilibrium along a strictly monotone rho or beta grid.

    Results are ordered by grid index regardless of how the points are
    evaluated; the condensate density is checked to be monotone along the
    grid (non-decreasing in rho at fixed beta, non-decreasing in beta at
    fixed rho) as an internal consistency guard.
    """
    if axis not in ("rho", "beta"):
        raise DomainError(f"sweep axis must be 'rho' or 'beta', got {axis!r}")
    values = [float(v) for v in grid]
    if not values:
        raise DomainError("sweep grid must be non-empty")
    direction = _monotone_direction(values) if len(values) > 1 else 1

    def solve_at(v: float) -> EquilibriumSolution:
        return solve_equilibrium(replace(params, **{axis: v}))

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            solutions = tuple(pool.map(solve_at, values))
    else:
        solutions = tuple(solve_at(v) for v in values)

    slack = 1e-12 * max(1.0, max(s.rho0 for s in solutions))
    for a, b in zip(solutions, solutions[1:]):
        if direction * (b.rho0 - a.rho0) < -slack:
            raise CrossCheckError(
                f"condensate density not monotone along the {axis} sweep"
            )
    return solutions

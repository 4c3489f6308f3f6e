"""Macroscopic oscillation dynamics of the relative canonical pair.

The pair (F(n_rel), F(j_rel)) evolves as a closed two-dimensional system
oscillating at the gap frequency 2*gamma.  Exponentiating the generator,
which acts on the coefficient space as [[0, (2*gamma)^2], [-1, 0]], gives

    M(t) = [[ cos(2*gamma*t),            2*gamma*sin(2*gamma*t)],
            [-sin(2*gamma*t)/(2*gamma),  cos(2*gamma*t)       ]]

with det M = 1, so the canonical commutator is conserved.  Time arguments
are reduced modulo the period pi/gamma before the trig evaluation, which
keeps long-time traces accurate and makes M at integer periods exactly the
identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .equilibrium import EquilibriumSolution
from .errors import DegenerateStateError, DomainError
from .fluctuations import (
    relative_commutator_scalar,
    relative_current_variance,
    relative_number_variance,
)
from .model import ModelParams


@dataclass(frozen=True)
class EvolutionMatrix:
    """Evolution in the coefficient basis (F(n_rel), F(j_rel)).

    Row i holds the coefficients of the evolved i-th basis operator.  The
    matrix is symplectic: unit determinant, group law M(t) M(s) = M(t + s),
    period pi/gamma.
    """

    t: float
    entries: np.ndarray

    @property
    def determinant(self) -> float:
        e = self.entries
        return float(e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0])


@dataclass(frozen=True)
class SignalTrace:
    """A sampled observable signal on a strictly increasing time grid."""

    times: tuple[float, ...]
    values: tuple[float, ...]
    label: str

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise DomainError("times and values must have equal length")
        if not all(map(math.isfinite, self.times)):
            raise DomainError("trace times must be finite")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise DomainError("trace times must be strictly increasing")
        if not all(map(math.isfinite, self.values)):
            raise DomainError("trace values must be finite")


def _reduced_phase(gamma: float, t: float) -> float:
    """2*gamma*t reduced modulo 2*pi via the exact period remainder."""
    return 2.0 * gamma * math.remainder(t, math.pi / gamma)


def evolution_matrix(params: ModelParams, t: float) -> EvolutionMatrix:
    """Evolution matrix M(t) of the relative pair."""
    theta = _reduced_phase(params.gamma, t)
    c = math.cos(theta)
    s = math.sin(theta)
    two_g = 2.0 * params.gamma
    entries = np.array([[c, two_g * s], [-s / two_g, c]])
    return EvolutionMatrix(t=float(t), entries=entries)


def _require_condensed(sol: EquilibriumSolution) -> None:
    if not sol.condensed or sol.rho0 == 0.0:
        raise DegenerateStateError("oscillation dynamics needs a condensate")


def autocorrelation_n(params: ModelParams, sol: EquilibriumSolution, t: float) -> float:
    """Symmetrized autocorrelation of F(n_rel): Var(n_rel) * cos(2*gamma*t).

    The cross term drops out because the symmetrized number-current moment
    vanishes (the unsymmetrized one is the purely imaginary i*c_rel/2).
    """
    _require_condensed(sol)
    return relative_number_variance(params, sol) * math.cos(_reduced_phase(params.gamma, t))


def phi_current_trace(
    params: ModelParams, sol: EquilibriumSolution, times: Iterable[float]
) -> SignalTrace:
    """Autocorrelation trace of the phase-sensitive relative current.

    The bare-operator current carries the factor sin(phi), so the trace is
    sin(phi)^2 * Var(j_rel) * cos(2*gamma*t) on the supplied grid.
    """
    _require_condensed(sol)
    grid = tuple(float(t) for t in times)
    amp = math.sin(params.phi) ** 2 * relative_current_variance(params, sol)
    vals = tuple(amp * math.cos(_reduced_phase(params.gamma, t)) for t in grid)
    return SignalTrace(times=grid, values=vals, label="relative_current_phi")


def commutator_conservation(params: ModelParams, sol: EquilibriumSolution, t: float) -> float:
    """Commutator scalar of the evolved pair: c_rel * det M(t) = c_rel."""
    return relative_commutator_scalar(params, sol) * evolution_matrix(params, t).determinant


def superposition_signal(
    weights: Mapping[float, float], times: Iterable[float]
) -> SignalTrace:
    """Weighted cosine superposition sum_g w_g cos(g t) on a time grid.

    The model itself oscillates at the single gap 2*gamma; feeding a spread
    of gap values shows how a distribution dephases (collapse) and, for
    commensurate gaps, rephases (revival).
    """
    if not weights:
        raise DomainError("superposition needs at least one gap weight")
    gaps = []
    for g, w in weights.items():
        g, w = float(g), float(w)
        if not (math.isfinite(g) and math.isfinite(w)) or w < 0.0:
            raise DomainError(f"invalid gap weight ({g!r}: {w!r})")
        gaps.append((g, w))
    gaps.sort()
    grid = tuple(float(t) for t in times)
    vals = tuple(
        math.fsum(w * math.cos(g * t) for g, w in gaps) for t in grid
    )
    return SignalTrace(times=grid, values=vals, label="superposition")

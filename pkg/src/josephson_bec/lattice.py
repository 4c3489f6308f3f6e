"""Finite-volume oracle: every thermodynamic-limit quantity re-evaluated as
a discrete sum over the momentum lattice (2 pi / L) Z^3 of a periodic box.

The k = 0 mode of the gapless branch is replaced by the c-number
sqrt(rho0 * V) in all moment evaluations; treating it as a thermal mode
would diverge in the condensed phase.  Modes are enumerated in a fixed
canonical order (by |k|^2, ties broken lexicographically) and reduced with
error-free compensated summation, so every reported sum is independent of
evaluation order down to the last bit.

Quartic moments follow the quasi-free rule: they decompose into products of
the one- and two-point functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .equilibrium import EquilibriumSolution
from .errors import DegenerateStateError, DomainError, EmptyLatticeError
from .fluctuations import (
    relative_commutator_scalar,
    relative_number_variance,
    total_phase_variance,
)
from .model import ModelParams, as_momentum, occupation

TWO_PI = 2.0 * math.pi

_QUANTITIES = ("density", "c_rel", "var_n_rel", "phase_variance")


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic box of side ``L`` with an energy cutoff on the mode sums.

    Modes with beta*eps_k <= cutoff are summed; the neglected tail is
    bounded by e^(-cutoff) per mode.  ``include_condensate`` only affects
    the density bookkeeping.
    """

    L: float
    cutoff: float = 40.0
    include_condensate: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L > 0.0):
            raise DomainError(f"box side L must be positive and finite, got {self.L!r}")
        if not (math.isfinite(self.cutoff) and self.cutoff > 0.0):
            raise DomainError(f"cutoff must be positive and finite, got {self.cutoff!r}")

    @property
    def volume(self) -> float:
        return self.L ** 3


def compensated_sum(values: Iterable[float]) -> float:
    """Error-free sum of a float sequence (correctly rounded exact result).

    math.fsum tracks exact partial sums, which is stronger than a Kahan
    accumulator: the result is the exact sum rounded once, hence identical
    under any permutation of the inputs.
    """
    return math.fsum(values)


def _max_norm_sq(spec: LatticeSpec, params: ModelParams) -> int:
    # beta*eps <= cutoff  <=>  |n|^2 <= 2 m cutoff (L / 2 pi)^2 / beta
    return int(2.0 * params.mass * spec.cutoff / params.beta * (spec.L / TWO_PI) ** 2)


def _mode_ints(spec: LatticeSpec, params: ModelParams) -> np.ndarray:
    """Integer mode labels inside the cutoff, zero excluded, canonical order."""
    if params.is_ground_state:
        return np.zeros((0, 3), dtype=np.int32)
    n2max = _max_norm_sq(spec, params)
    if n2max < 1:
        raise EmptyLatticeError(
            f"cutoff {spec.cutoff!r} excludes every nonzero mode of the box L={spec.L!r}"
        )
    nmax = math.isqrt(n2max)
    axis = np.arange(-nmax, nmax + 1, dtype=np.int32)
    ny, nz = np.meshgrid(axis, axis, indexing="ij")
    slabs = []
    for nx in axis:  # slab-wise census keeps peak memory modest
        n2 = np.int64(nx) * np.int64(nx) + ny.astype(np.int64) ** 2 + nz.astype(np.int64) ** 2
        mask = (n2 <= n2max) & (n2 > 0)
        cnt = int(mask.sum())
        if cnt == 0:
            continue
        slab = np.empty((cnt, 3), dtype=np.int32)
        slab[:, 0] = nx
        slab[:, 1] = ny[mask]
        slab[:, 2] = nz[mask]
        slabs.append(slab)
    modes = np.concatenate(slabs, axis=0)
    norms = (modes.astype(np.int64) ** 2).sum(axis=1)
    # slab construction is already lexicographic; a stable sort by |n|^2
    # therefore yields the canonical (|n|^2, nx, ny, nz) order
    order = np.argsort(norms, kind="stable")
    return modes[order]


def lattice_modes(spec: LatticeSpec, params: ModelParams) -> np.ndarray:
    """Nonzero lattice momenta inside the cutoff as an (N, 3) float array.

    Rows are ordered by |k|^2 with lexicographic tie-breaking, so the
    enumeration is deterministic.  In the ground state the thermal mode set
    is empty.
    """
    return (TWO_PI / spec.L) * _mode_ints(spec, params).astype(float)


def _branch_energies_arrays(
    spec: LatticeSpec, params: ModelParams, sol: EquilibriumSolution
) -> tuple[np.ndarray, np.ndarray]:
    """(E_minus, E_plus) over the canonical mode list."""
    ints = _mode_ints(spec, params)
    eps = (ints.astype(np.int64) ** 2).sum(axis=1).astype(float)
    eps *= (TWO_PI / spec.L) ** 2 / (2.0 * params.mass)
    gap_minus = sol.delta - params.gamma  # exactly 0 in the condensed phase
    gap_plus = sol.delta + params.gamma
    return eps + gap_minus, eps + gap_plus


def _occ_array(energies: np.ndarray, beta: float) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(beta * energies)


def lattice_density(
    params: ModelParams, sol: EquilibriumSolution, spec: LatticeSpec
) -> float:
    """Finite-volume density: condensate plus (1/V) sum of both occupations."""
    condensate = sol.rho0 if spec.include_condensate else 0.0
    if params.is_ground_state:
        return condensate
    e_minus, e_plus = _branch_energies_arrays(spec, params, sol)
    thermal = (
        compensated_sum(_occ_array(e_minus, params.beta))
        + compensated_sum(_occ_array(e_plus, params.beta))
    ) / spec.volume
    return condensate + thermal


def lattice_c_rel(
    params: ModelParams, sol: EquilibriumSolution, spec: LatticeSpec
) -> float:
    """Finite-volume commutator scalar (rho0 + (1/V) sum (n- - n+)) / gamma."""
    if not sol.condensed:
        raise DegenerateStateError("lattice c_rel is defined in the condensed phase")
    if params.is_ground_state:
        return sol.rho0 / params.gamma
    e_minus, e_plus = _branch_energies_arrays(spec, params, sol)
    diff = compensated_sum(
        _occ_array(e_minus, params.beta) - _occ_array(e_plus, params.beta)
    )
    return (sol.rho0 + diff / spec.volume) / params.gamma


def lattice_rel_number_variance(
    params: ModelParams, sol: EquilibriumSolution, spec: LatticeSpec
) -> float:
    """Finite-volume Wick evaluation of the relative number variance.

    Condensate term rho0 * (2 n+(0) + 1) plus the mode sum of
    n+(1 + n-) + n-(1 + n+).  Each summand is checked against its closed
    per-mode form (n- - n+) coth(beta*gamma), the identity that makes the
    whole sum converge to c_rel * gamma * coth(beta*gamma).
    """
    if not sol.condensed:
        raise DegenerateStateError(
            "lattice relative number variance is defined in the condensed phase"
        )
    coth_bg = 1.0 + 2.0 * occupation(2.0 * params.gamma, params.beta)
    condensate = sol.rho0 * coth_bg
    if params.is_ground_state:
        return condensate
    e_minus, e_plus = _branch_energies_arrays(spec, params, sol)
    n_minus = _occ_array(e_minus, params.beta)
    n_plus = _occ_array(e_plus, params.beta)
    summand = n_plus * (1.0 + n_minus) + n_minus * (1.0 + n_plus)
    per_mode = (n_minus - n_plus) * coth_bg
    if not np.allclose(summand, per_mode, rtol=1e-12, atol=1e-15):
        worst = float(np.max(np.abs(summand - per_mode)))
        raise DomainError(
            f"per-mode virial identity violated by {worst!r}; "
            "occupation evaluation is inconsistent"
        )
    return condensate + compensated_sum(summand) / spec.volume


def _lattice_ints_of(spec: LatticeSpec, k: Sequence[float]) -> np.ndarray:
    """Integer label of a lattice momentum; rejects vectors off the lattice."""
    arr = as_momentum(k)
    scaled = arr * (spec.L / TWO_PI)
    ints = np.rint(scaled)
    if not np.all(np.abs(scaled - ints) <= 1e-9 * max(1.0, float(np.max(np.abs(scaled))))):
        raise DomainError(f"momentum {arr!r} is not on the lattice of box L={spec.L!r}")
    if np.all(ints == 0):
        raise DomainError("k = 0 is the condensate mode, not a fluctuation mode")
    return ints.astype(np.int64)


def lattice_total_phase_variance(
    params: ModelParams,
    sol: EquilibriumSolution,
    spec: LatticeSpec,
    k: Sequence[float],
) -> float:
    """Finite-volume total phase variance (1/2)(2 n-(k) + 1).

    The Wick evaluation involves only the mode k itself, so the value
    carries no volume dependence at all: it reproduces the closed form
    exactly at every L and serves as an exactness fixture for the moment
    machinery.
    """
    ints = _lattice_ints_of(spec, k)
    eps = float(ints @ ints) * (TWO_PI / spec.L) ** 2 / (2.0 * params.mass)
    e_minus = eps + (sol.delta - params.gamma)
    return 0.5 * (2.0 * occupation(e_minus, params.beta) + 1.0)


def lattice_total_number_variance(
    params: ModelParams,
    sol: EquilibriumSolution,
    spec: LatticeSpec,
    k: Sequence[float],
) -> float:
    """Finite-volume Wick sum for the total number variance at lattice mode k.

    Condensate term (rho0/2) coth(beta*eps_k/2) plus (1/2V) times the pair
    sum of n(E_p)(1 + n(E_{p+k})) + n(E_{p+k})(1 + n(E_p)) over both
    branches, with p = 0 and p = -k excluded (their condensate content is
    the explicit first term).
    """
    ints_k = _lattice_ints_of(spec, k)
    scale_sq = (TWO_PI / spec.L) ** 2 / (2.0 * params.mass)
    eps_k = float(ints_k @ ints_k) * scale_sq
    condensate = sol.rho0 * (0.5 + occupation(eps_k, params.beta))
    if params.is_ground_state:
        return condensate
    modes = _mode_ints(spec, params).astype(np.int64)
    keep = ~np.all(modes == -ints_k[None, :], axis=1)
    modes = modes[keep]
    eps_p = (modes ** 2).sum(axis=1).astype(float) * scale_sq
    shifted = modes + ints_k[None, :]
    eps_q = (shifted ** 2).sum(axis=1).astype(float) * scale_sq
    total = 0.0
    for gap in (sol.delta - params.gamma, sol.delta + params.gamma):
        n_p = _occ_array(eps_p + gap, params.beta)
        n_q = _occ_array(eps_q + gap, params.beta)
        total += compensated_sum(n_p * (1.0 + n_q) + n_q * (1.0 + n_p))
    return condensate + total / (2.0 * spec.volume)


@dataclass(frozen=True)
class ConvergenceRow:
    L: float
    oracle: float
    closed_form: float
    abs_err: float


@dataclass(frozen=True)
class ConvergenceReport:
    """Lattice-vs-closed-form errors over a growing sequence of box sides.

    The verdict requires the error to decrease strictly from row to row
    (rows already at the exactness floor are exempt) and the final relative
    error to be below the threshold.
    """

    quantity: str
    rows: tuple[ConvergenceRow, ...]
    verdict: bool

    def __post_init__(self):
        if any(b.L <= a.L for a, b in zip(self.rows, self.rows[1:])):
            raise DomainError("report rows must be ordered by increasing L")


def convergence_report(
    quantity: str,
    params: ModelParams,
    sol: EquilibriumSolution,
    box_sides: Sequence[float],
    cutoff: float = 40.0,
    threshold: float = 1e-2,
) -> ConvergenceReport:
    """Run one lattice quantity over increasing box sides against its closed form.

    ``phase_variance`` is evaluated at the smallest nonzero mode of each
    box and is exact at every L; the other quantities converge like 1/L.
    """
    if quantity not in _QUANTITIES:
        raise DomainError(f"unknown quantity {quantity!r}; expected one of {_QUANTITIES}")
    sides = [float(x) for x in box_sides]
    if len(sides) < 3:
        raise DomainError("convergence study needs at least 3 box sides")
    if any(b <= a for a, b in zip(sides, sides[1:])):
        raise DomainError("box sides must be strictly increasing")

    rows = []
    for L in sides:
        spec = LatticeSpec(L=L, cutoff=cutoff)
        if quantity == "density":
            oracle = lattice_density(params, sol, spec)
            closed = params.rho
        elif quantity == "c_rel":
            oracle = lattice_c_rel(params, sol, spec)
            closed = relative_commutator_scalar(params, sol)
        elif quantity == "var_n_rel":
            oracle = lattice_rel_number_variance(params, sol, spec)
            closed = relative_number_variance(params, sol)
        else:
            k = (TWO_PI / L, 0.0, 0.0)
            oracle = lattice_total_phase_variance(params, sol, spec, k)
            closed = total_phase_variance(params, k)
        rows.append(ConvergenceRow(L=L, oracle=oracle, closed_form=closed,
                                   abs_err=abs(oracle - closed)))

    floors = [1e-13 * max(1.0, abs(r.closed_form)) for r in rows]
    decreasing = all(
        b.abs_err < a.abs_err or b.abs_err <= fb
        for a, b, fb in zip(rows, rows[1:], floors[1:])
    )
    final_rel = rows[-1].abs_err / max(abs(rows[-1].closed_form), 1e-300)
    return ConvergenceReport(
        quantity=quantity,
        rows=tuple(rows),
        verdict=decreasing and final_rel < threshold,
    )

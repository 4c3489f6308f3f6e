"""Model parameters, dispersion and the two-branch quasiparticle spectrum.

Two Bose gases with equal densities rho/2 are coupled by a tunnelling term
of strength gamma > 0 and share one mean-field constant lam.  After the
mean-field replacement the Hamiltonian is quadratic and diagonal in the
rotated operators b_{+-}, whose single-particle energies form two branches
separated by a momentum-independent gap 2*gamma.

Conventions: hbar = k_B = 1, three space dimensions, momenta are plain
3-vectors.  The inverse temperature ``beta`` may be ``math.inf``; that value
selects the ground state and every thermal occupation vanishes there.

All types are immutable and all functions are pure, so everything here is
safe to use concurrently without synchronisation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi

# 1/(e^x - 1) underflows past this point; avoids OverflowError in expm1.
_EXP_SWITCH = 700.0


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the coupled pair of Bose gases.

    mass   particle mass, > 0
    lam    mean-field repulsion strength (energy * volume), > 0
    gamma  tunnelling coupling (energy), strictly > 0: the quasiparticle gap
           is 2*gamma and the relative-pair theory degenerates at gamma = 0,
           so that value is rejected at construction instead of letting NaNs
           propagate downstream
    phi    phase difference between the two condensates, stored in [0, 2*pi)
    rho    total particle density, > 0
    beta   inverse temperature, > 0; ``math.inf`` selects the ground state
    """

    mass: float
    lam: float
    gamma: float
    phi: float
    rho: float
    beta: float

    def __post_init__(self):
        _positive("mass", self.mass)
        _positive("lam", self.lam)
        if self.gamma == 0:
            raise DomainError(
                "gamma must be > 0: the quasiparticle gap 2*gamma closes at "
                "gamma = 0 and the relative-pair quantities are undefined"
            )
        _positive("gamma", self.gamma)
        _positive("rho", self.rho)
        beta = float(self.beta)
        if math.isnan(beta) or beta <= 0.0:
            raise DomainError(f"beta must be > 0 or math.inf, got {beta!r}")
        phi = float(self.phi)
        if not math.isfinite(phi):
            raise DomainError(f"phi must be finite, got {phi!r}")
        object.__setattr__(self, "phi", phi % TWO_PI)
        object.__setattr__(self, "beta", beta)

    @property
    def is_ground_state(self) -> bool:
        return math.isinf(self.beta)


def as_momentum(k: Sequence[float]) -> np.ndarray:
    """Validate and return a momentum as a float 3-vector."""
    arr = np.asarray(k, dtype=float)
    if arr.shape != (3,):
        raise DomainError(f"momentum must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("momentum components must be finite")
    return arr


def dispersion(params: ModelParams, k: Sequence[float]) -> float:
    """Single-particle kinetic energy |k|^2 / (2 m)."""
    arr = as_momentum(k)
    return float(arr @ arr) / (2.0 * params.mass)


def branch_energies(params: ModelParams, mu: float, k: Sequence[float]) -> tuple[float, float]:
    """Quasiparticle energies (E_minus, E_plus) of the two branches.

    With f_k = eps_k - mu + lam*rho the branches are f_k -+ gamma.  The
    energies are assembled as eps_k + (delta -+ gamma) with delta =
    lam*rho - mu, so that in the condensed regime (delta = gamma exactly)
    the minus branch reduces to the bare dispersion without cancellation
    error.
    """
    eps = dispersion(params, k)
    delta = params.lam * params.rho - mu
    return eps + (delta - params.gamma), eps + (delta + params.gamma)


def occupation(energy: float, beta: float) -> float:
    """Thermal occupation 1 / (e^(beta*energy) - 1) of a quasiparticle mode.

    For ``beta = math.inf`` (ground state) the occupation of any mode with
    energy >= 0 is exactly 0.  A non-positive energy with finite beta is a
    domain error: the gapless k = 0 mode is the condensate and must not be
    treated as a thermal mode.
    """
    if beta <= 0 or math.isnan(beta):
        raise DomainError(f"beta must be > 0, got {beta!r}")
    if math.isinf(beta):
        if energy < 0.0:
            raise DomainError(f"ground-state occupation needs energy >= 0, got {energy!r}")
        return 0.0
    if energy <= 0.0:
        raise DomainError(
            f"occupation needs energy > 0 at finite beta, got {energy!r}; "
            "the gapless mode is accounted for as the condensate"
        )
    x = beta * energy
    if x > _EXP_SWITCH:
        e = math.exp(-x)
        return e / (1.0 - e)
    # expm1 keeps 1/(e^x - 1) accurate down to x ~ 1e-300
    return 1.0 / math.expm1(x)


def quasiparticle_map(params: ModelParams) -> np.ndarray:
    """Unitary 2x2 map from the bare gases (columns 1, 2) to the branches.

    Row 0 is the '+' branch and row 1 the '-' branch:
        b_+ <- (a_1 e^{-i phi/2} - a_2 e^{+i phi/2}) / sqrt(2)
        b_- <- (a_1 e^{-i phi/2} + a_2 e^{+i phi/2}) / sqrt(2)
    """
    ph = cmath.exp(-0.5j * params.phi)
    w = 1.0 / math.sqrt(2.0)
    return np.array(
        [[ph * w, -ph.conjugate() * w],
         [ph * w, +ph.conjugate() * w]],
        dtype=complex,
    )


@dataclass(frozen=True)
class BranchPoint:
    """Spectrum and occupations of both branches at one momentum."""

    k: tuple[float, float, float]
    f_k: float
    e_minus: float
    e_plus: float
    n_minus: float
    n_plus: float


def branch_point(params: ModelParams, mu: float, k: Sequence[float]) -> BranchPoint:
    """Evaluate both branch energies and their thermal occupations at ``k``."""
    arr = as_momentum(k)
    e_minus, e_plus = branch_energies(params, mu, arr)
    f_k = 0.5 * (e_minus + e_plus)
    return BranchPoint(
        k=(float(arr[0]), float(arr[1]), float(arr[2])),
        f_k=f_k,
        e_minus=e_minus,
        e_plus=e_plus,
        n_minus=occupation(e_minus, params.beta),
        n_plus=occupation(e_plus, params.beta),
    )

"""Bose-function numerics: polylogarithm series, the thermal density
integral, adaptive quadrature and bracketed root finding.

The polylogarithm g_s(z) = sum_{l>=1} z^l / l^s is summed directly with a
geometric bound on the truncated tail.  Close to z = 1 the direct series
slows down; past a fixed number of explicit terms the remainder is replaced
by an Euler-Maclaurin correction whose integral part is evaluated by
adaptive quadrature, which keeps the stated 1e-14 relative accuracy all the
way to z = 1.

The thermal density rho(alpha) is evaluated along two independent routes, a
closed form in terms of g_{3/2} and a radial quadrature of the momentum
integral, and the two are cross-checked on every call.  Every downstream
equilibrium and fluctuation quantity rests on this function, which is why
the redundancy is not optional.

Everything here is a pure function; integrands handed to
:func:`adaptive_quad` must themselves be pure for the results to be
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import integrate, optimize

from .errors import ConvergenceError, CrossCheckError, DivergenceError, DomainError
from .model import ModelParams

# method tags for DensityValue
SERIES = "series"
QUADRATURE = "quadrature"

# relative agreement demanded between the two density routes
RHO_CROSS_CHECK_RTOL = 1e-8

# beta*eps beyond this contributes below 1e-323 to any Bose integral
_BETA_EPS_MAX = 745.0

_SERIES_BLOCK = 512
_SERIES_RTOL = 1e-15
_TAIL_SWITCH = 4096          # direct terms before switching to the tail formula
_Z1_TERMS = 10_000           # explicit terms at z = 1 before the tail correction


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for adaptive quadrature."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class DensityValue:
    """Thermal density rho(alpha) together with the route that produced it."""

    alpha: float
    value: float
    method: str


def adaptive_quad(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec | None = None,
    points: Tuple[float, ...] | None = None,
) -> tuple[float, float]:
    """Integrate ``f`` over (a, b) adaptively and return (value, error estimate).

    ``b`` may be ``math.inf``; semi-infinite ranges are handled by the
    usual monotone change of variable inside QUADPACK.  ``points`` marks
    interior locations of known awkward behaviour (integrable singularities,
    kinks) so the subdivision starts there.

    Raises
    ------
    ConvergenceError
        If the subdivision budget is exhausted or roundoff stalls the
        refinement; the exception carries the best estimate found.
    """
    spec = spec or DEFAULT_QUADRATURE
    kwargs = dict(
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    if points is not None and not math.isinf(b):
        kwargs["points"] = list(points)
    result = integrate.quad(f, a, b, **kwargs)
    value, abserr = result[0], result[1]
    if len(result) > 3:  # quadpack appended a warning message
        raise ConvergenceError(
            f"quadrature failed on ({a}, {b}): {result[3]}",
            best_estimate=value,
            error_estimate=abserr,
        )
    return value, abserr


def _em_tail(s: float, a: float, n0: int) -> float:
    """Euler-Maclaurin value of sum_{l >= n0} e^(-a*l) * l^(-s), a >= 0.

    Uses the integral plus the f/2, -f'/12 and f'''/720 corrections; with
    n0 in the thousands the first neglected term is far below 1e-16 of the
    result for every a reachable from the series switch-over.
    """
    x = float(n0)
    f = math.exp(-a * x) * x ** (-s)
    g1 = -(a + s / x)            # (log f)'
    g2 = s / (x * x)
    g3 = -2.0 * s / (x * x * x)
    fp = f * g1
    fppp = f * (g3 + 3.0 * g1 * g2 + g1 ** 3)
    if a == 0.0:
        integral = x ** (1.0 - s) / (s - 1.0)
    else:
        integral = _tail_integral(s, a, x)
    return integral + 0.5 * f - fp / 12.0 + fppp / 720.0


def _tail_integral(s: float, a: float, x0: float) -> float:
    """integral_{x0}^inf e^(-a*x) x^(-s) dx for a > 0."""

    c = a * x0
    if s == 1.5:
        # closed form via the complementary error function
        return 2.0 * math.exp(-c) / math.sqrt(x0) - 2.0 * math.sqrt(math.pi * a) * math.erfc(
            math.sqrt(c)
        )

    p = 2.0 * s - 3.0

    def g(u: float) -> float:
        if u <= 0.0:
            return 0.0
        t = p * math.log(u) - c / (u * u)
        return math.exp(t) if t > -745.0 else 0.0

    # for c << 1 the substituted integrand turns on in a layer at u ~ sqrt(c);
    # hand the integrator breakpoints across it
    points = []
    if c < 1.0:
        u = math.sqrt(max(c, 1e-280))
        while u < 1.0:
            points.append(u)
            u *= 4.0
    val, _ = adaptive_quad(g, 0.0, 1.0, points=tuple(points) if points else None)
    return 2.0 * x0 ** (1.0 - s) * val


def polylog_bose(s: float, z: float) -> float:
    """Bose function g_s(z) = sum_{l >= 1} z^l / l^s for 0 <= z <= 1, s >= 1.

    Parameters
    ----------
    s : order of the polylogarithm; s >= 1.  At z = 1 the sum only exists
        for s > 1.
    z : fugacity-like argument in [0, 1].

    Returns
    -------
    The converged sum, with truncation remainder below 1e-14 of the result.

    Raises
    ------
    DomainError    if z is outside [0, 1] or s < 1.
    DivergenceError  if z = 1 with s <= 1.
    """
    s = float(s)
    z = float(z)
    if math.isnan(s) or s < 1.0:
        raise DomainError(f"polylog order must satisfy s >= 1, got {s!r}")
    if math.isnan(z) or z < 0.0 or z > 1.0:
        raise DomainError(f"polylog argument must lie in [0, 1], got {z!r}")
    if z == 0.0:
        return 0.0
    if z == 1.0:
        if s <= 1.0:
            raise DivergenceError(f"g_s(1) diverges for s <= 1 (s = {s!r})")
        l = np.arange(1, _Z1_TERMS + 1, dtype=float)
        return math.fsum(l ** (-s)) + _em_tail(s, 0.0, _Z1_TERMS + 1)

    a = -math.log(z)
    blocks: list[np.ndarray] = []
    lo = 1
    while lo <= _TAIL_SWITCH:
        hi = min(lo + _SERIES_BLOCK - 1, _TAIL_SWITCH)
        l = np.arange(lo, hi + 1, dtype=float)
        blocks.append(np.exp(-a * l) / l ** s)
        partial = math.fsum(np.concatenate(blocks))
        last = float(blocks[-1][-1])
        # geometric tail bound: sum_{j > l} z^j/j^s <= last * z/(1-z)
        if last * z <= _SERIES_RTOL * partial * (1.0 - z):
            return partial
        lo = hi + 1
    # z too close to 1 for a practical geometric stop; Euler-Maclaurin tail
    return partial + _em_tail(s, a, _TAIL_SWITCH + 1)


def thermal_wavelength(params: ModelParams) -> float:
    """Thermal de Broglie wavelength (2 pi beta / m)^(1/2); inf at beta = inf."""
    if params.is_ground_state:
        return math.inf
    return math.sqrt(2.0 * math.pi * params.beta / params.mass)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if math.isnan(alpha) or alpha < 0.0:
        raise DomainError(f"energy shift alpha must be >= 0, got {alpha!r}")
    return alpha


def rho_series(params: ModelParams, alpha: float) -> float:
    """Closed form of the thermal density: g_{3/2}(e^(-beta*alpha)) / lambda_T^3."""
    alpha = _check_alpha(alpha)
    if params.is_ground_state:
        return 0.0
    lam_t = thermal_wavelength(params)
    return polylog_bose(1.5, math.exp(-params.beta * alpha)) / lam_t ** 3


def rho_quadrature(params: ModelParams, alpha: float) -> float:
    """Radial quadrature of the thermal density integral.

    The angular integration over dk/(2 pi)^3 is done analytically, the
    radial variable is substituted as x = beta * eps and the integration is
    truncated at x = 745 where the integrand underflows.
    """
    alpha = _check_alpha(alpha)
    if params.is_ground_state:
        return 0.0
    c = params.beta * alpha

    def integrand(x: float) -> float:
        y = x + c
        if y > 35.0:
            e = math.exp(-y)
            return math.sqrt(x) * e / (1.0 - e)
        if y <= 0.0:
            return 0.0
        return math.sqrt(x) / math.expm1(y)

    # a small shift c leaves a sqrt(c)-sized deficit concentrated at x ~ c;
    # without breakpoints there the integrator never samples that layer
    points = []
    if 0.0 < c < 1.0:
        x = max(c, 1e-280)
        while x < 1.0:
            points.append(x)
            x *= 8.0

    spec = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-300)
    val, _ = adaptive_quad(
        integrand, 0.0, _BETA_EPS_MAX, spec, points=tuple(points) if points else None
    )
    pref = (2.0 * params.mass / params.beta) ** 1.5 / (4.0 * math.pi ** 2)
    return pref * val


def rho_alpha(params: ModelParams, alpha: float) -> DensityValue:
    """Thermal density rho(alpha), computed two ways and cross-checked.

    The closed form provides the returned value, the quadrature route is
    the consistency check; disagreement beyond 1e-8 relative signals a
    numerical misconfiguration and raises :class:`CrossCheckError`.
    """
    alpha = _check_alpha(alpha)
    series_val = rho_series(params, alpha)
    if params.is_ground_state:
        return DensityValue(alpha=alpha, value=0.0, method=SERIES)
    if series_val > 1e-250:  # below that both routes sit in underflow noise
        quad_val = rho_quadrature(params, alpha)
        scale = max(abs(series_val), abs(quad_val))
        if abs(series_val - quad_val) > RHO_CROSS_CHECK_RTOL * scale:
            raise CrossCheckError(
                "thermal density route disagreement at "
                f"alpha={alpha!r}: series={series_val!r} quadrature={quad_val!r}"
            )
    return DensityValue(alpha=alpha, value=series_val, method=SERIES)


def find_root(
    f: Callable[[float], float],
    bracket: tuple[float, float],
    tol: float = 1e-12,
) -> float:
    """Root of a monotone ``f`` inside ``bracket`` = (lo, hi).

    Brent's method: inverse-quadratic/secant steps with a guaranteed
    bisection fallback, so the result is deterministic and stays inside the
    bracket.  Requires f(lo) and f(hi) of opposite sign (or zero).
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError(f"invalid bracket {bracket!r}")
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise DomainError(
            f"bracket {bracket!r} does not straddle a root: f(lo)={flo!r}, f(hi)={fhi!r}"
        )
    root, info = optimize.brentq(
        f, lo, hi, xtol=tol, rtol=4.0 * np.finfo(float).eps, maxiter=200,
        full_output=True,
    )
    if not info.converged:
        raise ConvergenceError(
            f"root bracketing failed to converge on {bracket!r}",
            best_estimate=root,
        )
    return float(root)

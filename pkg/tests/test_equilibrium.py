import cmath
import math
from dataclasses import replace

import numpy as np
import pytest

import oracles
from josephson_bec import (
    DomainError,
    ModelParams,
    critical_density,
    order_parameters,
    phase_diagram_sweep,
    rho_alpha,
    solve_equilibrium,
)


def make_params(**kw):
    base = dict(mass=1.0, lam=1.0, gamma=0.25, phi=0.0, rho=0.5, beta=1.0)
    base.update(kw)
    return ModelParams(**base)


def random_params(rng, condensed):
    mass = rng.uniform(0.5, 2.0)
    gamma = rng.uniform(0.05, 1.0)
    lam = rng.uniform(0.5, 2.0)
    beta = rng.uniform(0.5, 2.5)
    probe = make_params(mass=mass, gamma=gamma, lam=lam, beta=beta, rho=1.0)
    rho_c = critical_density(probe)
    factor = rng.uniform(1.05, 5.0) if condensed else rng.uniform(0.05, 0.95)
    return make_params(mass=mass, gamma=gamma, lam=lam, beta=beta, rho=factor * rho_c)


class TestCriticalDensity:
    def test_reference_value(self):
        # frozen: rho(0) + rho(0.5) = 0.21733019502123385 (series oracle)
        p = make_params()
        expected = oracles.rho_density(1, 1, 0.0) + oracles.rho_density(1, 1, 0.5)
        assert critical_density(p) == pytest.approx(0.21733, abs=1e-4)
        assert critical_density(p) == pytest.approx(expected, rel=1e-10)

    def test_ground_state(self):
        assert critical_density(make_params(beta=math.inf)) == 0.0

    def test_large_gap_limit(self):
        p = make_params(gamma=50.0)
        assert critical_density(p) - rho_alpha(p, 0.0).value < 1e-8


class TestSolveEquilibrium:
    def test_condensed_reference(self):
        # frozen: rho0 = 0.2826698049787661 (series oracle)
        sol = solve_equilibrium(make_params())
        assert sol.condensed
        assert sol.mu == pytest.approx(0.25, abs=1e-15)
        assert sol.delta == 0.25
        assert sol.rho0 == pytest.approx(0.28267, abs=1e-4)
        closure = sol.rho0 + sol.rho_th_minus + sol.rho_th_plus
        assert closure == pytest.approx(0.5, rel=1e-14)

    def test_normal_reference(self):
        p = make_params(rho=0.1)
        sol = solve_equilibrium(p)
        assert not sol.condensed
        assert sol.rho0 == 0.0
        assert sol.delta > p.gamma
        residual = (
            rho_alpha(p, sol.delta - p.gamma).value
            + rho_alpha(p, sol.delta + p.gamma).value
            - p.rho
        )
        assert abs(residual) < 1e-10 * p.rho
        assert sol.mu == pytest.approx(p.lam * p.rho - sol.delta)

    def test_ground_state_all_condensed(self):
        p = make_params(beta=math.inf, rho=0.37)
        sol = solve_equilibrium(p)
        assert sol.condensed
        assert sol.rho0 == p.rho
        assert sol.rho_th_minus == 0.0 and sol.rho_th_plus == 0.0

    def test_exact_threshold_is_condensed(self):
        p = make_params()
        rho_c = critical_density(p)
        sol = solve_equilibrium(replace(p, rho=rho_c))
        assert sol.condensed
        assert sol.rho0 <= 1e-15

    def test_random_condensed_closure(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            p = random_params(rng, condensed=True)
            sol = solve_equilibrium(p)
            assert sol.condensed
            closure = sol.rho0 + sol.rho_th_minus + sol.rho_th_plus
            assert abs(closure - p.rho) < 1e-10 * p.rho

    def test_random_normal_residual(self):
        rng = np.random.default_rng(43)
        for _ in range(25):
            p = random_params(rng, condensed=False)
            sol = solve_equilibrium(p)
            assert not sol.condensed
            residual = sol.rho_th_minus + sol.rho_th_plus - p.rho
            assert abs(residual) < 1e-10 * p.rho

    def test_transition_continuity(self):
        p = make_params()
        rho_c = critical_density(p)
        gaps = []
        for eps in (1e-2, 1e-4, 1e-6):
            sol = solve_equilibrium(replace(p, rho=rho_c * (1.0 - eps)))
            assert not sol.condensed
            gaps.append(sol.delta - p.gamma)
        assert gaps[0] > gaps[1] > gaps[2] > 0.0

    def test_lambda_independence(self):
        p1 = make_params(lam=1.0)
        p2 = make_params(lam=2.0)
        s1, s2 = solve_equilibrium(p1), solve_equilibrium(p2)
        assert abs(s1.rho0 - s2.rho0) < 1e-12
        assert s2.mu - s1.mu == pytest.approx(p1.rho, abs=1e-12)


class TestOrderParameters:
    def test_reference_amplitudes(self):
        # frozen: sqrt(rho0/2) = 0.3759453450827435
        p = make_params()
        sol = solve_equilibrium(p)
        op = order_parameters(sol, p)
        assert abs(op.a1) == pytest.approx(0.37594, abs=1e-4)
        assert abs(op.a2) == pytest.approx(abs(op.a1), rel=1e-15)
        assert op.b_minus == pytest.approx(math.sqrt(sol.rho0))
        assert op.b_minus.imag == 0.0

    def test_phase_difference(self):
        rng = np.random.default_rng(5)
        for phi in rng.uniform(0, 2 * math.pi, size=20):
            p = make_params(phi=float(phi))
            op = order_parameters(solve_equilibrium(p), p)
            diff = (cmath.phase(op.a1) - cmath.phase(op.a2)) % (2 * math.pi)
            assert min(abs(diff - p.phi), abs(diff - p.phi + 2 * math.pi)) < 1e-12

    def test_normal_phase_zero(self):
        p = make_params(rho=0.05, phi=1.3)
        op = order_parameters(solve_equilibrium(p), p)
        assert op.b_minus == 0 and op.a1 == 0 and op.a2 == 0


class TestPhaseDiagramSweep:
    def test_single_transition(self):
        p = make_params()
        rho_c = critical_density(p)
        grid = np.linspace(0.2 * rho_c, 3.0 * rho_c, 30)
        sols = phase_diagram_sweep(p, "rho", grid)
        flags = [s.condensed for s in sols]
        flips = sum(a != b for a, b in zip(flags, flags[1:]))
        assert flips == 1
        assert not flags[0] and flags[-1]

    def test_near_threshold_rows(self):
        p = make_params()
        rho_c = critical_density(p)
        below, above = phase_diagram_sweep(
            p, "rho", [rho_c * (1 - 1e-6), rho_c, rho_c * (1 + 1e-6)]
        )[::2]
        assert below.delta - p.gamma < 1e-3
        assert above.rho0 < 1e-5

    def test_beta_axis_monotone(self):
        p = make_params(rho=0.4)
        sols = phase_diagram_sweep(p, "beta", np.linspace(0.5, 4.0, 12))
        rho0 = [s.rho0 for s in sols]
        assert all(b >= a - 1e-12 for a, b in zip(rho0, rho0[1:]))

    def test_workers_do_not_change_results(self):
        p = make_params()
        grid = np.linspace(0.05, 0.6, 9)
        a = phase_diagram_sweep(p, "rho", grid, max_workers=1)
        b = phase_diagram_sweep(p, "rho", grid, max_workers=4)
        assert a == b

    def test_grid_validation(self):
        p = make_params()
        with pytest.raises(DomainError):
            phase_diagram_sweep(p, "rho", [])
        with pytest.raises(DomainError):
            phase_diagram_sweep(p, "rho", [0.1, 0.3, 0.2])
        with pytest.raises(DomainError):
            phase_diagram_sweep(p, "mass", [0.1, 0.2])

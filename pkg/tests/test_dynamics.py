import math

import numpy as np
import pytest

from josephson_bec import (
    DegenerateStateError,
    DomainError,
    ModelParams,
    SignalTrace,
    autocorrelation_n,
    commutator_conservation,
    evolution_matrix,
    phi_current_trace,
    relative_commutator_scalar,
    relative_current_variance,
    relative_number_variance,
    solve_equilibrium,
    superposition_signal,
)


def make_params(**kw):
    base = dict(mass=1.0, lam=1.0, gamma=0.25, phi=0.0, rho=0.5, beta=1.0)
    base.update(kw)
    return ModelParams(**base)


@pytest.fixture(scope="module")
def reference():
    p = make_params()
    return p, solve_equilibrium(p)


class TestEvolutionMatrix:
    def test_identity_at_zero(self):
        m = evolution_matrix(make_params(), 0.0)
        assert np.array_equal(m.entries, np.eye(2))

    def test_quarter_period(self):
        p = make_params()
        t = math.pi / (4 * p.gamma)
        m = evolution_matrix(p, t).entries
        expected = np.array([[0.0, 2 * p.gamma], [-1 / (2 * p.gamma), 0.0]])
        assert np.max(np.abs(m - expected)) < 1e-12
        # doubling the quarter step reproduces the half-period matrix
        m2 = evolution_matrix(p, 2 * t).entries
        assert np.max(np.abs(m @ m - m2)) < 1e-12

    def test_full_period_identity(self):
        p = make_params(gamma=0.37)
        m = evolution_matrix(p, math.pi / p.gamma).entries
        assert np.max(np.abs(m - np.eye(2))) < 1e-12

    def test_group_law_and_determinant(self):
        rng = np.random.default_rng(29)
        for _ in range(500):
            p = make_params(gamma=rng.uniform(0.05, 2.0))
            t, s = rng.uniform(-40.0, 40.0, size=2)
            mt = evolution_matrix(p, t)
            ms = evolution_matrix(p, s)
            mts = evolution_matrix(p, t + s)
            assert abs(mt.determinant - 1.0) < 1e-12
            assert np.max(np.abs(mt.entries @ ms.entries - mts.entries)) < 1e-12

    def test_generator_limit(self):
        p = make_params()
        expected = np.array([[0.0, (2 * p.gamma) ** 2], [-1.0, 0.0]])
        # central difference kills the O(h) diagonal term of the one-sided
        # quotient, which at this step size sits at ~2.5e-5
        h = 1e-4 / (2 * p.gamma)
        central = (evolution_matrix(p, h).entries - evolution_matrix(p, -h).entries) / (2 * h)
        assert np.max(np.abs(central - expected)) < 1e-6
        # the one-sided quotient converges too, at first order
        for h, bound in ((1e-2, 3e-3), (1e-4, 3e-5), (1e-6, 3e-7)):
            one_sided = (evolution_matrix(p, h).entries - np.eye(2)) / h
            assert np.max(np.abs(one_sided - expected)) < bound


class TestAutocorrelation:
    def test_value_at_zero(self, reference):
        p, sol = reference
        assert autocorrelation_n(p, sol, 0.0) == relative_number_variance(p, sol)

    def test_half_period_sign_flip(self, reference):
        p, sol = reference
        t = math.pi / (2 * p.gamma)
        var_n = relative_number_variance(p, sol)
        assert autocorrelation_n(p, sol, t) == pytest.approx(-var_n, rel=1e-12)

    def test_reference_point(self, reference):
        # frozen: 1.6212648913174992 * cos(0.5) = 1.4229247...
        p, sol = reference
        assert autocorrelation_n(p, sol, 1.0) == pytest.approx(1.4229, abs=1e-3)

    def test_zeros_follow_cosine(self, reference):
        p, sol = reference
        times = np.linspace(0.0, 2 * math.pi / p.gamma, 512)
        vals = [autocorrelation_n(p, sol, float(t)) for t in times]
        cosine = [math.cos(2 * p.gamma * t) for t in times]
        var_n = relative_number_variance(p, sol)
        assert np.max(np.abs(np.array(vals) - var_n * np.array(cosine))) < 1e-10

    def test_degenerate_rejected(self):
        p = make_params(rho=0.05)
        with pytest.raises(DegenerateStateError):
            autocorrelation_n(p, solve_equilibrium(p), 0.1)


class TestCommutatorConservation:
    def test_at_zero(self, reference):
        p, sol = reference
        assert commutator_conservation(p, sol, 0.0) == relative_commutator_scalar(p, sol)

    def test_arbitrary_time(self, reference):
        p, sol = reference
        c = relative_commutator_scalar(p, sol)
        assert abs(commutator_conservation(p, sol, 0.7313) - c) < 1e-12 * c

    def test_long_time_argument_reduction(self, reference):
        p, sol = reference
        c = relative_commutator_scalar(p, sol)
        t = 1e6 * math.pi / p.gamma + 0.1
        assert abs(commutator_conservation(p, sol, t) - c) < 1e-9 * max(1.0, c)

    def test_energy_like_conservation(self, reference):
        # variance of the evolved number component is time invariant
        p, sol = reference
        var_n = relative_number_variance(p, sol)
        var_j = relative_current_variance(p, sol)
        for t in (0.0, 0.3, 1.7, 5.0):
            m = evolution_matrix(p, t).entries
            evolved = var_n * m[0, 0] ** 2 + var_j * m[0, 1] ** 2
            assert evolved == pytest.approx(var_n, rel=1e-12)


class TestPhiCurrentTrace:
    def test_zero_phase_silent(self, reference):
        p, sol = reference
        trace = phi_current_trace(p, sol, np.linspace(0, 10, 64))
        assert all(v == 0.0 for v in trace.values)

    def test_quarter_phase_amplitude(self):
        p = make_params(phi=math.pi / 2)
        sol = solve_equilibrium(p)
        trace = phi_current_trace(p, sol, np.linspace(0, 10, 64))
        var_j = relative_current_variance(p, sol)
        expected = [var_j * math.cos(2 * p.gamma * t) for t in trace.times]
        assert np.max(np.abs(np.array(trace.values) - expected)) < 1e-10

    def test_sine_squared_law(self):
        times = np.linspace(0.0, 12.0, 97)
        base_p = make_params(phi=math.pi / 2)
        base = phi_current_trace(base_p, solve_equilibrium(base_p), times)
        for phi in (0.0, math.pi / 6, math.pi / 4, 1.0, 2.0):
            p = make_params(phi=phi)
            trace = phi_current_trace(p, solve_equilibrium(p), times)
            s2 = math.sin(phi) ** 2
            for b, v in zip(base.values, trace.values):
                if abs(b) > 1e-12:
                    assert abs(v / b - s2) < 1e-12

    def test_degenerate_rejected(self):
        p = make_params(rho=0.05, phi=1.0)
        with pytest.raises(DegenerateStateError):
            phi_current_trace(p, solve_equilibrium(p), [0.0, 1.0])


class TestSuperpositionSignal:
    def test_single_gap_pure_cosine(self):
        times = np.linspace(0.0, 30.0, 200)
        trace = superposition_signal({0.5: 1.0}, times)
        expected = [math.cos(0.5 * t) for t in times]
        assert np.max(np.abs(np.array(trace.values) - expected)) < 1e-12

    def test_two_gap_beat_collapse(self):
        # 0.5 cos t + 0.5 cos 1.1 t = cos(0.05 t) cos(1.05 t): the envelope
        # first vanishes at t = pi/0.1
        t_node = math.pi / 0.1
        trace = superposition_signal({1.0: 0.5, 1.1: 0.5}, [t_node - 1e-9, t_node])
        assert abs(trace.values[1]) < 1e-10

    def test_equally_spaced_revival(self):
        g0, dg, n = 1.0, 0.05, 7
        weights = {g0 + i * dg: 1.0 / n for i in range(n)}
        t_rev = 2 * math.pi / dg
        trace = superposition_signal(weights, [t_rev])
        total = sum(weights.values())
        assert abs(abs(trace.values[0]) - total * abs(math.cos(g0 * t_rev))) < 1e-10

    def test_validation(self):
        with pytest.raises(DomainError):
            superposition_signal({}, [0.0, 1.0])
        with pytest.raises(DomainError):
            superposition_signal({1.0: -0.5}, [0.0, 1.0])


class TestSignalTrace:
    def test_grid_validation(self):
        with pytest.raises(DomainError):
            SignalTrace(times=(0.0, 0.0), values=(1.0, 1.0), label="x")
        with pytest.raises(DomainError):
            SignalTrace(times=(0.0,), values=(1.0, 2.0), label="x")
        with pytest.raises(DomainError):
            SignalTrace(times=(0.0, 1.0), values=(1.0, math.inf), label="x")

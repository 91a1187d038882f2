"""Profile solver checks against closed-form solutions."""

import math
import time

import numpy as np
import pytest

from tracegrowth.comparison import (
    constant_alpha,
    constant_curvature,
    flat_curvature,
    hyperbolic_curvature,
    inverse_shifted_alpha,
    solve_profile,
    spherical_curvature,
    tabulated_curvature,
    trace_ratio_alpha,
    zero_alpha,
)
from tracegrowth.errors import ProfileDomain


class TestSolverAgainstClosedForms:
    def test_flat_profile_is_linear(self):
        profile = solve_profile(flat_curvature(), zero_alpha(), t_max=5.0, step=1e-3)
        ts = np.linspace(0.0, 5.0, 401)
        assert np.max(np.abs(profile.h(ts) - ts)) <= 1e-10
        assert np.max(np.abs(profile.h_prime(ts) - 1.0)) <= 1e-10
        assert profile.r0 == math.inf

    def test_hyperbolic_profile_is_sinh(self):
        profile = solve_profile(hyperbolic_curvature(1.0), zero_alpha(), t_max=5.0, step=1e-3)
        assert profile.h(2.0) == pytest.approx(math.sinh(2.0), abs=1e-6)
        ts = np.linspace(0.0, 5.0, 401)
        assert np.max(np.abs(profile.h(ts) - np.sinh(ts))) <= 1e-6
        assert np.max(np.abs(profile.h_prime(ts) - np.cosh(ts))) <= 1e-6

    def test_scaled_hyperbolic_profile(self):
        c = 2.0
        profile = solve_profile(hyperbolic_curvature(c), zero_alpha(), t_max=3.0, step=1e-3)
        ts = np.linspace(0.0, 3.0, 301)
        assert np.max(np.abs(profile.h(ts) - np.sinh(c * ts) / c)) <= 1e-6

    def test_spherical_profile_is_sine_with_zero_at_pi(self):
        profile = solve_profile(spherical_curvature(1.0), zero_alpha(), t_max=4.0, step=1e-3)
        ts = np.linspace(0.0, math.pi, 301)
        assert np.max(np.abs(profile.h(ts) - np.sin(ts))) <= 1e-6
        assert profile.r0 == pytest.approx(math.pi, abs=1e-4)

    def test_initial_conditions_reproduced(self):
        for kappa in (flat_curvature(), hyperbolic_curvature(1.0), spherical_curvature(2.0)):
            profile = solve_profile(kappa, zero_alpha(), t_max=2.0, step=1e-3)
            assert abs(profile.h(0.0)) <= 1e-10
            assert abs(profile.h_prime(0.0) - 1.0) <= 1e-10

    def test_fourth_order_convergence(self):
        # Halving the step must shrink the worst error by at least 8x.
        ts = np.linspace(0.0, 3.0, 151)

        def max_err(step):
            profile = solve_profile(hyperbolic_curvature(1.0), zero_alpha(), t_max=3.0, step=step)
            return np.max(np.abs(profile.h(ts) - np.sinh(ts)))

        coarse, fine = max_err(0.02), max_err(0.01)
        assert coarse / fine >= 8.0

    def test_runtime_budget(self):
        start = time.perf_counter()
        solve_profile(hyperbolic_curvature(1.0), zero_alpha(), t_max=5.0, step=1e-3)
        solve_profile(spherical_curvature(1.0), constant_alpha(1.0), t_max=4.0, step=1e-3)
        solve_profile(flat_curvature(), inverse_shifted_alpha(1.0), t_max=5.0, step=1e-3)
        assert time.perf_counter() - start < 1.0


class TestValidityRadius:
    def test_flat_with_inverse_shift_is_unbounded(self):
        profile = solve_profile(flat_curvature(), inverse_shifted_alpha(0.5), t_max=20.0, step=1e-3)
        assert profile.mu_bound == math.inf
        assert profile.r0 == math.inf

    def test_flat_with_zero_alpha_is_unbounded(self):
        profile = solve_profile(flat_curvature(), zero_alpha(), t_max=10.0, step=1e-3)
        assert profile.mu_bound == math.inf

    def test_spherical_with_unit_alpha(self):
        # Oracle: h = sin, h' = cos, so h'/h > 1 exactly until arctan(1) = pi/4.
        profile = solve_profile(spherical_curvature(1.0), constant_alpha(1.0), t_max=4.0, step=1e-3)
        assert profile.mu_bound == pytest.approx(math.pi / 4.0, abs=1e-4)

    @pytest.mark.parametrize("c,kappa", [(1.0, 0.5), (2.0, 0.5), (1.5, 1.5)])
    def test_spherical_general_threshold(self, c, kappa):
        # Oracle: cos(ct) = (kappa/c) sin(ct) at t = arctan(c/kappa)/c.
        profile = solve_profile(
            spherical_curvature(c), constant_alpha(kappa), t_max=2 * math.pi / c, step=1e-3
        )
        assert profile.mu_bound == pytest.approx(math.atan2(c, kappa) / c, abs=1e-4)

    def test_spherical_zero_alpha_stops_at_quarter_period(self):
        # h'/h > 0 fails where cos(ct) = 0.
        profile = solve_profile(spherical_curvature(2.0), zero_alpha(), t_max=4.0, step=1e-3)
        assert profile.mu_bound == pytest.approx(math.pi / 4.0, abs=1e-4)

    def test_hyperbolic_with_trace_ratio_alpha_unbounded(self):
        alpha = trace_ratio_alpha(1.0, 2)
        profile = solve_profile(hyperbolic_curvature(1.0), alpha, t_max=10.0, step=1e-3)
        assert profile.mu_bound == math.inf

    def test_mu_bound_never_exceeds_first_zero(self):
        profile = solve_profile(spherical_curvature(1.0), zero_alpha(), t_max=6.0, step=1e-3)
        assert profile.mu_bound <= profile.r0

    def test_log_derivative_minus_alpha_positive_and_nonincreasing(self):
        alpha = constant_alpha(0.5)
        profile = solve_profile(hyperbolic_curvature(1.0), alpha, t_max=6.0, step=1e-3)
        ts = np.linspace(0.05, 5.5, 200)
        gap = profile.log_derivative(ts) - alpha(ts)
        assert np.all(gap > 0)
        assert np.all(np.diff(gap) <= 1e-12)


class TestProfileEdges:
    def test_tabulated_curvature_matches_constant(self):
        table = tabulated_curvature([0.0, 10.0], [-1.0, -1.0])
        profile = solve_profile(table, zero_alpha(), t_max=3.0, step=1e-3)
        ts = np.linspace(0, 3, 100)
        assert np.max(np.abs(profile.h(ts) - np.sinh(ts))) <= 1e-6

    def test_nonpositive_step_rejected(self):
        with pytest.raises(ValueError):
            solve_profile(flat_curvature(), zero_alpha(), t_max=1.0, step=0.0)

    def test_overflow_truncates_with_flag(self):
        profile = solve_profile(hyperbolic_curvature(10.0), zero_alpha(), t_max=100.0, step=1e-2)
        assert profile.truncated
        assert profile.t_max < 100.0

    def test_domain_guard(self):
        profile = solve_profile(flat_curvature(), zero_alpha(), t_max=2.0, step=1e-3)
        with pytest.raises(ProfileDomain):
            profile.h(2.5)
        with pytest.raises(ProfileDomain):
            profile.h(-0.1)

    def test_bad_alpha_rejected(self):
        with pytest.raises(ValueError):
            constant_alpha(-1.0)
        with pytest.raises(ValueError):
            inverse_shifted_alpha(0.0)

    def test_curvature_is_even(self):
        kappa = tabulated_curvature([0.0, 1.0, 2.0], [0.5, 0.2, 0.0])
        assert kappa(-1.0) == kappa(1.0)

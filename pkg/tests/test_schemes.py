from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import bisect

from roucir.errors import GridMismatchError
from roucir.models import ModelParams
from roucir.noise import NoisePath, RngSeed, TimeGrid, generate_bm_increments, generate_fbm_increments
from roucir.reflection import residual_reflection, skorokhod_map
from roucir.schemes import (
    SCHEMES,
    euler_cir_full_truncation,
    implicit_sqrt_step,
    ou_squared_sum,
    simulate_ou,
    simulate_rou_projected,
    simulate_sqrt_process,
)


def quadratic_root(y, dt, dnoise, b, sigma, c):
    """Bisection oracle for the positive root of the implicit-step quadratic."""
    A = 1.0 + 0.5 * b * dt
    beta = y + 0.5 * sigma * dnoise

    def f(x):
        return A * x * x - beta * x - 0.5 * c * dt

    hi = 1.0 + abs(beta) + c
    return bisect(f, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)


def zero_noise(n, horizon=1.0, hurst=0.5):
    kind = "bm" if hurst == 0.5 else "fbm"
    return NoisePath(TimeGrid(horizon, n), np.zeros(n), kind=kind, hurst=hurst)


def cir_mean(t, a, b, x0):
    return a / b + (x0 - a / b) * np.exp(-b * t)


class TestFullTruncation:
    def test_absorbing_zero(self):
        p = ModelParams(y0=0.0, a=0.0, b=0.0, sigma=2.0)
        nz = generate_bm_increments(TimeGrid(1.0, 100), 0)
        np.testing.assert_array_equal(euler_cir_full_truncation(p, nz).values, 0.0)

    def test_fixed_point(self):
        p = ModelParams(y0=1.0, a=1.0, b=1.0, sigma=0.0)
        np.testing.assert_array_equal(euler_cir_full_truncation(p, zero_noise(50)).values, 1.0)

    def test_raw_iterate_may_go_negative(self):
        p = ModelParams(y0=0.1, a=0.0, b=0.0, sigma=1.0)
        nz = NoisePath(TimeGrid(1.0, 2), [-1.0, 0.5])
        x = euler_cir_full_truncation(p, nz).values
        # 0.01 + 0.1 * (-1) = -0.09; then x+ = 0 freezes the diffusion
        np.testing.assert_allclose(x, [0.01, -0.09, -0.09])

    def test_mean(self):
        p = ModelParams(y0=1.0, a=0.25, b=1.0, sigma=1.0)
        nz = generate_bm_increments(TimeGrid(1.0, 1000), RngSeed(21), n_paths=10_000)
        xT = euler_cir_full_truncation(p, nz).values[:, -1]
        m = cir_mean(1.0, 0.25, 1.0, 1.0)
        assert m == pytest.approx(0.52591, abs=1e-5)
        assert abs(xT.mean() - m) <= 3 * xT.std(ddof=1) / np.sqrt(xT.size)

    def test_fractional_noise_rejected(self):
        nz = generate_fbm_increments(TimeGrid(1.0, 8), 0.7, 0)
        with pytest.raises(ValueError, match="Brownian"):
            euler_cir_full_truncation(ModelParams(y0=1.0, a=0.5, hurst=0.7), nz)


class TestImplicitStep:
    def test_fixed_point(self):
        p = ModelParams(y0=1.0, a=0.0, b=0.0, sigma=0.0)
        assert implicit_sqrt_step(1.0, 0.01, 0.0, p, drift=0.0) == 1.0

    def test_calm_step(self):
        p = ModelParams(y0=1.0, b=1.0, sigma=1.0)
        got = implicit_sqrt_step(1.0, 0.01, 0.0, p, drift=0.01)
        assert got == pytest.approx(quadratic_root(1.0, 0.01, 0.0, 1.0, 1.0, 0.01), rel=1e-14)
        assert got == pytest.approx(0.995075, abs=5e-7)

    def test_large_negative_shock(self):
        p = ModelParams(y0=1.0, b=1.0, sigma=1.0)
        got = implicit_sqrt_step(0.1, 0.01, -1.0, p, drift=0.01)
        oracle = quadratic_root(0.1, 0.01, -1.0, 1.0, 1.0, 0.01)
        assert got > 0
        assert got == pytest.approx(oracle, rel=1e-13)
        # the quoted four-digit value 1.2498e-4 is within 2e-4 relative of the root 1.24961e-4
        assert got == pytest.approx(1.2498e-4, rel=2e-4)

    def test_zero_drift_reduction_is_exact(self):
        p = ModelParams(y0=1.0, b=1.0, sigma=1.0)
        beta = np.linspace(-2, 2, 401)
        y = beta  # with dnoise = 0, beta equals the previous value
        got = implicit_sqrt_step(y, 0.01, 0.0, p, drift=0.0)
        np.testing.assert_array_equal(got, np.maximum(0.0, beta) / (1.0 + 0.5 * 0.01))

    def test_negative_drift_rejected(self):
        with pytest.raises(ValueError):
            implicit_sqrt_step(1.0, 0.01, 0.0, ModelParams(y0=1.0), drift=-0.1)

    def test_default_drift_from_params(self):
        p = ModelParams(y0=1.0, a=0.5, b=1.0, sigma=1.0)
        assert implicit_sqrt_step(1.0, 0.01, 0.3, p) == implicit_sqrt_step(1.0, 0.01, 0.3, p, drift=0.25)

    @given(
        y=st.floats(0.0, 5.0),
        dnoise=st.floats(-5.0, 5.0),
        c=st.floats(0.0, 2.0),
        b=st.floats(0.0, 5.0),
        dt=st.floats(1e-5, 0.1),
    )
    def test_root_solves_quadratic(self, y, dnoise, c, b, dt):
        p = ModelParams(y0=1.0, b=b, sigma=1.0)
        x = implicit_sqrt_step(y, dt, dnoise, p, drift=c)
        A, beta = 1.0 + 0.5 * b * dt, y + 0.5 * dnoise
        assert x >= 0
        scale = A * x * x + abs(beta) * x + 0.5 * c * dt
        assert abs(A * x * x - beta * x - 0.5 * c * dt) <= 1e-12 * max(scale, 1e-300)
        if c >= 1e-200:  # below that the true root can leave the double range
            assert x > 0

    @given(
        y1=st.floats(0.0, 3.0),
        y2=st.floats(0.0, 3.0),
        c1=st.floats(0.0, 1.0),
        c2=st.floats(0.0, 1.0),
        dnoise=st.floats(-3.0, 3.0),
    )
    def test_step_map_monotone(self, y1, y2, c1, c2, dnoise):
        p = ModelParams(y0=1.0, b=1.0, sigma=1.0)
        (ylo, yhi), (clo, chi) = sorted((y1, y2)), sorted((c1, c2))
        lo = implicit_sqrt_step(ylo, 1e-3, dnoise, p, drift=clo)
        hi = implicit_sqrt_step(yhi, 1e-3, dnoise, p, drift=chi)
        assert hi >= lo - 1e-15


class TestSqrtProcess:
    def test_deterministic_decay(self):
        p = ModelParams(y0=1.0, a=0.0, b=1.0, sigma=0.0)
        y = simulate_sqrt_process(p, zero_noise(10, 1.0)).values
        np.testing.assert_allclose(y, 1.05 ** -np.arange(11), rtol=1e-14)

    @pytest.mark.parametrize("hurst", [0.5, 0.7])
    def test_positive_with_small_perturbation(self, hurst):
        a = 0.25 if hurst == 0.5 else 0.0
        p = ModelParams(y0=0.25, a=a, b=1.0, sigma=1.0, epsilon=1e-4, hurst=hurst)
        grid = TimeGrid(5.0, 5000)
        nz = (generate_bm_increments(grid, 0, n_paths=20) if hurst == 0.5
              else generate_fbm_increments(grid, hurst, 0, n_paths=20))
        y = simulate_sqrt_process(p, nz).values
        assert y.min() > 0

    def test_fractional_run_pinned_near_zero(self):
        p = ModelParams(y0=0.25, a=0.0, b=1.0, sigma=1.0, epsilon=1e-4, hurst=0.7)
        nz = generate_fbm_increments(TimeGrid(5.0, 5000), 0.7, RngSeed(0))
        y = simulate_sqrt_process(p, nz).values
        assert 0 < y.min() < 1e-2

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32), eps=st.floats(1e-6, 1.0), b=st.floats(0.0, 3.0))
    def test_positivity_property(self, seed, eps, b):
        p = ModelParams(y0=0.25, a=0.25, b=b, sigma=1.0, epsilon=eps)
        nz = generate_bm_increments(TimeGrid(1.0, 500), RngSeed(seed))
        assert simulate_sqrt_process(p, nz).values.min() > 0

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32), e1=st.floats(0.0, 1.0), e2=st.floats(0.0, 1.0))
    def test_ordering_in_epsilon(self, seed, e1, e2):
        lo, hi = sorted((e1, e2))
        nz = generate_fbm_increments(TimeGrid(1.0, 256), 0.6, RngSeed(seed))
        base = ModelParams(y0=0.25, a=0.0, b=1.0, sigma=1.0, hurst=0.6)
        y_hi = simulate_sqrt_process(base.replace(epsilon=hi), nz).values
        y_lo = simulate_sqrt_process(base.replace(epsilon=lo), nz).values
        assert np.all(y_hi >= y_lo - 1e-12)

    def test_batch_equals_single(self):
        p = ModelParams(y0=0.5, a=0.5)
        nz = generate_bm_increments(TimeGrid(1.0, 100), 3, n_paths=4)
        batch = simulate_sqrt_process(p, nz).values
        np.testing.assert_array_equal(batch[2], simulate_sqrt_process(p, nz.path(2)).values)

    def test_hurst_mismatch(self):
        nz = generate_bm_increments(TimeGrid(1.0, 8), 0)
        with pytest.raises(ValueError):
            simulate_sqrt_process(ModelParams(y0=1.0, a=0.0, epsilon=0.1, hurst=0.7), nz)

    def test_subcritical_rejected(self):
        nz = generate_bm_increments(TimeGrid(1.0, 8), 0)
        with pytest.raises(ValueError, match="drift numerator"):
            simulate_sqrt_process(ModelParams(y0=1.0, a=0.1), nz)

    def test_noise_increments_untouched(self):
        nz = generate_bm_increments(TimeGrid(1.0, 8), 0)
        before = nz.increments.copy()
        simulate_sqrt_process(ModelParams(y0=1.0, a=0.5), nz)
        np.testing.assert_array_equal(nz.increments, before)


class TestProjected:
    def test_noiseless_decay(self):
        p = ModelParams(y0=0.8, b=1.0, sigma=0.0)
        out = simulate_rou_projected(p, zero_noise(20))
        np.testing.assert_allclose(out.path.values, 0.8 * (1 - 0.5 * 0.05) ** np.arange(21), rtol=1e-14)
        np.testing.assert_array_equal(out.reflection.values, 0.0)
        assert out.clamp_events == []

    def test_single_clamp(self):
        p = ModelParams(y0=0.1, b=1.0, sigma=1.0)
        out = simulate_rou_projected(p, NoisePath(TimeGrid(0.01, 1), [-0.4]))
        assert out.path.values[1] == 0.0
        assert out.clamps[0] == pytest.approx(0.1005, abs=1e-15)
        assert out.clamp_events == [(0, pytest.approx(0.1005, abs=1e-15))]
        assert out.reflection.values[1] == out.clamps[0]

    @pytest.mark.parametrize("seed", range(5))
    def test_skorokhod_equivalence(self, seed):
        p = ModelParams(y0=0.3, b=0.0, sigma=1.3)
        nz = generate_bm_increments(TimeGrid(1.0, 2000), RngSeed(seed))
        out = simulate_rou_projected(p, nz)
        free = 0.3 + 0.65 * nz.cumulative()
        reflected, regulator = skorokhod_map(free)
        np.testing.assert_allclose(out.path.values, reflected, rtol=0, atol=1e-12)
        np.testing.assert_allclose(out.reflection.values, regulator, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("hurst", [0.5, 0.8])
    def test_projection_identity(self, hurst):
        p = ModelParams(y0=0.25, b=1.0, sigma=1.0, hurst=hurst)
        grid = TimeGrid(5.0, 5000)
        nz = generate_bm_increments(grid, 1) if hurst == 0.5 else generate_fbm_increments(grid, hurst, 1)
        out = simulate_rou_projected(p, nz)
        res = residual_reflection(out.path, nz, p)
        assert np.max(np.abs(res.values - out.reflection.values)) <= 1e-12
        assert out.reflection.is_monotone(0.0)
        assert np.all(out.clamps >= 0)

    def test_stability_guard(self):
        with pytest.raises(ValueError, match="unstable"):
            simulate_rou_projected(ModelParams(y0=1.0, b=4.0), zero_noise(2, horizon=1.0))

    def test_clamp_events_single_path_only(self):
        nz = generate_bm_increments(TimeGrid(1.0, 8), 0, n_paths=2)
        with pytest.raises(ValueError):
            simulate_rou_projected(ModelParams(y0=0.1), nz).clamp_events


class TestOU:
    def test_geometric(self):
        p = ModelParams(y0=1.0, b=2.0, sigma=0.0)
        u = simulate_ou(p, zero_noise(10, 1.0)).values
        np.testing.assert_allclose(u, 0.9 ** np.arange(11), rtol=1e-14)

    def test_pure_integration(self):
        p = ModelParams(y0=0.7, b=0.0, sigma=2.0)
        nz = generate_bm_increments(TimeGrid(1.0, 100), 2)
        np.testing.assert_allclose(simulate_ou(p, nz).values, 0.7 + nz.cumulative(), atol=1e-13)

    def test_recursion(self):
        p = ModelParams(y0=0.4, b=1.5, sigma=0.8)
        nz = generate_bm_increments(TimeGrid(1.0, 50), 3)
        u = np.empty(51)
        u[0] = 0.4
        for k in range(50):
            u[k + 1] = u[k] - 0.75 * u[k] * 0.02 + 0.4 * nz.increments[k]
        np.testing.assert_allclose(simulate_ou(p, nz).values, u, atol=1e-14)

    def test_residual_is_zero(self):
        p = ModelParams(y0=0.25, b=1.0, sigma=1.0)
        nz = generate_bm_increments(TimeGrid(5.0, 5000), 4)
        res = residual_reflection(simulate_ou(p, nz), nz, p)
        assert np.max(np.abs(res.values)) <= 1e-12

    def test_mean(self):
        p = ModelParams(y0=1.0, b=1.0, sigma=1.0)
        nz = generate_bm_increments(TimeGrid(1.0, 1000), RngSeed(22), n_paths=10_000)
        uT = simulate_ou(p, nz).values[:, -1]
        assert np.exp(-0.5) == pytest.approx(0.60653, abs=1e-5)
        assert abs(uT.mean() - np.exp(-0.5)) <= 3 * uT.std(ddof=1) / np.sqrt(uT.size)

    def test_first_order_refinement(self):
        # sigma = 0: Euler error against exp(-b t / 2) halves with dt
        p = ModelParams(y0=1.0, b=1.0, sigma=0.0)
        errs = [abs(simulate_ou(p, zero_noise(n)).values[-1] - np.exp(-0.5)) for n in (100, 200, 400)]
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        np.testing.assert_allclose(ratios, 2.0, rtol=0.02)


class TestSquaredSum:
    def test_constant(self):
        p = ModelParams(y0=1.0, b=0.0, sigma=0.0)
        np.testing.assert_array_equal(ou_squared_sum(1, p, [zero_noise(10)]).values, 1.0)

    def test_noiseless_pair(self):
        p = ModelParams(y0=0.6, b=1.0, sigma=0.0)
        x = ou_squared_sum(2, p, [zero_noise(10), zero_noise(10)]).values
        np.testing.assert_allclose(x, 2 * (0.6 * 0.95 ** np.arange(11)) ** 2, rtol=1e-14)

    def test_cir_mean_with_four_dimensions(self):
        d, sigma = 4, 1.0
        p = ModelParams(y0=0.5, b=1.0, sigma=sigma)
        grid = TimeGrid(1.0, 1000)
        noises = [generate_bm_increments(grid, RngSeed(30, i), n_paths=10_000) for i in range(d)]
        xT = ou_squared_sum(d, p, noises).values[:, -1]
        a, x0 = d * sigma**2 / 4, d * 0.25
        assert (a, x0) == (1.0, 1.0)
        assert abs(xT.mean() - cir_mean(1.0, a, 1.0, x0)) <= 3 * xT.std(ddof=1) / np.sqrt(xT.size)

    def test_grid_mismatch(self):
        p = ModelParams(y0=1.0)
        with pytest.raises(GridMismatchError):
            ou_squared_sum(2, p, [zero_noise(10), zero_noise(20)])

    @pytest.mark.parametrize("d", [0, 1.5])
    def test_bad_dimension(self, d):
        with pytest.raises(ValueError):
            ou_squared_sum(d, ModelParams(y0=1.0), [zero_noise(4)])

    def test_count_must_match(self):
        with pytest.raises(ValueError):
            ou_squared_sum(2, ModelParams(y0=1.0), [zero_noise(4)])


def test_registry_names():
    assert set(SCHEMES) == {"cir-euler", "sqrt-implicit", "rou-projected", "ou"}
    p = ModelParams(y0=0.5, a=0.5)
    nz = generate_bm_increments(TimeGrid(1.0, 16), 0)
    for run in SCHEMES.values():
        assert run(p, nz).values.shape == (17,)

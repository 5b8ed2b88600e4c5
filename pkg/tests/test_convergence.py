from __future__ import annotations

import math

import numpy as np
import pytest

from roucir.convergence import (
    EXACT_SLACK,
    FIGURE2_EPSILONS,
    RefinementSpec,
    epsilon_ladder,
    grid_refinement_study,
    square_consistency,
)
from roucir.errors import GridMismatchError
from roucir.models import ModelParams
from roucir.noise import NoisePath, RngSeed, TimeGrid, generate_bm_increments, generate_fbm_increments
from roucir.reflection import skorokhod_map
from roucir.schemes import simulate_sqrt_process

FIGURE = dict(y0=0.25, b=1.0, sigma=1.0)


@pytest.fixture(scope="module")
def fig2_noise():
    return generate_fbm_increments(TimeGrid(5.0, 5000), 0.6, RngSeed(0))


@pytest.fixture(scope="module")
def fig2_report(fig2_noise):
    return epsilon_ladder(ModelParams(hurst=0.6, **FIGURE), FIGURE2_EPSILONS, fig2_noise, seeds=(0,), keep_paths=True)


class TestLadder:
    def test_ordering(self, fig2_report):
        assert fig2_report.monotone_Y
        assert fig2_report.order_violation <= EXACT_SLACK

    def test_last_rung_close_to_reference(self, fig2_report):
        assert fig2_report.sup_gap_Y[-1] <= fig2_report.sup_gap_Y[0] / 10
        assert fig2_report.sup_gap_L[-1] <= fig2_report.sup_gap_L[0] / 10

    def test_gaps_nonnegative_and_shaped(self, fig2_report):
        assert fig2_report.sup_gap_Y.shape == (5,)
        assert np.all(fig2_report.sup_gap_Y >= 0) and np.all(fig2_report.sup_gap_L >= 0)

    def test_sandwich_within_discretization_slack(self, fig2_report):
        # the two schemes discretize the drift differently, so the sandwich holds to O(dt)
        assert fig2_report.sandwich_violation <= fig2_report.dt

    def test_exact_sandwich_against_unperturbed_implicit(self, fig2_noise, fig2_report):
        floor = simulate_sqrt_process(ModelParams(hurst=0.6, **FIGURE), fig2_noise).values
        for eps in FIGURE2_EPSILONS:
            y, _ = fig2_report.paths[eps]
            assert np.all(y.values >= floor - EXACT_SLACK)

    def test_reflection_paths_monotone(self, fig2_report):
        for eps in FIGURE2_EPSILONS:
            _, L = fig2_report.paths[eps]
            assert L.is_monotone(0.0)

    def test_brownian_batch(self):
        base = ModelParams(a=0.25, **FIGURE)
        nz = generate_bm_increments(TimeGrid(1.0, 1000), RngSeed(3), n_paths=4)
        rep = epsilon_ladder(base, [0.5, 0.05], nz)
        assert rep.sup_gap_Y.shape == (2, 4)
        assert rep.monotone_Y

    def test_noiseless_single_rung_by_hand(self):
        eps, dt = 0.2, 0.1
        base = ModelParams(y0=0.5, a=0.0, b=1.0, sigma=0.0)
        rep = epsilon_ladder(base, [eps], NoisePath(TimeGrid(0.3, 3), np.zeros(3)))
        A = 1.0 + 0.5 * dt
        y = ref = 0.5
        gap = 0.0
        for _ in range(3):
            y = (y + math.sqrt(y * y + 2 * eps * dt * A)) / (2 * A)
            ref = ref * (1 - 0.5 * dt)
            gap = max(gap, y - ref)
        assert rep.sup_gap_Y[0] == pytest.approx(gap, rel=1e-12)
        assert rep.sandwich_violation <= 0

    @pytest.mark.parametrize("eps", [[0.1, 0.1], [0.1, 0.2], [0.1, 0.0], []])
    def test_bad_ladders(self, eps, fig2_noise):
        with pytest.raises(ValueError):
            epsilon_ladder(ModelParams(hurst=0.6, **FIGURE), eps, fig2_noise)

    def test_hurst_mismatch(self):
        nz = generate_bm_increments(TimeGrid(1.0, 10), 0)
        with pytest.raises(GridMismatchError):
            epsilon_ladder(ModelParams(hurst=0.6, **FIGURE), [1.0], nz)

    def test_base_must_be_unperturbed_limit(self):
        nz = generate_bm_increments(TimeGrid(1.0, 10), 0)
        with pytest.raises(ValueError, match="critical"):
            epsilon_ladder(ModelParams(a=0.5, **FIGURE), [1.0], nz)
        fnz = generate_fbm_increments(TimeGrid(1.0, 10), 0.7, 0)
        with pytest.raises(ValueError):
            epsilon_ladder(ModelParams(a=0.1, hurst=0.7, **FIGURE), [1.0], fnz)

    def test_manifest_items(self, fig2_report):
        items = dict(fig2_report.manifest_items())
        assert items["ladder.monotone_Y"] == "true"
        assert items["ladder.seeds"] == "0"
        assert float(items["ladder.rung.4.epsilon"]) == 1e-4
        assert float(items["ladder.dt"]) == pytest.approx(1e-3)


class TestSquareConsistency:
    def test_strictly_decreasing(self):
        p = ModelParams(y0=1.0, a=0.5, b=1.0, sigma=1.0)
        nz = generate_bm_increments(TimeGrid(1.0, 10_000), RngSeed(0))
        rep = square_consistency(p, nz, factors=(100, 10, 1))
        assert rep.dts == pytest.approx((1e-2, 1e-3, 1e-4))
        assert rep.strictly_decreasing()

    def test_single_level(self):
        p = ModelParams(y0=1.0, a=0.5)
        rep = square_consistency(p, generate_bm_increments(TimeGrid(1.0, 1000), 0))
        assert len(rep.sup_gaps) == 1

    def test_noiseless_first_order(self):
        p = ModelParams(y0=1.0, a=0.5, b=1.0, sigma=0.0)
        nz = NoisePath(TimeGrid(1.0, 4000), np.zeros(4000))
        rep = square_consistency(p, nz, factors=(4, 2, 1))
        g = np.array(rep.sup_gaps)
        assert np.all(g / np.array(rep.dts) < 1.0)
        np.testing.assert_allclose(g[:-1] / g[1:], 2.0, rtol=0.05)

    @pytest.mark.parametrize("a", [0.25, 0.1])
    def test_needs_supercritical(self, a):
        with pytest.raises(ValueError):
            square_consistency(ModelParams(y0=1.0, a=a), generate_bm_increments(TimeGrid(1.0, 10), 0))

    def test_needs_brownian(self):
        nz = generate_fbm_increments(TimeGrid(1.0, 10), 0.7, 0)
        with pytest.raises(ValueError):
            square_consistency(ModelParams(y0=1.0, a=0.5, hurst=0.7), nz)


class TestRefinement:
    def test_noiseless_ou_halves(self):
        p = ModelParams(y0=1.0, b=1.0, sigma=0.0)
        nz = NoisePath(TimeGrid(1.0, 400), np.zeros(400))
        rep = grid_refinement_study(RefinementSpec("ou", p, nz), levels=3)
        assert len(rep.consecutive_gaps) == 2
        np.testing.assert_allclose(rep.gap_ratios(), 2.0, rtol=0.02)
        assert rep.dts == pytest.approx((0.01, 0.005, 0.0025))

    def test_reflected_bm_matches_skorokhod_every_level(self):
        p = ModelParams(y0=0.2, b=0.0, sigma=1.0)

        def oracle(params, noise):
            return skorokhod_map(params.y0 + 0.5 * params.sigma * noise.cumulative())[0]

        nz = generate_bm_increments(TimeGrid(1.0, 1024), RngSeed(2))
        rep = grid_refinement_study(RefinementSpec("rou-projected", p, nz, oracle=oracle), levels=4)
        assert all(g <= 1e-12 for g in rep.oracle_gaps)
        assert len(rep.oracle_gaps) == 4

    def test_callable_scheme_and_factor(self):
        p = ModelParams(y0=1.0, a=0.5)
        nz = generate_bm_increments(TimeGrid(1.0, 900), 1)
        rep = grid_refinement_study(RefinementSpec(simulate_sqrt_process, p, nz, factor=3), levels=3)
        assert rep.dts == pytest.approx((1 / 100, 1 / 300, 1 / 900))
        assert rep.oracle_gaps is None

    def test_levels_one_rejected(self):
        spec = RefinementSpec("ou", ModelParams(y0=1.0), generate_bm_increments(TimeGrid(1.0, 8), 0))
        with pytest.raises(ValueError):
            grid_refinement_study(spec, levels=1)

    @pytest.mark.parametrize("factor", [1, 2.5])
    def test_bad_factor(self, factor):
        spec = RefinementSpec("ou", ModelParams(y0=1.0), generate_bm_increments(TimeGrid(1.0, 8), 0), factor=factor)
        with pytest.raises(ValueError):
            grid_refinement_study(spec, levels=2)

    def test_indivisible_grid(self):
        spec = RefinementSpec("ou", ModelParams(y0=1.0), generate_bm_increments(TimeGrid(1.0, 10), 0))
        with pytest.raises(ValueError):
            grid_refinement_study(spec, levels=3)

    def test_unknown_scheme(self):
        spec = RefinementSpec("heun", ModelParams(y0=1.0), generate_bm_increments(TimeGrid(1.0, 8), 0))
        with pytest.raises(ValueError, match="known"):
            grid_refinement_study(spec, levels=2)

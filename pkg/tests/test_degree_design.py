import json
import math

import numpy as np
import pytest

from raptorlab.degree_design import (DegreeDistribution, DesignResult,
                                     LinearProgram, LpGrid, LtParameters,
                                     avg_degree_lower_bound, design_lowsnr,
                                     design_original, design_practical,
                                     iteration_upper_bound,
                                     max_eta_upper_bound, search_max_eta,
                                     search_max_mu, solve_linear_program,
                                     verify_on_refined_grid)
from raptorlab.numerics import FOUR_LN2, QuadratureSpec, Snr, phi


class TestDegreeDistribution:
    def test_normalization_enforced(self):
        with pytest.raises(ValueError):
            DegreeDistribution({1: 0.5, 2: 0.4}, 2)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            DegreeDistribution({1: 1.1, 2: -0.1}, 2)

    def test_beta(self):
        d = DegreeDistribution({1: 0.25, 2: 0.25, 4: 0.5}, 4)
        assert d.beta == pytest.approx(0.25 + 0.5 + 2.0)

    def test_edge_node_round_trip(self):
        d = DegreeDistribution({1: 0.1, 2: 0.3, 5: 0.6}, 5)
        back = DegreeDistribution.from_edge_perspective(d.omega_edge, 5)
        for deg in d.support:
            assert back.node_fraction(deg) == pytest.approx(d.node_fraction(deg),
                                                            abs=1e-9)

    def test_edge_perspective_sums_to_one(self):
        d = DegreeDistribution({2: 0.5, 3: 0.5}, 3)
        assert sum(d.omega_edge.values()) == pytest.approx(1.0, abs=1e-12)


class TestLtParameters:
    def test_design_rate(self):
        p = LtParameters.for_design_rate(beta=13.0, rate=0.005)
        assert p.design_rate == pytest.approx(0.005)
        assert p.alpha == pytest.approx(2600.0)


class TestLpKernel:
    def test_simple_maximum(self):
        # maximize x subject to x <= 1  ->  minimize -x
        sol = solve_linear_program(LinearProgram(
            c=np.array([-1.0]), a_ub=np.array([[1.0]]), b_ub=np.array([1.0])))
        assert sol.status == "optimal"
        assert sol.x[0] == pytest.approx(1.0)

    def test_contradiction_is_infeasible(self):
        # x >= 2 and x <= 1
        sol = solve_linear_program(LinearProgram(
            c=np.array([1.0]),
            a_ub=np.array([[-1.0], [1.0]]), b_ub=np.array([-2.0, 1.0])))
        assert sol.status == "infeasible"

    def test_unbounded_distinct_from_infeasible(self):
        sol = solve_linear_program(LinearProgram(c=np.array([-1.0])))
        assert sol.status == "unbounded"

    def test_two_degree_instance_against_grid_search(self):
        # smallest nontrivial low-SNR design; brute force on the 1-simplex
        result = design_lowsnr(2, LpGrid(0.5, 200))
        assert result.feasible
        mu = LpGrid(0.5, 200).points
        x = phi(mu)
        best_beta, best = -1.0, None
        for w1 in np.arange(0.0, 1.0 + 1e-12, 1e-4):
            w2 = 1.0 - w1
            lhs = w1 + 2 * w2 * x
            if np.all(lhs >= mu / FOUR_LN2):
                beta = w1 + 2 * w2
                if beta > best_beta:
                    best_beta, best = beta, (w1, w2)
        assert best is not None
        assert result.beta == pytest.approx(best_beta, abs=2e-3)


class TestLowSnrDesign:
    def test_feasible_small_mu(self):
        r = design_lowsnr(2, LpGrid(0.1, 150))
        assert r.feasible
        # the constraint barely binds; nearly all mass lands on degree 2
        assert r.distribution.node_fraction(2) > 0.9

    def test_infeasible_large_mu_small_degree(self):
        r = design_lowsnr(2, LpGrid(30.0, 150))
        assert not r.feasible
        assert r.binding_point is not None

    def test_practical_reduces_to_lowsnr(self):
        a = design_lowsnr(40, LpGrid(8.0, 300))
        b = design_practical(40, 8.0, epsilon=0.0, eta=1.0, point_count=300)
        assert a.feasible and b.feasible
        assert a.beta == pytest.approx(b.beta, abs=1e-9)

    def test_refined_grid_check(self):
        r = design_lowsnr(60, LpGrid(12.0, 400))
        assert r.feasible
        assert verify_on_refined_grid(r, 4) <= 1e-6


class TestPracticalDesign:
    def test_eta_above_bound_infeasible(self):
        # 0.99 exceeds the epsilon=0.05 ceiling of 0.9823 for every D
        for d_max in (30, 100, 400):
            r = design_practical(d_max, 40.0, 0.05, 0.99, point_count=200)
            assert not r.feasible

    def test_feasibility_monotone_in_eta(self):
        feas = [design_practical(80, 40.0, 0.05, eta, point_count=200).feasible
                for eta in (0.5, 0.7, 0.9, 0.95, 0.97, 0.99)]
        # once infeasible, stays infeasible
        assert feas == sorted(feas, reverse=True)

    def test_degree_one_fraction_tracks_epsilon(self):
        r = design_practical(100, 40.0, 0.05, 0.92, point_count=300)
        assert r.feasible
        assert r.distribution.node_fraction(1) == pytest.approx(
            0.92 * 0.05 / FOUR_LN2, abs=2e-3)

    def test_bounds_hold_for_solved_design(self):
        r = design_practical(100, 40.0, 0.05, 0.92, point_count=300)
        assert r.beta >= avg_degree_lower_bound(0.92, 40.0, 0.05) - 1e-9
        assert 0.92 <= max_eta_upper_bound(0.05)


class TestSearches:
    def test_search_max_eta_small(self):
        r = search_max_eta(50, 40.0, 0.05, eta_resolution=1e-3, point_count=200)
        assert r.feasible
        assert 0.84 < r.achieved_eta < 0.88  # near the 0.8612 reference

    def test_search_max_mu_monotone_delta(self):
        cands = np.arange(5.0, 25.0, 0.05)
        deltas = []
        for d_max in (50, 100):
            r = search_max_mu(d_max, cands, point_count=200)
            assert r.feasible
            deltas.append(r.delta0)
        assert deltas[1] < deltas[0]  # more degrees close more of the gap

    def test_search_rejects_unsorted(self):
        with pytest.raises(ValueError):
            search_max_mu(20, [3.0, 2.0, 4.0])

    def test_beta_nondecreasing_in_max_degree(self):
        betas = [search_max_eta(d_max, 40.0, 0.05, eta_resolution=1e-3,
                                point_count=200).beta
                 for d_max in (50, 100, 200)]
        assert betas == sorted(betas)


class TestOriginalDesign:
    SPEC = QuadratureSpec(mc_samples=20_000, rng_seed=5)

    def test_degree_one_feasible_above_threshold(self):
        # gamma > mu_o / (2 alpha): omega_1 = 1 satisfies everything
        alpha, mu_o = 100.0, 4.0
        snr = Snr(1.5 * mu_o / (2 * alpha))
        r = design_original(snr, alpha, 4, LpGrid(mu_o, 100), self.SPEC)
        assert r.feasible

    def test_infeasible_below_threshold(self):
        alpha, mu_o = 100.0, 4.0
        snr = Snr(0.5 * mu_o / (2 * alpha))
        r = design_original(snr, alpha, 4, LpGrid(mu_o, 100), self.SPEC)
        assert not r.feasible

    def test_node_perspective_output(self):
        alpha, mu_o = 50.0, 2.0
        snr = Snr(3.0 * mu_o / (2 * alpha))
        r = design_original(snr, alpha, 6, LpGrid(mu_o, 100), self.SPEC)
        assert r.feasible
        assert sum(r.distribution.omega_node.values()) == pytest.approx(1.0,
                                                                        abs=1e-9)


class TestBounds:
    def test_avg_degree_bound_values(self):
        assert avg_degree_lower_bound(1.0, 40.0, 0.05) == pytest.approx(14.445,
                                                                        abs=5e-4)
        assert avg_degree_lower_bound(0.0, 17.0, 0.05) == 0.0

    def test_max_eta_values(self):
        assert max_eta_upper_bound(0.05) == pytest.approx(0.9823, abs=5e-5)
        assert max_eta_upper_bound(0.0) == 1.0

    def test_iteration_bound(self):
        assert iteration_upper_bound(40.0, 0.05) == pytest.approx(800.0)
        assert iteration_upper_bound(40.0, 0.01) == pytest.approx(4000.0)
        assert iteration_upper_bound(0.0, 0.1) == 0.0
        with pytest.raises(ValueError):
            iteration_upper_bound(40.0, 0.0)

    def test_formula_cross_check(self):
        eta, mu_o, eps = 0.9, 20.0, 0.1
        assert avg_degree_lower_bound(eta, mu_o, eps) == pytest.approx(
            eta * (mu_o + eps) / (4 * math.log(2)))
        assert max_eta_upper_bound(eps) == pytest.approx(
            4 * math.log(2) / (4 * math.log(2) + eps))
        assert iteration_upper_bound(mu_o, eps) == pytest.approx(200.0)


class TestSerialization:
    def test_json_round_trip(self):
        r = design_practical(30, 10.0, 0.05, 0.8, point_count=150)
        assert r.feasible
        doc = json.loads(r.to_json())
        back = DesignResult.from_json(r.to_json())
        assert doc["D"] == 30
        assert back.achieved_eta == r.achieved_eta
        assert back.epsilon == r.epsilon
        assert back.achieved_mu_o == r.achieved_mu_o
        for d in r.distribution.support:
            assert back.distribution.node_fraction(d) == r.distribution.node_fraction(d)

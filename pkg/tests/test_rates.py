import math

import numpy as np
import pytest

import beamsched as bs
from beamsched import (
    EMPTY_BLOCKAGE,
    Link,
    Network,
    Path,
    PatternBudgetError,
    Schedule,
)
from helpers import (
    fig1_network,
    fig2a_linear,
    fig2a_squared,
    fig4_average,
    fig4_without_detour,
    fig4_worst,
    path_by_nodes,
    random_layered_network,
    two_hop_network,
)


@pytest.fixture(scope="module")
def fig2a_paths():
    return bs.enumerate_paths(fig2a_squared()).paths


class TestApproxCapacity:
    def test_fig2a_activates_strongest(self, fig2a_paths):
        sol = bs.approx_capacity(fig2a_squared(), fig2a_paths)
        assert sol.value == pytest.approx(25.0)
        assert sol.fractions == (0.0, 0.0, 0.0, 0.0, 1.0)

    def test_fig1(self):
        net = fig1_network()
        sol = bs.approx_capacity(net, bs.enumerate_paths(net).paths)
        assert sol.value == pytest.approx(4.0)
        assert sol.fractions[1] == pytest.approx(1.0)

    def test_single_path(self):
        net = Network(0, (Link(0, 1, 2.5),))
        sol = bs.approx_capacity(net, (Path((0, 1)),))
        assert sol.value == pytest.approx(2.5) and sol.fractions == (1.0,)

    def test_empty_path_list(self):
        sol = bs.approx_capacity(fig2a_squared(), ())
        assert sol.value == 0.0 and sol.fractions == ()

    def test_schedule_always_validates(self, fig2a_paths):
        sol = bs.approx_capacity(fig2a_squared(), fig2a_paths)
        assert bs.validate_schedule(fig2a_squared(), sol.schedule).valid


class TestWorstCase:
    def test_fig2a_one_failure(self, fig2a_paths):
        sol = bs.optimal_worst_case(fig2a_squared(), fig2a_paths, 1)
        assert sol.value == pytest.approx(400 / 41, abs=1e-9)
        assert sol.fractions[3] == pytest.approx(25 / 41, abs=1e-9)
        assert sol.fractions[4] == pytest.approx(16 / 41, abs=1e-9)
        # the witness pattern really is tight
        rate, _ = bs.min_rate_under_blockage(fig2a_squared(), sol.paths, sol.fractions, 1)
        assert rate == pytest.approx(sol.value, abs=1e-9)
        assert sol.worst_pattern and len(sol.worst_pattern) == 1

    def test_zero_budget_equals_capacity(self, fig2a_paths):
        wc = bs.optimal_worst_case(fig2a_squared(), fig2a_paths, 0)
        cap = bs.approx_capacity(fig2a_squared(), fig2a_paths)
        assert wc.value == pytest.approx(cap.value)

    def test_fig4_overlapping_optimum(self):
        net = fig4_worst()
        sol = bs.optimal_worst_case(net, bs.enumerate_paths(net).paths, 1)
        assert sol.value == pytest.approx(1.2, abs=1e-9)

    def test_nonincreasing_in_budget(self, fig2a_paths):
        values = [
            bs.optimal_worst_case(fig2a_squared(), fig2a_paths, k).value for k in range(4)
        ]
        assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))

    def test_budget_guard(self, fig2a_paths):
        with pytest.raises(PatternBudgetError):
            bs.optimal_worst_case(fig2a_squared(), fig2a_paths, 5, pattern_budget=10)

    def test_bad_budget_rejected(self, fig2a_paths):
        with pytest.raises(ValueError):
            bs.optimal_worst_case(fig2a_squared(), fig2a_paths, 11)


class TestAverage:
    def test_fig2a_linear_variant(self, fig2a_paths):
        sol = bs.optimal_average(fig2a_linear(), fig2a_paths)
        assert sol.value == pytest.approx(3.24, abs=1e-9)

    def test_fig1_prefers_reliable_path(self):
        net = fig1_network(shared_prob=2 / 3)
        sol = bs.optimal_average(net, bs.enumerate_paths(net).paths)
        assert sol.value == pytest.approx(3.0, abs=1e-9)
        assert sol.fractions[0] == pytest.approx(1.0)

    def test_reduces_to_capacity_without_blockage(self, fig2a_paths):
        avg = bs.optimal_average(fig2a_squared(), fig2a_paths)
        cap = bs.approx_capacity(fig2a_squared(), fig2a_paths)
        assert avg.value == pytest.approx(cap.value)

    def test_fig4_average_variant(self):
        net = fig4_average()
        sol = bs.optimal_average(net, bs.enumerate_paths(net).paths)
        assert sol.value == pytest.approx(0.393216, abs=1e-9)

    def test_never_below_plain_lp(self, fig2a_paths):
        rng = np.random.default_rng(3)
        for _ in range(20):
            net = random_layered_network(rng)
            paths = bs.enumerate_paths(net, 500).paths
            assert (
                bs.optimal_average(net, paths).value
                >= bs.plain_lp_average_rate(net, paths) - 1e-9
            )


class TestPlainAverage:
    def test_fig2a_linear(self, fig2a_paths):
        assert bs.plain_lp_average_rate(fig2a_linear(), fig2a_paths) == pytest.approx(
            5 / 9, abs=1e-9
        )

    def test_zero_blockage(self, fig2a_paths):
        assert bs.plain_lp_average_rate(fig2a_squared(), fig2a_paths) == pytest.approx(25.0)

    def test_fig1_variant(self):
        net = fig1_network(shared_prob=2 / 3)
        assert bs.plain_lp_average_rate(net, bs.enumerate_paths(net).paths) == pytest.approx(
            4 / 3, abs=1e-9
        )


class TestFeasibility:
    def test_hits_target_exactly(self, fig2a_paths):
        net = fig2a_squared()
        sol = bs.feasibility_schedule(net, fig2a_paths, 17.5)
        assert sol.status == "optimal"
        total = sum(x * bs.path_capacity(net, p) for p, x in zip(sol.paths, sol.fractions))
        assert total == pytest.approx(17.5, abs=1e-7)
        assert bs.validate_schedule(net, sol.schedule).valid

    def test_zero_target(self, fig2a_paths):
        sol = bs.feasibility_schedule(fig2a_squared(), fig2a_paths, 0.0)
        assert sol.status == "optimal" and sum(sol.fractions) == pytest.approx(0.0, abs=1e-9)

    def test_above_capacity_infeasible(self, fig2a_paths):
        assert bs.feasibility_schedule(fig2a_squared(), fig2a_paths, 26.0).status == "infeasible"


class TestTradeoff:
    def test_fig2a_table(self, fig2a_paths):
        entries = {(e.schedule_budget, e.blocked_count): e.rate for e in
                   bs.tradeoff_curve(fig2a_squared(), fig2a_paths, 2)}
        assert entries[(0, 0)] == pytest.approx(25.0)
        assert entries[(0, 1)] == pytest.approx(0.0, abs=1e-9)
        assert entries[(0, 2)] == pytest.approx(0.0, abs=1e-9)
        assert entries[(1, 0)] == pytest.approx(800 / 41, abs=1e-7)
        assert entries[(2, 2)] == pytest.approx(3600 / 769, abs=1e-7)

    def test_csv_shape(self, fig2a_paths):
        csv = bs.tradeoff_to_csv(bs.tradeoff_curve(fig2a_squared(), fig2a_paths, 1))
        lines = csv.strip().splitlines()
        assert lines[0] == "k_star,k,rate"
        assert len(lines) == 1 + 4


class TestEdgeDisjoint:
    def test_five_disjoint_paths_one_failure(self):
        net = two_hop_network([1.0] * 5)
        sol = bs.edge_disjoint_worst_case(net, 1)
        assert len(sol.paths) == 5
        assert sol.value == pytest.approx(0.8, abs=1e-9)
        assert all(x == pytest.approx(0.2, abs=1e-9) for x in sol.fractions)

    def test_zero_budget(self):
        net = two_hop_network([1.0] * 5)
        sol = bs.edge_disjoint_worst_case(net, 0)
        assert sol.value == pytest.approx(1.0, abs=1e-9)
        rate, _ = bs.min_rate_under_blockage(net, sol.paths, sol.fractions, 0)
        assert rate == pytest.approx(1.0, abs=1e-9)

    def test_already_disjoint_solution_untouched(self):
        net = two_hop_network([1.0, 1.0])
        lp_sol = bs.optimal_worst_case(net, bs.enumerate_paths(net).paths, 1)
        sol = bs.edge_disjoint_worst_case(net, 1)
        assert set(sol.paths) == set(lp_sol.active())
        by_path = dict(zip(lp_sol.paths, lp_sol.fractions))
        assert all(x == pytest.approx(by_path[p]) for p, x in zip(sol.paths, sol.fractions))

    def test_unequal_capacities_rejected(self):
        with pytest.raises(ValueError):
            bs.edge_disjoint_worst_case(fig2a_squared(), 1)

    def test_random_equal_capacity_networks(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            m = float(rng.uniform(0.5, 3.0))
            net = random_layered_network(rng, max_relays=6, link_prob=0.35,
                                         equal_capacity=m, max_links=14)
            for budget in (0, 1, 2):
                if budget > len(net.links):
                    continue
                sol = bs.edge_disjoint_worst_case(net, budget)
                reference = bs.optimal_worst_case(
                    net, bs.enumerate_paths(net).paths, budget
                )
                edges = [frozenset(p.edges) for p in sol.paths]
                for i in range(len(edges)):
                    for j in range(i + 1, len(edges)):
                        assert not (edges[i] & edges[j])
                assert bs.validate_schedule(net, sol.schedule).valid
                rate, _ = bs.min_rate_under_blockage(net, sol.paths, sol.fractions, budget)
                assert rate == pytest.approx(reference.value, abs=1e-7)

    def test_single_best_path_matches_average_for_equal_caps(self):
        rng = np.random.default_rng(23)
        for _ in range(25):
            net = random_layered_network(rng, max_relays=6, equal_capacity=2.0)
            paths = bs.enumerate_paths(net).paths
            best = max(bs.path_capacity(net, p) * bs.path_success(net, p) for p in paths)
            assert bs.optimal_average(net, paths).value == pytest.approx(best, abs=1e-7)


class TestRateStatistics:
    def test_example4_exhaustive(self):
        net = fig4_without_detour()
        paths = bs.enumerate_paths(net).paths
        assert len(paths) == 4 and len(net.links) == 11
        single = Schedule({paths[0]: 1.0})
        mean, var = bs.rate_statistics(net, single)
        assert mean == pytest.approx(0.524288, abs=1e-12)
        assert var == pytest.approx(0.773698093056, abs=1e-12)
        spread = Schedule({p: 0.25 for p in paths})
        mean4, var4 = bs.rate_statistics(net, spread)
        assert mean4 == pytest.approx(0.524288, abs=1e-9)
        assert var4 == pytest.approx(0.375155326976, abs=1e-9)

    def test_monte_carlo_agrees_with_exhaustive(self):
        net = fig4_without_detour()
        paths = bs.enumerate_paths(net).paths
        sched = Schedule({p: 0.25 for p in paths})
        exact_mean, exact_var = bs.rate_statistics(net, sched)
        mc_mean, mc_var = bs.rate_statistics(net, sched, seed=1, samples=200_000,
                                             exhaustive_limit=0)
        assert mc_mean == pytest.approx(exact_mean, abs=5e-3)
        assert mc_var == pytest.approx(exact_var, abs=1e-2)

    def test_no_blockage_degenerate(self):
        net = fig2a_squared()
        p5 = path_by_nodes(net, 0, 5, 6)
        mean, var = bs.rate_statistics(net, Schedule({p5: 1.0}))
        assert mean == pytest.approx(25.0) and var == pytest.approx(0.0, abs=1e-12)


class TestLemma1Bound:
    def test_vertex_solutions_use_few_paths(self):
        rng = np.random.default_rng(29)
        for _ in range(30):
            net = random_layered_network(rng)
            paths = bs.enumerate_paths(net, 2000).paths
            sol = bs.optimal_average(net, paths)
            active = sum(1 for x in sol.fractions if x > 1e-9)
            assert active <= 2 * net.n_relays + 2

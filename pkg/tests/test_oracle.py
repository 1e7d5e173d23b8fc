from dataclasses import replace

import numpy as np
import pytest

from selective_newsvendor import (
    Assignment,
    EnumerationSizeError,
    GenSpec,
    InfeasibleError,
    generate_instance,
    oracle_all_or_nothing,
    oracle_fixed_price,
    oracle_joint,
    run_grid_search,
    SearchConfig,
)

from conftest import tiny_family


class TestFixedPriceOracle:
    def test_slack_pair_count_and_value(self, slack_pair):
        report = oracle_fixed_price(slack_pair, 92.5)
        assert report.candidates_enumerated == 4  # (1 agent + 1)^2 maps
        assert report.best.profit == pytest.approx(1012.5, abs=1e-9)

    def test_tight_pair_value(self, tight_pair):
        report = oracle_fixed_price(tight_pair, 102.5)
        assert report.best.profit == pytest.approx(512.5, abs=1e-9)
        assert report.best.quantity == pytest.approx(10.0)

    def test_infeasible_verdict(self, slack_pair):
        with pytest.raises(InfeasibleError):
            oracle_fixed_price(replace(slack_pair, service_level=1.0), 120.0)

    def test_size_guard(self):
        big = generate_instance(GenSpec(seed=0, n_agents=4, n_customers=30))
        with pytest.raises(EnumerationSizeError):
            oracle_fixed_price(big, 95.0)

    def test_customer_relabeling_symmetry(self):
        for seed in range(15):
            inst = tiny_family(seed)
            perm = np.random.default_rng(seed).permutation(inst.n_customers)
            shuffled = replace(
                inst,
                customer_means=inst.customer_means[perm],
                waiting_times=inst.waiting_times[perm],
                effort=inst.effort[:, perm],
            )
            price = inst.shortage_cost + 6.0
            try:
                a = oracle_fixed_price(inst, price).best.profit
                b = oracle_fixed_price(shuffled, price).best.profit
            except InfeasibleError:
                continue
            assert a == pytest.approx(b, abs=1e-9)


class TestJointOracle:
    def test_slack_pair_balanced_peak(self, slack_pair):
        best = oracle_joint(slack_pair, 0.5).best
        # the peak of (price - cost) * demand over the served pair:
        # (base + cost)/2 + scaled demand / (2 * price_scale * served)
        assert best.price == pytest.approx(92.5)
        assert best.profit == pytest.approx(1012.5, abs=1e-9)
        assert best.quantity == pytest.approx(45.0)

    def test_tight_pair_shortage_peak_dominates_single_accounts(self, tight_pair):
        best = oracle_joint(tight_pair, 0.5).best
        assert best.price == pytest.approx(102.5)
        assert best.profit == pytest.approx(512.5, abs=1e-9)
        # with room for only one account the peak drops to 445 (the larger
        # account at its own shortage stationary price of 105)
        solo = oracle_joint(replace(tight_pair, agent_capacities=(1,)), 0.5).best
        assert solo.profit == pytest.approx(445.0, abs=1e-9)
        assert solo.price == pytest.approx(105.0)

    def test_two_balanced_stationary_forms(self, slack_pair):
        # when the order tracks demand, the maximizer of (price - cost) * demand
        # carries (base + cost)/2; holding the order fixed at a cap would give
        # base/2 instead, which is *not* where the unconstrained peak sits
        scaled = 30.0
        served = 2
        tracking = scaled / (2 * 1.0 * served) + (100.0 + 70.0) / 2
        frozen = scaled / (2 * 1.0 * served) + 100.0 / 2
        assert tracking == pytest.approx(92.5)
        assert frozen == pytest.approx(57.5)
        dense = run_grid_search(slack_pair, SearchConfig(step_size=0.01))
        assert dense.price == pytest.approx(tracking, abs=0.01)

    def test_analytic_candidates_match_a_dense_grid(self):
        for seed in range(12):
            inst = tiny_family(seed)
            try:
                analytic = oracle_joint(inst, 0.5).best.profit
                dense = run_grid_search(inst, SearchConfig(step_size=0.001)).profit
            except InfeasibleError:
                continue
            assert analytic >= dense - 1e-4
            assert analytic == pytest.approx(dense, abs=1e-4)

    def test_infeasible_when_capacity_cannot_meet_the_floor(self, slack_pair):
        starved = replace(slack_pair, agent_capacities=(1,), service_level=1.0)
        with pytest.raises(InfeasibleError):
            oracle_joint(starved, 0.5)


class TestAllOrNothingOracle:
    def test_counts(self, slack_pair):
        report = oracle_all_or_nothing(slack_pair)
        assert report.candidates_enumerated == 4
        assert report.best.profit == pytest.approx(900.0)

    def test_capacity_one(self, slack_pair):
        inst = replace(slack_pair, agent_capacities=(1,), effort=[[1.0, 0.9]])
        report = oracle_all_or_nothing(inst)
        assert report.best.profit == pytest.approx(540.0)
        assert report.candidates_enumerated == 4

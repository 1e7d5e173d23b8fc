import math
from dataclasses import replace

import numpy as np
import pytest

from selective_newsvendor import (
    Assignment,
    Instance,
    NegativeDemandError,
    compute_demands,
    compute_metrics,
    min_required_selection,
    order_cap_for_selection,
    order_cap_global,
    pair_demand,
    profit_all_or_nothing,
    profit_price_linked,
    validate_instance,
)
from selective_newsvendor.model import detect_regime, profit_from_totals

from conftest import make_slack_pair


def single_pair_instance(effort=1.2, mean=10.0):
    return Instance(
        agent_capacities=(1,),
        customer_means=[mean],
        waiting_times=[100.0],
        effort=[[effort]],
        unit_prod_time=0.1,
        ship_time=3.0,
        prod_cost=70.0,
        salvage_price=50.0,
        shortage_cost=90.0,
        price_scale=1.0,
        base_price=100.0,
        service_level=0.0,
    )


class TestValidation:
    def test_benchmark_style_instance_is_valid(self, slack_pair):
        assert validate_instance(slack_pair) == []

    def test_salvage_at_or_above_cost_is_reported(self, slack_pair):
        bad = replace(slack_pair, salvage_price=80.0)
        assert any("salvage >= production cost" in v for v in validate_instance(bad))

    def test_service_level_out_of_range(self, slack_pair):
        bad = replace(slack_pair, service_level=1.2)
        assert any("service level out of [0,1]" in v for v in validate_instance(bad))

    def test_shortage_below_cost_is_reported(self, slack_pair):
        bad = replace(slack_pair, shortage_cost=60.0)
        assert any("shortage" in v for v in validate_instance(bad))

    def test_effort_shape_mismatch(self, slack_pair):
        bad = replace(slack_pair, effort=[[1.0]])
        assert any(v.startswith("effort") for v in validate_instance(bad))


class TestDemands:
    def test_direct_substitution(self):
        inst = single_pair_instance()
        dv = compute_demands(inst, Assignment.from_map({0: 0}), 105.0)
        assert dv.values[0] == 7.0
        assert dv.total == 7.0

    def test_unserved_customer_sells_nothing(self, slack_pair):
        dv = compute_demands(slack_pair, Assignment.from_map({1: 0}), 105.0)
        assert dv.values[0] == 0.0

    def test_both_served_at_mid_price(self, slack_pair):
        dv = compute_demands(slack_pair, Assignment.from_map({0: 0, 1: 0}), 92.5)
        assert dv.values.tolist() == [17.5, 27.5]
        assert dv.total == 45.0

    def test_price_at_base_gives_scaled_means_exactly(self, slack_pair):
        dv = compute_demands(slack_pair, Assignment.from_map({0: 0, 1: 0}), 100.0)
        assert dv.values.tolist() == [10.0, 20.0]

    def test_negative_demand_names_customer(self, slack_pair):
        with pytest.raises(NegativeDemandError) as err:
            compute_demands(slack_pair, Assignment.from_map({0: 0}), 150.0)
        assert err.value.customer == 0


class TestPairDemand:
    def test_direct(self):
        inst = single_pair_instance()
        assert pair_demand(inst, 0, 0, 105.0) == 7.0

    def test_at_base_price(self):
        inst = single_pair_instance()
        assert pair_demand(inst, 0, 0, 100.0) == 12.0

    def test_can_go_negative(self, slack_pair):
        assert pair_demand(slack_pair, 0, 0, 120.0) == -10.0


class TestPriceLinkedProfit:
    def test_salvage_case(self):
        inst = single_pair_instance()
        pb = profit_price_linked(inst, Assignment.from_map({0: 0}), 10.0, 105.0)
        assert pb.total == 7.0 * 105.0 - 700.0 + 50.0 * 3.0  # 185
        assert pb.shortage_penalty == 0.0

    def test_balanced_collapses_to_margin_times_demand(self, slack_pair):
        X = Assignment.from_map({0: 0, 1: 0})
        pb = profit_price_linked(slack_pair, X, 45.0, 92.5)
        assert pb.total == pytest.approx(22.5 * 45.0, abs=1e-9)
        assert pb.salvage_credit == 0.0 and pb.shortage_penalty == 0.0

    def test_shortage_case(self, tight_pair):
        X = Assignment.from_map({0: 0, 1: 0})
        pb = profit_price_linked(tight_pair, X, 10.0, 102.5)
        assert pb.total == pytest.approx(12.5 * 25.0 + 20.0 * 10.0, abs=1e-9)  # 512.5
        assert pb.salvage_credit == 0.0

    def test_identity_against_margin_form(self):
        # total == (R-c)*D - (s-c)*(D-Q)+ - (c-e)*(Q-D)+ on random inputs
        rng = np.random.default_rng(7)
        inst = make_slack_pair()
        for _ in range(300):
            d = float(rng.uniform(0.0, 60.0))
            q = float(rng.uniform(0.0, 60.0))
            price = float(rng.uniform(70.0, 120.0))
            pb = profit_from_totals(inst, d, q, price)
            margin = (price - inst.prod_cost) * d
            margin -= (inst.shortage_cost - inst.prod_cost) * max(d - q, 0.0)
            margin -= (inst.prod_cost - inst.salvage_price) * max(q - d, 0.0)
            assert pb.total == pytest.approx(margin, abs=1e-9)
            assert pb.total == pytest.approx(
                pb.revenue - pb.production_cost + pb.salvage_credit - pb.shortage_penalty,
                abs=1e-9,
            )
            assert pb.salvage_credit == 0.0 or pb.shortage_penalty == 0.0

    def test_quantity_maximizer_is_demand_capped(self, tight_pair):
        # slopes: s-c > 0 below the demand, e-c < 0 above it
        X = Assignment.from_map({0: 0, 1: 0})
        price = 102.5
        d = compute_demands(tight_pair, X, price).total
        best_q = min(d, order_cap_for_selection(tight_pair, X))
        best = profit_price_linked(tight_pair, X, best_q, price).total
        for q in np.linspace(0.0, best_q, 13):
            assert profit_price_linked(tight_pair, X, float(q), price).total <= best + 1e-9

    def test_price_quadratic_second_difference(self, tight_pair):
        # fixed selection, fixed shortage regime: f'' = -2 * price_scale * n
        X = Assignment.from_map({0: 0, 1: 0})
        q = 5.0  # well below demand at all sampled prices
        h = 0.25
        for price in (98.0, 102.5, 106.0):
            f = [
                profit_price_linked(tight_pair, X, q, price + k * h).total
                for k in (-1, 0, 1)
            ]
            second = f[0] - 2.0 * f[1] + f[2]
            assert second == pytest.approx(-2.0 * 1.0 * 2 * h * h, abs=1e-6)


class TestAllOrNothingProfit:
    def test_quantity_equals_sold(self):
        inst = replace(single_pair_instance(1.0, 18.0), agent_capacities=(1,))
        pb = profit_all_or_nothing(inst, Assignment.from_map({0: 0}), 18.0)
        assert pb.total == pytest.approx(30.0 * 18.0, abs=1e-9)  # 540

    def test_oversupply_is_salvaged(self):
        inst = single_pair_instance(1.0, 10.0)
        pb = profit_all_or_nothing(inst, Assignment.from_map({0: 0}), 12.0)
        assert pb.total == pytest.approx(260.0, abs=1e-9)
        assert pb.shortage_penalty == 0.0

    def test_shortage_is_rejected(self):
        inst = single_pair_instance(1.0, 20.0)
        with pytest.raises(ValueError):
            profit_all_or_nothing(inst, Assignment.from_map({0: 0}), 10.0)

    def test_nonpositive_quantity_is_rejected(self, slack_pair):
        with pytest.raises(ValueError):
            profit_all_or_nothing(slack_pair, Assignment.empty(), 0.0)


class TestOrderCaps:
    def test_global_cap_benchmark_values(self, slack_pair):
        w = slack_pair.waiting_times.copy()
        w[0] = 90.0
        assert order_cap_global(replace(slack_pair, waiting_times=w)) == pytest.approx(870.0)
        w[0] = 20.0
        assert order_cap_global(replace(slack_pair, waiting_times=w)) == pytest.approx(170.0)

    def test_global_cap_clamps_to_zero(self, slack_pair):
        w = slack_pair.waiting_times.copy()
        w[0] = 2.0
        assert order_cap_global(replace(slack_pair, waiting_times=w)) == 0.0

    def test_selection_cap_uses_served_only(self, slack_pair):
        inst = replace(slack_pair, unit_prod_time=1.0)
        both = Assignment.from_map({0: 0, 1: 0})
        assert order_cap_for_selection(inst, both) == pytest.approx(90.0)

    def test_single_customer_cap(self, tight_pair):
        assert order_cap_for_selection(tight_pair, Assignment.from_map({1: 0})) == pytest.approx(11.0)

    def test_empty_selection_is_unbounded(self, tight_pair):
        assert math.isinf(order_cap_for_selection(tight_pair, Assignment.empty()))


class TestMetrics:
    def test_full_service(self, slack_pair):
        X = Assignment.from_map({0: 0, 1: 0})
        dv = compute_demands(slack_pair, X, 92.5)
        m = compute_metrics(slack_pair, X, 45.0, dv)
        assert m.served_share == 1.0
        assert m.mean_fill_ratio == pytest.approx(1.5625)
        assert m.order_coverage == pytest.approx(1.5)

    def test_exact_fill(self, slack_pair):
        X = Assignment.from_map({0: 0, 1: 0})
        dv = compute_demands(slack_pair, X, 100.0)
        m = compute_metrics(slack_pair, X, 30.0, dv)
        assert m.mean_fill_ratio == pytest.approx(1.0)
        assert m.order_coverage == pytest.approx(1.0)

    def test_empty_selection_is_an_error(self, slack_pair):
        dv = compute_demands(slack_pair, Assignment.empty(), 100.0)
        with pytest.raises(ValueError):
            compute_metrics(slack_pair, Assignment.empty(), 0.0, dv)


class TestHelpers:
    @pytest.mark.parametrize(
        "n,level,expected",
        [(2, 0.5, 1), (2, 1.0, 2), (2, 0.0, 0), (50, 0.8, 40), (90, 0.8, 72), (10, 0.7, 7)],
    )
    def test_min_required_selection(self, n, level, expected):
        assert min_required_selection(n, level) == expected

    def test_regimes(self):
        assert detect_regime(10.0, 10.0) == "balanced"
        assert detect_regime(10.0, 10.0 + 5e-7) == "balanced"
        assert detect_regime(12.0, 10.0) == "shortage"
        assert detect_regime(10.0, 12.0) == "salvage"

    def test_assignment_check_flags_capacity(self, slack_pair):
        inst = replace(slack_pair, agent_capacities=(1,))
        bad = Assignment.from_map({0: 0, 1: 0})
        assert any("capacity" in p for p in bad.check(inst))

    def test_instances_are_immutable(self, slack_pair):
        with pytest.raises(Exception):
            slack_pair.customer_means[0] = 5.0

import csv
import math

import numpy as np
import pytest

from selective_newsvendor import (
    ExperimentConfig,
    SearchConfig,
    compare_search_methods,
    emit_csv,
    run_price_search,
    run_sweep,
    run_table_experiment,
)
from selective_newsvendor.experiments import TABLE_SCHEMA, TRACE_SCHEMA, _solution_cells


class TestTableExperiment:
    def test_small_grid_has_24_rows(self):
        result = run_table_experiment(ExperimentConfig(size_class="small", seed=7))
        assert len(result.rows) == 24
        assert result.errors == []
        assert [row["id"] for row in result.rows] == list(range(1, 25))
        assert {row["I"] for row in result.rows} == {4, 6, 8, 10}
        assert {row["J"] for row in result.rows} == {50, 60, 70, 80, 90, 100}

    def test_rows_are_internally_consistent(self):
        result = run_table_experiment(ExperimentConfig(size_class="small", seed=7))
        for row, sol in zip(result.rows, result.solutions):
            assert row["delta_QD"] == pytest.approx(row["Q_star"] - row["D"], abs=1e-6)
            assert row["M3"] >= 0.8 - 1e-9  # the service floor
            assert sol is not None and sol.profit == row["profit"]

    def test_service_is_full_when_the_quantity_cap_is_hard(self):
        cfg = ExperimentConfig(
            size_class="small", seed=7, search=SearchConfig(q_bound_mode="global")
        )
        result = run_table_experiment(cfg)
        assert all(abs(row["M3"] - 1.0) < 1e-12 for row in result.rows)

    def test_unknown_size_class(self):
        with pytest.raises(ValueError):
            run_table_experiment(ExperimentConfig(size_class="medium"))


class TestSweeps:
    def test_price_scale_sweep_row_count(self):
        result = run_sweep(
            ExperimentConfig(kind="sweep", seed=0, sweep_parameter="price_scale")
        )
        assert len(result.rows) == 14
        assert [row["price_scale"] for row in result.rows][:3] == ["0.1", "0.2", "0.3"]

    def test_base_price_sweep_row_count(self):
        result = run_sweep(
            ExperimentConfig(kind="sweep", seed=0, sweep_parameter="base_price")
        )
        assert len(result.rows) == 12
        assert result.rows[0]["base_price"] == "95"
        assert result.rows[-1]["base_price"] == "150"

    def test_value_override(self):
        result = run_sweep(
            ExperimentConfig(
                kind="sweep",
                seed=0,
                sweep_parameter="service_level",
                sweep_values=(0.0, 0.5, 1.0),
            )
        )
        assert len(result.rows) == 3

    def test_capacity_and_waiting_sweeps_drop_the_service_floor(self):
        for param in ("agent_capacity", "waiting_time"):
            result = run_sweep(
                ExperimentConfig(kind="sweep", seed=0, sweep_parameter=param)
            )
            assert len(result.rows) == 4
            # served share may fall well below the default 0.8 floor
            shares = [row["M3"] for row in result.rows if not math.isnan(row["M3"])]
            assert shares, "all rows failed"

    def test_scalar_sweep_rows_share_all_other_draws(self):
        result = run_sweep(
            ExperimentConfig(
                kind="sweep",
                seed=5,
                sweep_parameter="prod_cost",
                sweep_values=(60.0, 70.0),
            )
        )
        a, b = result.solutions
        assert a is not None and b is not None
        assert a.price_upper_bound == b.price_upper_bound

    def test_mean_range_sweep_keeps_other_fields(self):
        result = run_sweep(
            ExperimentConfig(kind="sweep", seed=3, sweep_parameter="market_size")
        )
        assert [row["market_size"] for row in result.rows] == [
            "U[8,12]", "U[10,20]", "U[15,25]", "U[30,50]",
        ]

    def test_unknown_parameter_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(kind="sweep", sweep_parameter="gravity")

    def test_empty_values_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(kind="sweep", sweep_parameter="base_price", sweep_values=())


class TestCompare:
    def test_tight_pair_methods_agree(self, tight_pair):
        result = compare_search_methods(tight_pair, SearchConfig())
        assert result.summary["r_search"]["profit"] == pytest.approx(512.5, abs=1e-9)
        assert result.summary["sequential"]["profit"] == pytest.approx(512.5, abs=1e-9)
        n_fast = result.summary["r_search"]["subproblems"]
        n_grid = result.summary["sequential"]["subproblems"]
        assert n_fast < n_grid
        assert result.summary["reduction_ratio"] == pytest.approx(1.0 - n_fast / n_grid)

    def test_trace_rows_carry_both_methods(self, tight_pair):
        result = compare_search_methods(tight_pair, SearchConfig())
        methods = {row["method"] for row in result.trace_rows}
        assert methods == {"r_search", "sequential"}
        for row in result.trace_rows:
            assert set(row) == set(TRACE_SCHEMA)


class TestCsv:
    def test_header_matches_the_table_schema(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_csv([], TABLE_SCHEMA, path)
        assert path.read_text().strip() == ",".join(TABLE_SCHEMA)

    def test_fixture_row_formatting(self, tmp_path, slack_pair):
        sol = run_price_search(slack_pair)
        row = {"id": 1, "I": 1, "J": 2}
        row.update(_solution_cells(sol, 0.0))
        path = tmp_path / "one.csv"
        emit_csv([row], TABLE_SCHEMA, path)
        header, line = path.read_text().splitlines()
        cells = dict(zip(header.split(","), line.split(",")))
        assert cells["profit"] == "1012.5"
        assert cells["R_star"] == "92.5"
        assert cells["Q_star"] == "45"
        assert cells["R_ub"] == "120"
        assert cells["D"] == "45"
        assert cells["delta_QD"] == "0"
        assert cells["M1"] == "1.5625"
        assert cells["M2"] == "1.5"
        assert cells["M3"] == "1"

    def test_six_significant_digits(self, tmp_path):
        path = tmp_path / "digits.csv"
        emit_csv(
            [{"a": 1234.56789, "b": 0.000123456789, "c": float("nan")}],
            ("a", "b", "c"),
            path,
        )
        assert path.read_text().splitlines()[1] == "1234.57,0.000123457,nan"

    def test_missing_columns_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_csv([{"a": 1}], ("a", "b"), tmp_path / "x.csv")

    def test_byte_stable(self, tmp_path):
        rows = [{"a": 1.5, "b": "text"}, {"a": float("nan"), "b": "u,v"}]
        p1, p2 = tmp_path / "1.csv", tmp_path / "2.csv"
        emit_csv(rows, ("a", "b"), p1)
        emit_csv(rows, ("a", "b"), p2)
        assert p1.read_bytes() == p2.read_bytes()
        # RFC-style quoting for the embedded comma
        assert '"u,v"' in p2.read_text()

import pytest

from railassist.bench import (
    RR_SCALING_CSV_COLUMNS,
    TRADEOFF_CSV_COLUMNS,
    run_rr_scaling,
    run_tradeoff,
    write_rr_scaling_csv,
    write_tradeoff_csv,
)


@pytest.fixture(scope="module")
def tiny_tradeoff():
    return run_tradeoff([1, 8], repetitions=3, seed=2, n_stations=8, n_days=60)


class TestTradeoff:
    def test_single_count_single_row(self):
        rows = run_tradeoff([1], repetitions=3, seed=1, n_stations=6, n_days=60)
        assert len(rows) == 1
        assert rows[0].n_trees == 1
        assert rows[0].predict_ms_per_journey > 0
        assert rows[0].fit_s > 0

    def test_unsorted_counts_rejected(self):
        with pytest.raises(ValueError):
            run_tradeoff([10, 5], repetitions=3)

    def test_rmse_deterministic_across_runs(self, tiny_tradeoff):
        again = run_tradeoff([1, 8], repetitions=3, seed=2, n_stations=8, n_days=60)
        assert [r.rmse for r in again] == [r.rmse for r in tiny_tradeoff]

    def test_averaging_helps_on_this_seed(self, tiny_tradeoff):
        assert tiny_tradeoff[-1].rmse <= tiny_tradeoff[0].rmse

    def test_csv_columns(self, tiny_tradeoff, tmp_path):
        path = tmp_path / "t.csv"
        write_tradeoff_csv(tiny_tradeoff, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == ",".join(TRADEOFF_CSV_COLUMNS)
        assert len(lines) == 3


class TestRrScaling:
    def test_single_count(self):
        rows = run_rr_scaling([6], repetitions=3, seed=1, n_days=40)
        assert len(rows) == 1
        row = rows[0]
        assert row.n_stations == 6
        assert row.rr_predict_ms > 0
        assert row.rr_predict_ms_doubled_data > 0
        assert row.forest_predict_ms > 0

    def test_csv_columns(self, tmp_path):
        rows = run_rr_scaling([6], repetitions=3, seed=1, n_days=40)
        path = tmp_path / "rr.csv"
        write_rr_scaling_csv(rows, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == ",".join(RR_SCALING_CSV_COLUMNS)

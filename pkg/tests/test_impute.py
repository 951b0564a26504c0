import math

import numpy as np
import pytest

from behaviorbench import datamodel as dm
from behaviorbench.errors import InsufficientNeighbors, InvalidK
from behaviorbench.impute import (DEFAULT_K, fill_within_session,
                                  impute_records, knn_impute)

from conftest import make_record


def brute_force_knn(values, k):
    """Independent reference: literal loops, exhaustive distance sort."""
    values = np.asarray(values, dtype=float)
    n, p = values.shape
    mean = np.zeros(p)
    std = np.ones(p)
    for j in range(p):
        col = [values[i, j] for i in range(n) if not math.isnan(values[i, j])]
        if col:
            mean[j] = sum(col) / len(col)
            var = sum((v - mean[j]) ** 2 for v in col) / len(col)
            std[j] = math.sqrt(var) if var > 0 else 1.0

    def distance(i, r):
        shared = [j for j in range(p)
                  if not math.isnan(values[i, j]) and not math.isnan(values[r, j])]
        if not shared:
            return math.inf
        s = sum(((values[i, j] - mean[j]) / std[j]
                 - (values[r, j] - mean[j]) / std[j]) ** 2 for j in shared)
        return math.sqrt(s * p / len(shared))

    filled = values.copy()
    for j in range(p):
        donors = [r for r in range(n) if not math.isnan(values[r, j])]
        for i in range(n):
            if math.isnan(values[i, j]):
                ranked = sorted(donors, key=lambda r: (distance(i, r), r))
                chosen = ranked[:k]
                filled[i, j] = sum(values[r, j] for r in chosen) / len(chosen)
    return filled


class TestKnnImpute:
    def test_mean_of_constant_neighbors(self):
        values = np.full((20, 2), 5.0)
        values[:, 1] = np.arange(20)
        values[3, 0] = np.nan
        filled, _ = knn_impute(values, k=14)
        assert filled[3, 0] == 5.0

    def test_k2_mean_oracle(self):
        # one spatial column; nearest two donors hold 10 and 20
        values = np.array([
            [0.0, np.nan],
            [0.1, 10.0],
            [0.2, 20.0],
            [5.0, 100.0],
            [6.0, 110.0],
        ])
        filled, _ = knn_impute(values, k=2)
        assert filled[0, 1] == pytest.approx(15.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(30, 120))
        p = int(rng.integers(3, 8))
        values = rng.normal(0, 3, (n, p))
        mask = rng.random((n, p)) < 0.1
        for j in range(p):               # keep >= k donors per column
            obs = np.where(~mask[:, j])[0]
            if obs.size < DEFAULT_K + 1:
                mask[:, j] = False
        values[mask] = np.nan
        filled, report = knn_impute(values, k=DEFAULT_K)
        expected = brute_force_knn(values, DEFAULT_K)
        assert np.allclose(filled, expected, atol=1e-9, rtol=0)
        assert not np.isnan(filled).any()
        for fill in report.per_column.values():
            assert fill.missing_before == fill.filled_by_knn

    def test_observed_cells_never_modified(self):
        rng = np.random.default_rng(2)
        values = rng.normal(size=(40, 4))
        values[5, 2] = np.nan
        filled, _ = knn_impute(values, k=5)
        observed = ~np.isnan(values)
        assert np.array_equal(filled[observed], values[observed])

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        values = rng.normal(size=(50, 4))
        values[rng.random((50, 4)) < 0.15] = np.nan
        a, _ = knn_impute(values.copy(), k=14)
        b, _ = knn_impute(values.copy(), k=14)
        assert np.array_equal(a, b)

    def test_insufficient_neighbors(self):
        values = np.ones((5, 2))
        values[0, 1] = np.nan
        with pytest.raises(InsufficientNeighbors):
            knn_impute(values, k=14)

    def test_invalid_k(self):
        with pytest.raises(InvalidK):
            knn_impute(np.ones((3, 2)), k=0)
        with pytest.raises(InvalidK):
            knn_impute(np.ones((3, 2)), k=-2)


class TestSessionFill:
    def test_earlier_tie_break(self):
        # RSSI [-60, missing, -62] at t = 1, 2, 3 minutes -> middle gets -60
        records = [
            make_record(0, session="s", minute=1, rssi=-60),
            make_record(1, session="s", minute=2, beacon=False),
            make_record(2, session="s", minute=3, rssi=-62),
        ]
        filled, counts = fill_within_session(records)
        assert filled[1].env.beacon.rssi == -60
        assert counts["beacon_rssi"] == 1

    def test_constant_column_fill(self):
        records = [
            make_record(0, session="s", minute=0, rssi=-64),
            make_record(1, session="s", minute=5, beacon=False),
            make_record(2, session="s", minute=9, rssi=-64),
        ]
        filled, _ = fill_within_session(records)
        assert filled[1].env.beacon.rssi == -64

    def test_entire_column_missing_untouched(self):
        records = [make_record(i, session="s", minute=i, beacon=False)
                   for i in range(3)]
        filled, counts = fill_within_session(records)
        assert all(r.env.beacon is None for r in filled)
        assert counts["beacon_rssi"] == 0

    def test_nearest_in_time_wins(self):
        records = [
            make_record(0, session="s", minute=0, rssi=-90),
            make_record(1, session="s", minute=8, beacon=False),
            make_record(2, session="s", minute=9, rssi=-50),
        ]
        filled, _ = fill_within_session(records)
        assert filled[1].env.beacon.rssi == -50

    def test_fill_does_not_cross_sessions(self):
        records = [
            make_record(0, session="s1", minute=0, rssi=-42),
            make_record(1, session="s2", minute=1, beacon=False),
        ]
        filled, _ = fill_within_session(records)
        assert filled[1].env.beacon is None

    def test_fills_never_cascade(self):
        # the donor search uses original observations only
        records = [
            make_record(0, session="s", minute=0, beacon=False),
            make_record(1, session="s", minute=1, beacon=False),
            make_record(2, session="s", minute=9, rssi=-55),
        ]
        filled, _ = fill_within_session(records)
        assert filled[0].env.beacon.rssi == -55
        assert filled[1].env.beacon.rssi == -55


class TestRecordPipeline:
    def _records_with_gaps(self, n=60):
        rng = np.random.default_rng(8)
        records = []
        for i in range(n):
            records.append(make_record(
                i, session=f"s{i % 12}", child=(i % 10) + 1,
                minute=i % 60, month=int(rng.choice([1, 4, 7, 10])),
                rssi=int(rng.integers(-90, -40)),
                beacon=bool(rng.random() > 0.2),
                weather=bool(rng.random() > 0.15),
                class7=dm.CLASS7[i % 7]))
        return records

    def test_complete_after_impute(self):
        records = self._records_with_gaps()
        imputed, report = impute_records(records, k=5)
        assert all(dm.record_is_complete(r) for r in imputed)
        for name, fill in report.per_column.items():
            assert fill.missing_before == fill.filled_by_session + fill.filled_by_knn

    def test_observed_record_values_unchanged(self):
        records = self._records_with_gaps()
        imputed, _ = impute_records(records, k=5)
        for before, after in zip(records, imputed):
            if before.env.beacon is not None:
                assert after.env.beacon.rssi == before.env.beacon.rssi
            if before.env.weather is not None:
                assert after.env.weather.humidity == before.env.weather.humidity

    def test_categorical_imputes_to_observed_category(self):
        records = self._records_with_gaps()
        observed_names = {r.env.beacon.name for r in records if r.env.beacon}
        imputed, _ = impute_records(records, k=5)
        assert all(r.env.beacon.name in observed_names for r in imputed)

    def test_no_records_is_noop(self):
        out, report = impute_records([])
        assert out == [] and report.per_column == {}

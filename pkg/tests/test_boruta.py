import numpy as np
import pytest
from scipy import stats as sps

from behaviorbench.boruta import (BorutaConfig, BorutaReport, FeatureDecision,
                                  apply_selection, binomial_two_sided,
                                  boruta_select)
from behaviorbench.datamodel import FeatureMatrix
from behaviorbench.errors import EmptySelection, InvalidLabels

FAST_FOREST = {"n_trees": 25, "max_depth": 6}


def planted_matrix(seed, n=292, informative=5, noise=30, strength=0.5):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    cols = [y + rng.normal(0, strength, n) for _ in range(informative)]
    X = np.column_stack(cols + [rng.normal(0, 1, n) for _ in range(noise)])
    names = tuple([f"inf{i}" for i in range(informative)]
                  + [f"noise{i}" for i in range(noise)])
    return FeatureMatrix(names, X, y.astype(np.int64), 2)


def all_noise_matrix(seed, n=292, p=35):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    X = rng.normal(0, 1, (n, p))
    return FeatureMatrix(tuple(f"n{i}" for i in range(p)), X,
                         y.astype(np.int64), 2)


class TestBinomialTest:
    def test_matches_scipy_binomtest(self):
        for runs in (1, 5, 8, 13, 40, 100):
            for hits in range(0, runs + 1, max(1, runs // 7)):
                ours = binomial_two_sided(hits, runs)
                ref = sps.binomtest(hits, runs, 0.5).pvalue
                assert ours == pytest.approx(ref, abs=1e-12)

    def test_center_never_significant(self):
        assert binomial_two_sided(5, 10) == 1.0

    def test_earliest_decisive_run_count(self):
        # scipy CDF oracle: first r where an always-hitting feature clears
        # alpha = 0.01 two-sided
        alpha = 0.01
        earliest = None
        for r in range(1, 30):
            if sps.binomtest(r, r, 0.5).pvalue < alpha:
                earliest = r
                break
        assert earliest == 8   # 2 * 0.5^7 = 0.015625 >= alpha; 0.5^7 = 0.0078 < alpha
        assert binomial_two_sided(earliest, earliest) < alpha
        assert binomial_two_sided(earliest - 1, earliest - 1) >= alpha


def earliest_confirm_run(alpha, n_features):
    """Oracle: first run where an always-hitting feature can be Confirmed
    under the Bonferroni-adjusted two-sided test."""
    threshold = alpha / n_features
    for r in range(1, 200):
        if sps.binomtest(r, r, 0.5).pvalue < threshold:
            return r
    raise AssertionError("no decisive run count found")


class TestSelection:
    def test_planted_signal_confirmed(self):
        confirmed_runs = 0
        for seed in range(5):
            m = planted_matrix(seed)
            report = boruta_select(m, BorutaConfig(seed=seed, forest=FAST_FOREST))
            conf = set(report.names_with("Confirmed"))
            if sum(1 for c in conf if c.startswith("inf")) >= 4:
                confirmed_runs += 1
            # noise must never dominate the confirmed set
            assert sum(1 for c in conf if c.startswith("noise")) <= 1
        assert confirmed_runs >= 4

    def test_all_noise_confirms_nothing(self):
        for seed in range(5):
            report = boruta_select(all_noise_matrix(seed),
                                   BorutaConfig(seed=seed, forest=FAST_FOREST))
            assert report.names_with("Confirmed") == ()

    def test_always_hitting_feature_confirmed_at_earliest_run(self):
        # a feature that is the label plus tiny noise wins every run; it must
        # be Confirmed exactly when the adjusted binomial test first allows it
        m = planted_matrix(3, informative=1, noise=10, strength=0.05)
        report = boruta_select(m, BorutaConfig(seed=1, forest=FAST_FOREST))
        decision = report.decisions[0]
        expected = earliest_confirm_run(0.01, 11)
        assert decision.decision == "Confirmed"
        assert decision.runs_participated == expected
        assert decision.hit_count == expected

    def test_shadows_never_in_report(self):
        m = planted_matrix(4, informative=2, noise=6)
        report = boruta_select(m, BorutaConfig(seed=2, forest=FAST_FOREST))
        assert tuple(d.name for d in report.decisions) == m.column_names

    def test_rejected_leave_subsequent_runs(self):
        # once rejected, a feature's participation counter freezes
        m = planted_matrix(5)
        report = boruta_select(m, BorutaConfig(seed=3, forest=FAST_FOREST))
        rejected = [d for d in report.decisions if d.decision == "Rejected"]
        assert rejected
        for d in rejected:
            assert d.runs_participated < report.n_runs or report.n_runs <= 8

    def test_reproducible_given_seed(self):
        m = planted_matrix(6)
        cfg = BorutaConfig(seed=11, forest=FAST_FOREST)
        r1 = boruta_select(m, cfg)
        r2 = boruta_select(m, cfg)
        assert r1 == r2

    def test_hits_bounded_by_runs(self):
        m = planted_matrix(7)
        report = boruta_select(m, BorutaConfig(seed=4, forest=FAST_FOREST))
        for d in report.decisions:
            assert 0 <= d.hit_count <= d.runs_participated

    def test_trace_length_is_run_count(self):
        m = planted_matrix(8)
        report = boruta_select(m, BorutaConfig(seed=5, forest=FAST_FOREST))
        assert len(report.max_shadow_trace) == report.n_runs
        assert report.n_runs <= 100

    def test_duplicated_confirmed_feature_not_rejected(self):
        # duplicating a Confirmed column may split importance but must not
        # flip the original to Rejected
        m = planted_matrix(9, informative=2, noise=10, strength=0.3)
        base = boruta_select(m, BorutaConfig(seed=6, forest=FAST_FOREST))
        confirmed = base.names_with("Confirmed")
        assert "inf0" in confirmed
        X = np.column_stack([m.values, m.values[:, 0]])
        dup = FeatureMatrix(m.column_names + ("inf0_copy",), X,
                            m.labels.copy(), 2)
        report = boruta_select(dup, BorutaConfig(seed=6, forest=FAST_FOREST))
        decision = {d.name: d.decision for d in report.decisions}
        assert decision["inf0"] in ("Confirmed", "Tentative")

    def test_constant_labels_rejected(self):
        m = planted_matrix(10)
        bad = FeatureMatrix(m.column_names, m.values.copy(),
                            np.zeros(m.n_rows, dtype=np.int64), 2)
        with pytest.raises(InvalidLabels):
            boruta_select(bad, BorutaConfig(seed=0))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            BorutaConfig(alpha=0.0)
        with pytest.raises(ValueError):
            BorutaConfig(max_runs=0)
        with pytest.raises(ValueError):
            BorutaConfig(forest={"bogus": 1})


class TestApplySelection:
    def _report(self, names, decisions):
        return BorutaReport(
            decisions=tuple(FeatureDecision(n, d, 0, 0)
                            for n, d in zip(names, decisions)),
            max_shadow_trace=(), n_runs=0, alpha=0.01, seed=0)

    def _matrix(self, names):
        rng = np.random.default_rng(0)
        return FeatureMatrix(tuple(names), rng.normal(size=(10, len(names))),
                             np.array([0, 1] * 5), 2)

    def test_all_confirmed_is_identity(self):
        m = self._matrix(["a", "b", "c"])
        report = self._report(["a", "b", "c"], ["Confirmed"] * 3)
        out = apply_selection(m, report)
        assert out.column_names == m.column_names
        assert np.array_equal(out.values, m.values)

    def test_drop_tentative_and_rejected(self):
        m = self._matrix(["a", "b", "c", "d"])
        report = self._report(["a", "b", "c", "d"],
                              ["Confirmed", "Tentative", "Rejected", "Confirmed"])
        out = apply_selection(m, report, keep_tentative=False)
        assert out.column_names == ("a", "d")
        kept = apply_selection(m, report, keep_tentative=True)
        assert kept.column_names == ("a", "b", "d")

    def test_order_preserved(self):
        m = self._matrix(["z", "m", "a"])
        report = self._report(["z", "m", "a"], ["Confirmed"] * 3)
        assert apply_selection(m, report).column_names == ("z", "m", "a")

    def test_empty_selection_rejected(self):
        m = self._matrix(["a", "b"])
        report = self._report(["a", "b"], ["Rejected", "Tentative"])
        with pytest.raises(EmptySelection):
            apply_selection(m, report, keep_tentative=False)

    def test_mismatched_report_rejected(self):
        m = self._matrix(["a", "b"])
        report = self._report(["x", "y"], ["Confirmed", "Confirmed"])
        with pytest.raises(ValueError):
            apply_selection(m, report)

    def test_labels_unchanged(self):
        m = self._matrix(["a", "b", "c"])
        report = self._report(["a", "b", "c"],
                              ["Rejected", "Confirmed", "Rejected"])
        out = apply_selection(m, report)
        assert np.array_equal(out.labels, m.labels)

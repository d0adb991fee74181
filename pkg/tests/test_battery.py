import math

import numpy as np
import pytest

from rtdrng.nist.battery import (
    TABLE_TITLE,
    analyze_suite,
    pass_threshold,
    render_table,
    report_records,
    run_battery,
)
from rtdrng.nist.special import igamc
from rtdrng.nist.statistical_tests import TestId, TestParams, TestResult


def synth(test, pvalues, applicable=True):
    labels = tuple("" for _ in pvalues) if applicable else tuple("" for _ in pvalues)
    return TestResult(test, tuple(pvalues), labels, applicable=applicable)


class TestPassThreshold:
    def test_paper_quoted_values(self):
        assert pass_threshold(30, 0.05) == 24
        assert pass_threshold(14, 0.05) == 10

    def test_degenerate_sample(self):
        assert pass_threshold(1, 0.05) == 0

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            pass_threshold(0, 0.05)

    def test_monotone_in_sample_size(self):
        values = [pass_threshold(n, 0.05) for n in range(1, 200)]
        assert all(b >= a for a, b in zip(values, values[1:]))


class TestAnalyze:
    def test_single_bin_at_half(self):
        results = [[synth(TestId.Frequency, (0.5,))] for _ in range(30)]
        report = analyze_suite(results, alpha=0.05)
        row = report.rows[0]
        assert row.counts[5] == 30
        assert sum(row.counts) == 30
        assert row.proportion == "30/30"
        assert row.meets_threshold

    def test_uniform_bin_centers_give_unit_uniformity(self):
        pvals = [(i + 0.5) / 10 for i in range(10) for _ in range(3)]
        results = [[synth(TestId.Frequency, (p,))] for p in pvals]
        report = analyze_suite(results, alpha=0.05)
        assert report.rows[0].uniformity_p == pytest.approx(igamc(4.5, 0.0))
        assert report.rows[0].uniformity_p == 1.0

    def test_proportion_accounting(self):
        pvals = [0.5] * 28 + [0.01] * 2
        results = [[synth(TestId.Frequency, (p,))] for p in pvals]
        report = analyze_suite(results, alpha=0.05)
        assert report.rows[0].proportion == "28/30"
        assert report.rows[0].meets_threshold  # 28 >= 24

    def test_threshold_violation_detected(self):
        pvals = [0.5] * 20 + [0.001] * 10
        results = [[synth(TestId.Frequency, (p,))] for p in pvals]
        report = analyze_suite(results, alpha=0.05)
        assert not report.rows[0].meets_threshold
        assert not report.overall_pass

    def test_inapplicable_sequences_excluded(self):
        rows = []
        for k in range(30):
            applicable = k < 14
            pv = (0.4,) if applicable else (math.nan,)
            rows.append([TestResult(TestId.RandomExcursions, pv, ("x=+1",), applicable)])
        report = analyze_suite(rows, alpha=0.05)
        row = report.rows[0]
        assert row.applicable == 14
        assert row.threshold == pass_threshold(14, 0.05) == 10
        assert row.proportion == "14/14"

    def test_all_inapplicable_row_is_vacuous(self):
        rows = [
            [TestResult(TestId.RandomExcursions, (math.nan,), ("x=+1",), False)]
            for _ in range(5)
        ]
        report = analyze_suite(rows, alpha=0.05)
        row = report.rows[0]
        assert row.applicable == 0
        assert row.proportion == "0/0"
        assert row.meets_threshold
        assert math.isnan(row.uniformity_p)

    def test_pvalue_of_one_lands_in_top_bin(self):
        results = [[synth(TestId.Frequency, (1.0,))] for _ in range(3)]
        report = analyze_suite(results, alpha=0.05)
        assert report.rows[0].counts[9] == 3

    def test_multi_statistic_tests_expand_to_rows(self):
        results = [
            [synth(TestId.CumulativeSums, (0.3, 0.7))]
            for _ in range(4)
        ]
        report = analyze_suite(results, alpha=0.05)
        assert len(report.rows) == 2


class TestRendering:
    def make_report(self):
        results = [[synth(TestId.Frequency, (0.5,)), synth(TestId.Serial, (0.2, 0.9))] for _ in range(5)]
        return analyze_suite(results, alpha=0.05)

    def test_table_layout(self):
        text = render_table(self.make_report())
        lines = text.strip().split("\n")
        assert lines[0] == TABLE_TITLE
        header = lines[1].split("\t")
        assert header[:10] == [f"C{i}" for i in range(1, 11)]
        assert header[10:] == ["P-VALUE", "PROPORTION", "STATISTICAL TEST"]
        first = lines[2].split("\t")
        assert len(first) == 13
        assert first[-1] == "Frequency"
        assert first[-2] == "5/5"

    def test_json_records(self):
        records = report_records(self.make_report())
        assert records["sequences"] == 5
        assert len(records["rows"]) == 3
        assert all(set(r) >= {"test", "counts", "passed", "threshold"} for r in records["rows"])


class TestFullBattery:
    def test_battery_row_structure(self):
        rng = np.random.default_rng(100)
        params = TestParams(n=550_000)
        sequences = [
            (rng.random(550_000) < 0.5).astype(np.uint8) for _ in range(8)
        ]
        results = [run_battery(seq, params) for seq in sequences]
        report = analyze_suite(results, alpha=params.alpha)
        by_test = {}
        for row in report.rows:
            by_test[row.test] = by_test.get(row.test, 0) + 1
        assert by_test[TestId.Frequency] == 1
        assert by_test[TestId.CumulativeSums] == 2
        assert by_test[TestId.NonOverlappingTemplate] == 148
        assert by_test[TestId.RandomExcursions] == 8
        assert by_test[TestId.RandomExcursionsVariant] == 18
        assert by_test[TestId.Serial] == 2
        assert len(report.rows) == 188
        # a good generator passes at this scale
        assert report.overall_pass

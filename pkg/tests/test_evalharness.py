from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from softprop.errors import (InsufficientRuns, InvalidInput, SchemaMismatch)
from softprop.evalharness import (EventOption, EventTask, Prediction,
                                  aggregate, apply_threshold, brier,
                                  calibrate_threshold, load_events,
                                  load_predictions, score_batch, score_event,
                                  stability, threshold_accuracy)


def task(values: dict[str, float], task_id="T1") -> EventTask:
    return EventTask(id=task_id, description="d", current_date="2024-06-01",
                     options=[EventOption(id=k, statement=f"option {k}",
                                          dollar_value=v)
                              for k, v in values.items()])


def pred(p: dict[str, float], task_id="T1") -> Prediction:
    return Prediction(task_id=task_id, p_true=p)


class TestScoreEvent:
    def test_correct_pick(self):
        row = score_event(task({"A": 2.0, "B": 1.0}), pred({"A": 0.6, "B": 0.4}))
        assert row.accuracy == 1.0
        assert row.hard == 1.0
        assert row.soft == pytest.approx(0.6)
        assert not row.tie_flag

    def test_uniform_probabilities_tie_break_by_order(self):
        row = score_event(task({"A": 1.0, "B": 2.0}), pred({"A": 0.5, "B": 0.5}))
        assert row.tie_flag
        assert row.chosen_option == "A"
        assert row.accuracy == 0.0
        assert row.hard == 0.0
        assert row.soft == pytest.approx(0.5)

    def test_indistinguishable_values_rejected_at_ingestion(self):
        with pytest.raises(InvalidInput):
            task({"A": 1.0, "B": 1.0})

    def test_coverage_mismatch(self):
        with pytest.raises(SchemaMismatch):
            score_event(task({"A": 1.0, "B": 2.0}), pred({"A": 0.5}))

    def test_scale_invariance_of_value_metrics(self):
        p = {"A": 0.7, "B": 0.2, "C": 0.1}
        base = score_event(task({"A": 3.0, "B": 1.0, "C": 2.0}), pred(p))
        scaled = score_event(task({"A": 31.0, "B": 11.0, "C": 21.0}), pred(p))
        assert scaled.accuracy == base.accuracy
        assert scaled.hard == pytest.approx(base.hard)
        assert scaled.soft == pytest.approx(base.soft)

    def test_probability_scale_invariance_of_accuracy(self):
        t = task({"A": 3.0, "B": 1.0})
        a = score_event(t, pred({"A": 0.6, "B": 0.3}))
        b = score_event(t, pred({"A": 0.2, "B": 0.1}))
        assert a.accuracy == b.accuracy == 1.0


class TestBrier:
    def test_uniform_two_options(self):
        value = brier(task({"A": 2.0, "B": 1.0}), pred({"A": 0.5, "B": 0.5}))
        assert value == pytest.approx(0.25)

    def test_perfect_prediction(self):
        assert brier(task({"A": 2.0, "B": 1.0}),
                     pred({"A": 1.0, "B": 0.0})) == pytest.approx(0.0)

    def test_perfectly_wrong(self):
        assert brier(task({"A": 2.0, "B": 1.0}),
                     pred({"A": 0.0, "B": 1.0})) == pytest.approx(1.0)

    def test_all_zero_prediction_treated_uniform(self):
        row = score_event(task({"A": 2.0, "B": 1.0}), pred({"A": 0.0, "B": 0.0}))
        assert row.degenerate_prediction
        assert row.brier == pytest.approx(0.25)

    def test_co_best_split(self):
        t = task({"A": 2.0, "B": 2.0, "C": 1.0})
        value = brier(t, pred({"A": 0.5, "B": 0.5, "C": 0.0}))
        assert value == pytest.approx(0.0)

    @given(st.lists(st.floats(min_value=0, max_value=1),
                    min_size=3, max_size=3))
    def test_bounds(self, probs):
        p = dict(zip(["A", "B", "C"], probs))
        t = task({"A": 3.0, "B": 1.0, "C": 2.0})
        assert 0.0 <= brier(t, pred(p)) <= 1.0


class TestAggregate:
    def test_single_row_identity(self):
        row = score_event(task({"A": 2.0, "B": 1.0}), pred({"A": 0.6, "B": 0.4}))
        report = aggregate([row])
        assert report.accuracy == row.accuracy
        assert report.brier == row.brier

    def test_mean_of_two(self):
        r1 = score_event(task({"A": 2.0, "B": 1.0}), pred({"A": 0.6, "B": 0.4}))
        r2 = score_event(task({"A": 1.0, "B": 2.0}, "T2"),
                         pred({"A": 0.6, "B": 0.4}, "T2"))
        report = aggregate([r1, r2])
        assert report.accuracy == pytest.approx(0.5)

    def test_report_column_set(self):
        row = score_event(task({"A": 2.0, "B": 1.0}), pred({"A": 0.6, "B": 0.4}))
        doc = aggregate([row]).to_doc()
        assert {"accuracy", "soft", "hard", "brier",
                "confidence", "variance"} <= set(doc)

    def test_formatted_two_decimals(self):
        row = score_event(task({"A": 2.0, "B": 1.0}), pred({"A": 0.6, "B": 0.4}))
        formatted = aggregate([row]).formatted()
        assert formatted["accuracy"] == "100.00"


class TestStability:
    def rows(self, hards, task_id="T1"):
        return [
            score_event(task({"A": 2.0, "B": 1.0}, task_id),
                        pred({"A": 0.8, "B": 0.2} if h else {"A": 0.2, "B": 0.8},
                             task_id))
            for h in hards]

    def test_identical_runs_zero_variance(self):
        confidence, variance = stability({"T1": self.rows([1, 1, 1])})
        assert variance == 0.0
        assert confidence == pytest.approx(0.8)

    def test_half_split_variance(self):
        _, variance = stability({"T1": self.rows([1, 0])})
        assert variance == pytest.approx(0.25)

    def test_requires_two_runs(self):
        with pytest.raises(InsufficientRuns):
            stability({"T1": self.rows([1])})

    def test_confidence_is_raw_max(self):
        rows = self.rows([1, 1])
        assert all(r.confidence == 0.8 for r in rows)


class TestThreshold:
    def test_apply_strict(self):
        assert apply_threshold(0.7, 0.5)
        assert not apply_threshold(0.5, 0.5)
        assert apply_threshold(0.51, 0.5)

    def test_constant_true_labels_smallest_delta(self):
        pairs = [(0.6, True)] * 5
        assert calibrate_threshold(pairs) == 0.0

    def test_separable_midpoint(self):
        pairs = [(0.2, False), (0.8, True)]
        delta = calibrate_threshold(pairs)
        assert delta == pytest.approx(0.5)
        assert threshold_accuracy(pairs, delta) == 1.0

    @given(st.lists(st.tuples(st.floats(min_value=0.01, max_value=1),
                              st.booleans()), min_size=1, max_size=30))
    def test_at_least_majority_class(self, pairs):
        # p stays strictly positive: under the strict p > delta rule a
        # prediction of exactly 0 can never be labeled True, which is the
        # one case where the constant-classifier bound does not apply.
        delta = calibrate_threshold(pairs)
        accuracy = threshold_accuracy(pairs, delta)
        majority = max(sum(1 for _, y in pairs if y),
                       sum(1 for _, y in pairs if not y)) / len(pairs)
        assert accuracy >= majority - 1e-12


class TestIngestion:
    def test_load_events_skips_malformed(self):
        lines = [
            json.dumps({"id": "T1", "description": "d", "current_date": "2024-06-01",
                        "options": [{"id": "A", "statement": "a", "dollar_value": 2.0},
                                    {"id": "B", "statement": "b", "dollar_value": 1.0}]}),
            "{not json",
            json.dumps({"id": "T2", "options": [
                {"id": "A", "statement": "a", "dollar_value": 1.0},
                {"id": "B", "statement": "b", "dollar_value": 1.0}]}),
        ]
        tasks, issues = load_events(lines)
        assert [t.id for t in tasks] == ["T1"]
        assert [i.line_no for i in issues] == [2, 3]

    def test_load_predictions_both_shapes(self):
        lines = [
            json.dumps({"id": "T1", "options": [{"id": "A", "p_true": 0.6},
                                                {"id": "B", "p_true": 0.4}]}),
            json.dumps({"id": "T2", "p_true": {"A": 0.1, "B": 0.9}}),
        ]
        predictions, issues = load_predictions(lines)
        assert not issues
        assert predictions[0].p_true == {"A": 0.6, "B": 0.4}
        assert predictions[1].p_true == {"A": 0.1, "B": 0.9}

    def test_score_batch(self):
        t1 = task({"A": 2.0, "B": 1.0}, "T1")
        p1 = pred({"A": 0.6, "B": 0.4}, "T1")
        report = score_batch([t1], [p1])
        assert report.accuracy == 1.0

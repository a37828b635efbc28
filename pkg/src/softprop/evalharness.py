"""Scoring forecasting predictions against dollar-valued event options.

Per event: accuracy is top-1 correctness (the highest-probability option
must carry the best utility); hard and soft scores are the min-max
normalized utility of the chosen option and the probability-weighted
normalized utility across options; the Brier score is the mean squared
error between the sum-normalized predicted distribution and the one-hot
best-utility outcome (ties split the one-hot mass). Stability metrics come
from repeated runs: confidence is the average highest raw p_true, variance
the across-run variance of the hard score averaged over tasks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InsufficientRuns, InvalidInput, SchemaMismatch


@dataclass
class EventOption:
    id: str
    statement: str
    dollar_value: float


@dataclass
class EventTask:
    id: str
    description: str
    current_date: str
    options: list[EventOption]

    def __post_init__(self):
        if len(self.options) < 2:
            raise InvalidInput(f"task {self.id}: needs at least two options")
        values = {o.dollar_value for o in self.options}
        if len(values) == 1:
            raise InvalidInput(
                f"task {self.id}: options have no distinguishable value")
        ids = [o.id for o in self.options]
        if len(set(ids)) != len(ids):
            raise InvalidInput(f"task {self.id}: duplicate option ids")


@dataclass
class Prediction:
    task_id: str
    p_true: dict[str, float]
    metadata: dict = field(default_factory=dict)


@dataclass
class EventRow:
    task_id: str
    accuracy: float
    hard: float
    soft: float
    brier: float
    confidence: float
    tie_flag: bool = False
    degenerate_prediction: bool = False
    chosen_option: str = ""


@dataclass
class MetricsReport:
    accuracy: float
    soft: float
    hard: float
    brier: float
    confidence: float | None = None
    variance: float | None = None
    rows: list[EventRow] = field(default_factory=list)

    def to_doc(self) -> dict:
        doc = {
            "accuracy": self.accuracy,
            "soft": self.soft,
            "hard": self.hard,
            "brier": self.brier,
            "confidence": self.confidence,
            "variance": self.variance,
            "rows": [dict(r.__dict__) for r in self.rows],
        }
        return doc

    def formatted(self) -> dict[str, str]:
        """Headline values as percentages with two decimals."""
        out = {}
        for name in ("accuracy", "soft", "hard", "brier", "confidence",
                     "variance"):
            value = getattr(self, name)
            if value is not None:
                out[name] = f"{value * 100:.2f}"
        return out


def _check_coverage(task: EventTask, prediction: Prediction) -> None:
    option_ids = {o.id for o in task.options}
    if set(prediction.p_true) != option_ids:
        missing = sorted(option_ids - set(prediction.p_true))
        extra = sorted(set(prediction.p_true) - option_ids)
        raise SchemaMismatch(
            f"task {task.id}: prediction does not cover options "
            f"(missing={missing}, extra={extra})")
    for oid, p in prediction.p_true.items():
        if not 0.0 <= p <= 1.0:
            raise SchemaMismatch(f"task {task.id}: p_true[{oid}]={p} "
                                 "outside [0, 1]")


def _normalized_values(task: EventTask) -> dict[str, float]:
    values = [o.dollar_value for o in task.options]
    low, high = min(values), max(values)
    return {o.id: (o.dollar_value - low) / (high - low) for o in task.options}


def _normalized_probabilities(task: EventTask,
                              prediction: Prediction) -> tuple[dict[str, float], bool]:
    total = sum(prediction.p_true.values())
    if total <= 0.0:
        uniform = 1.0 / len(task.options)
        return {o.id: uniform for o in task.options}, True
    return {oid: p / total for oid, p in prediction.p_true.items()}, False


def _argmax_option(task: EventTask, prediction: Prediction) -> tuple[str, bool]:
    """Highest-probability option; ties break by option order with a flag."""
    best_id, best_p, tie = None, -1.0, False
    for option in task.options:
        p = prediction.p_true[option.id]
        if p > best_p:
            best_id, best_p, tie = option.id, p, False
        elif p == best_p:
            tie = True
    return best_id, tie


def _best_value_ids(task: EventTask) -> set[str]:
    best = max(o.dollar_value for o in task.options)
    return {o.id for o in task.options if o.dollar_value == best}


def brier(task: EventTask, prediction: Prediction) -> float:
    """(1/|O|) * sum((p_norm - y)^2) with one-hot truth on the best-value
    option; co-best options split the mass uniformly."""
    _check_coverage(task, prediction)
    p_norm, _ = _normalized_probabilities(task, prediction)
    best = _best_value_ids(task)
    share = 1.0 / len(best)
    total = 0.0
    for option in task.options:
        y = share if option.id in best else 0.0
        total += (p_norm[option.id] - y) ** 2
    return total / len(task.options)


def score_event(task: EventTask, prediction: Prediction) -> EventRow:
    _check_coverage(task, prediction)
    nu = _normalized_values(task)
    chosen, tie = _argmax_option(task, prediction)
    best = _best_value_ids(task)
    p_norm, degenerate = _normalized_probabilities(task, prediction)
    soft = sum(p_norm[o.id] * nu[o.id] for o in task.options)
    return EventRow(
        task_id=task.id,
        accuracy=1.0 if chosen in best else 0.0,
        hard=nu[chosen],
        soft=soft,
        brier=brier(task, prediction),
        confidence=max(prediction.p_true.values()),
        tie_flag=tie,
        degenerate_prediction=degenerate,
        chosen_option=chosen,
    )


def aggregate(rows: Sequence[EventRow]) -> MetricsReport:
    """Unweighted means over the per-event rows."""
    if not rows:
        raise InvalidInput("nothing to aggregate")
    n = len(rows)
    return MetricsReport(
        accuracy=sum(r.accuracy for r in rows) / n,
        soft=sum(r.soft for r in rows) / n,
        hard=sum(r.hard for r in rows) / n,
        brier=sum(r.brier for r in rows) / n,
        confidence=sum(r.confidence for r in rows) / n,
        rows=list(rows),
    )


def stability(runs_per_task: dict[str, Sequence[EventRow]]
              ) -> tuple[float, float]:
    """(confidence, variance) over repeated runs of the same tasks.

    Confidence averages the highest raw p_true over all tasks and runs;
    variance averages, over tasks, the population variance of the hard
    score across that task's runs.
    """
    if not runs_per_task:
        raise InsufficientRuns("no tasks supplied")
    confidences, variances = [], []
    for task_id, rows in runs_per_task.items():
        if len(rows) < 2:
            raise InsufficientRuns(f"task {task_id}: needs >= 2 runs")
        confidences.extend(r.confidence for r in rows)
        hards = [r.hard for r in rows]
        mean = sum(hards) / len(hards)
        variances.append(sum((h - mean) ** 2 for h in hards) / len(hards))
    return (sum(confidences) / len(confidences),
            sum(variances) / len(variances))


# ---------------------------------------------------------------------------
# Decision threshold


def apply_threshold(p: float, delta: float) -> bool:
    """True label iff p strictly exceeds the threshold."""
    return p > delta


def calibrate_threshold(pairs: Sequence[tuple[float, bool]]) -> float:
    """Grid-search the threshold over midpoints of the observed values plus
    the endpoints {0, 1}; highest accuracy wins, ties take the smallest."""
    if not pairs:
        raise InvalidInput("no validation pairs")
    values = sorted({p for p, _ in pairs})
    candidates = [0.0]
    candidates += [(a + b) / 2.0 for a, b in zip(values, values[1:])]
    candidates.append(1.0)
    best_delta, best_accuracy = 0.0, -1.0
    for delta in candidates:
        accuracy = sum(1 for p, label in pairs
                       if apply_threshold(p, delta) == label) / len(pairs)
        if accuracy > best_accuracy:
            best_delta, best_accuracy = delta, accuracy
    return best_delta


def threshold_accuracy(pairs: Sequence[tuple[float, bool]],
                       delta: float) -> float:
    if not pairs:
        raise InvalidInput("no pairs")
    return sum(1 for p, label in pairs
               if apply_threshold(p, delta) == label) / len(pairs)


# ---------------------------------------------------------------------------
# Line-delimited ingestion


@dataclass
class LintIssue:
    line_no: int
    message: str


def _task_from_record(record: dict) -> EventTask:
    options = [EventOption(id=str(o["id"]), statement=str(o.get("statement", "")),
                           dollar_value=float(o["dollar_value"]))
               for o in record["options"]]
    return EventTask(id=str(record["id"]),
                     description=str(record.get("description", "")),
                     current_date=str(record.get("current_date", "")),
                     options=options)


def load_events(lines: Iterable[str]) -> tuple[list[EventTask], list[LintIssue]]:
    """Parse line-delimited event records; malformed rows are skipped and
    reported rather than failing the batch."""
    tasks, issues = [], []
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            tasks.append(_task_from_record(record))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError,
                InvalidInput) as exc:
            issues.append(LintIssue(line_no, str(exc)))
    return tasks, issues


def load_predictions(lines: Iterable[str]) -> tuple[list[Prediction],
                                                     list[LintIssue]]:
    predictions, issues = [], []
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            if "options" in record:
                p_true = {str(o["id"]): float(o["p_true"])
                          for o in record["options"]}
            else:
                p_true = {str(k): float(v) for k, v in record["p_true"].items()}
            predictions.append(Prediction(task_id=str(record["id"]),
                                          p_true=p_true,
                                          metadata=record.get("metadata", {})))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            issues.append(LintIssue(line_no, str(exc)))
    return predictions, issues


def score_batch(tasks: Sequence[EventTask],
                predictions: Sequence[Prediction]) -> MetricsReport:
    by_task = {p.task_id: p for p in predictions}
    rows = []
    for task in tasks:
        if task.id not in by_task:
            raise SchemaMismatch(f"no prediction for task {task.id}")
        rows.append(score_event(task, by_task[task.id]))
    return aggregate(rows)

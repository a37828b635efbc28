"""Synthesis-rule application, validation, sensitivities, and noise
propagation.

Rule kinds and their closed forms:
  linear     parent = beta0 + sum_j beta_j * v_j          (must land in [0, 1])
  average    parent = mean(v_j)
  noisy_or   parent = 1 - (1 - beta0) * prod_j (1 - beta_j * v_j)
  simple_logic  fuzzy evaluation of the stored formula with PA bound to the
                assumption probability
  vanilla    value supplied by the agent; no closed form

Sensitivities are analytic partial derivatives of the rule at a point.
The linear rule's partials are the weights themselves, independent of the
evaluation point; fuzzy gates are state-dependent (AND passes the co-factor,
OR one minus it), which is what makes them brittle under input noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import (CoefficientError, InvalidInput, SchemaMismatch,
                     Unsupported)
from .formula import (ASSUMPTION_VAR, eval_formula, eval_formula_gradient,
                      formula_vars, parse_formula)
from .records import (DEFAULT_INTERCEPT_BOUND, LinearRecord, LogicRecord,
                      NoisyOrRecord)

RULE_LINEAR = "linear"
RULE_SIMPLE_LOGIC = "simple_logic"
RULE_VANILLA = "vanilla"
RULE_AVERAGE = "average"
RULE_NOISY_OR = "noisy_or"

RULE_KINDS = (RULE_LINEAR, RULE_SIMPLE_LOGIC, RULE_VANILLA, RULE_AVERAGE,
              RULE_NOISY_OR)

# Slack for float round-off when checking [0, 1] membership of results.
_EDGE = 1e-12


def _check_values(child_values: Mapping[str, float]) -> None:
    for cid, v in child_values.items():
        if not 0.0 <= v <= 1.0:
            raise InvalidInput(f"child value {cid}={v} outside [0, 1]")


def _check_keys(record_betas: Mapping[str, float],
                child_values: Mapping[str, float]) -> None:
    if set(record_betas) != set(child_values):
        missing = sorted(set(record_betas) - set(child_values))
        extra = sorted(set(child_values) - set(record_betas))
        raise SchemaMismatch(
            f"child values do not match record (missing={missing}, extra={extra})")


def linear_apply(record: LinearRecord, child_values: Mapping[str, float],
                 intercept_bound: float = DEFAULT_INTERCEPT_BOUND) -> float:
    """Weighted sum of child values plus the intercept.

    Raises CoefficientError when the coefficients push the result out of
    [0, 1]; the orchestrator treats that as a retryable agent mistake.
    """
    record.validate(intercept_bound=intercept_bound)
    _check_keys(record.betas, child_values)
    _check_values(child_values)
    result = record.beta0
    for cid, beta in record.betas.items():
        result += beta * child_values[cid]
    if result < -_EDGE or result > 1.0 + _EDGE:
        raise CoefficientError(
            f"linear result {result} outside [0, 1] for betas {record.betas}")
    return min(1.0, max(0.0, result))


def average_apply(child_values: Mapping[str, float] | Iterable[float]) -> float:
    """Arithmetic mean; the unweighted-ablation rule."""
    values = list(child_values.values()) if isinstance(child_values, Mapping) \
        else list(child_values)
    if not values:
        raise InvalidInput("average of no children")
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise InvalidInput(f"child value {v} outside [0, 1]")
    return sum(values) / len(values)


def noisy_or_apply(record: NoisyOrRecord | LinearRecord,
                   child_values: Mapping[str, float]) -> float:
    """Marginal of "parent fires iff the prior cause or any independently
    activated child-cause fires": 1 - (1-b0) * prod(1 - b_j v_j)."""
    if not 0.0 <= record.beta0 <= 1.0:
        raise CoefficientError(f"activation prior {record.beta0} outside [0, 1]")
    for cid, b in record.betas.items():
        if not 0.0 <= b <= 1.0:
            raise CoefficientError(
                f"activation weight for {cid} is {b}, must be in [0, 1]")
    _check_keys(record.betas, child_values)
    _check_values(child_values)
    survive = 1.0 - record.beta0
    for cid, beta in record.betas.items():
        survive *= 1.0 - beta * child_values[cid]
    return 1.0 - survive


def logic_apply(record: LogicRecord, child_values: Mapping[str, float]) -> float:
    """Fuzzy evaluation of the stored formula, PA bound to the assumption."""
    record.validate()
    _check_values(child_values)
    ast = parse_formula(record.formula_text)
    assignment = dict(child_values)
    assignment.setdefault(ASSUMPTION_VAR, record.assumption_probability)
    return eval_formula(ast, assignment)


@dataclass
class LogicIssue:
    code: str
    variable: str


def validate_logic(record: LogicRecord, child_ids: set[str]) -> list[LogicIssue]:
    """Report-returning check that the formula uses all children and nothing
    else (besides PA)."""
    ast = parse_formula(record.formula_text)
    used = formula_vars(ast)
    issues = []
    for cid in sorted(child_ids):
        if cid not in used:
            issues.append(LogicIssue("MissingChild", cid))
    for name in sorted(used):
        if name != ASSUMPTION_VAR and name not in child_ids:
            issues.append(LogicIssue("UnknownVariable", name))
    return issues


# ---------------------------------------------------------------------------
# Sensitivity and uncertainty propagation


def sensitivity(rule_kind: str, record, child_values: Mapping[str, float]
                ) -> dict[str, float]:
    """Analytic partials of the rule output w.r.t. each input at the point.

    linear: beta_j, independent of the evaluation point.
    simple_logic: chain rule over the formula AST (includes PA when present).
    noisy_or: (1-b0) * b_j * prod_{i != j} (1 - b_i v_i).
    vanilla has no closed form.
    """
    if rule_kind == RULE_LINEAR:
        return dict(record.betas)
    if rule_kind == RULE_SIMPLE_LOGIC:
        ast = parse_formula(record.formula_text)
        assignment = dict(child_values)
        assignment.setdefault(ASSUMPTION_VAR, record.assumption_probability)
        _, grad = eval_formula_gradient(ast, assignment)
        return grad
    if rule_kind == RULE_NOISY_OR:
        _check_keys(record.betas, child_values)
        partials = {}
        for cid in record.betas:
            co = 1.0 - record.beta0
            for other, beta in record.betas.items():
                if other != cid:
                    co *= 1.0 - beta * child_values[other]
            partials[cid] = record.betas[cid] * co
        return partials
    if rule_kind == RULE_AVERAGE:
        k = len(child_values)
        if k == 0:
            raise InvalidInput("average of no children")
        return {cid: 1.0 / k for cid in child_values}
    raise Unsupported(f"no closed-form sensitivity for rule {rule_kind!r}")


def propagate_noise_variance(rule_kind: str, record,
                             child_values: Mapping[str, float],
                             sigmas: Mapping[str, float]) -> float:
    """First-order uncertainty propagation: sum_j (df/dC_j)^2 * sigma_j^2."""
    partials = sensitivity(rule_kind, record, child_values)
    total = 0.0
    for cid, var in sigmas.items():
        if cid not in partials:
            raise SchemaMismatch(f"sigma supplied for unknown input {cid!r}")
        total += partials[cid] ** 2 * var
    return total


@dataclass
class GridPoint:
    inputs: tuple[float, float]
    value: float
    abs_partials: tuple[float, float]


def sensitivity_grid(rule_kind: str, record, resolution: int) -> list[GridPoint]:
    """resolution x resolution lattice over [0, 1]^2 of the rule value and
    absolute partials, for plot emission. Two-child rules only."""
    if resolution <= 0:
        raise InvalidInput("resolution must be >= 1")
    if rule_kind == RULE_SIMPLE_LOGIC:
        ast = parse_formula(record.formula_text)
        names = sorted(formula_vars(ast) - {ASSUMPTION_VAR})
    else:
        names = sorted(record.betas)
    if len(names) != 2:
        raise Unsupported(f"grid needs exactly two children, got {len(names)}")
    if resolution == 1:
        axis = [0.0]
    else:
        axis = [i / (resolution - 1) for i in range(resolution)]
    points = []
    for c1 in axis:
        for c2 in axis:
            values = {names[0]: c1, names[1]: c2}
            if rule_kind == RULE_LINEAR:
                value = linear_apply(record, values)
            elif rule_kind == RULE_NOISY_OR:
                value = noisy_or_apply(record, values)
            elif rule_kind == RULE_SIMPLE_LOGIC:
                value = logic_apply(record, values)
            else:
                raise Unsupported(f"grid unsupported for rule {rule_kind!r}")
            partials = sensitivity(rule_kind, record, values)
            points.append(GridPoint(
                inputs=(c1, c2),
                value=value,
                abs_partials=(abs(partials[names[0]]), abs(partials[names[1]])),
            ))
    return points

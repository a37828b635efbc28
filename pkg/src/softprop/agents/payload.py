"""Extraction and validation of fenced structured payloads from agent text.

Agents reply with free prose plus one fenced ```json block; the last such
block is authoritative and the remaining prose is kept as the report.
Every parser here is total: any byte string yields either a validated
result or a typed, retryable error.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from ..errors import (CoefficientError, FormulaParseError, IdConflict,
                      InvalidInput, MissingPayload, PayloadSyntax,
                      SchemaMismatch)
from ..formula import parse_formula
from ..records import (BETA_INTERCEPT_KEY, LinearRecord, LogicRecord,
                       NoisyOrRecord, VanillaRecord)
from ..rules import validate_logic
from ..tree import is_valid_node_id

_FENCE_RE = re.compile(r"```json\s*\n(.*?)```", re.DOTALL | re.IGNORECASE)


@dataclass
class FencedPayload:
    value: object
    report: str


def extract_fenced_payload(text: str) -> FencedPayload:
    """Parse the last ```json fenced block; prose outside it is the report."""
    if not isinstance(text, str):
        raise MissingPayload("agent response is not text")
    matches = list(_FENCE_RE.finditer(text))
    if not matches:
        raise MissingPayload("no ```json fenced block in response")
    last = matches[-1]
    try:
        value = json.loads(last.group(1))
    except (json.JSONDecodeError, RecursionError) as exc:
        raise PayloadSyntax(f"fenced block is not valid JSON: {exc}") from None
    report = (text[:last.start()] + text[last.end():]).strip()
    return FencedPayload(value=value, report=report)


def _as_probability(value: object, what: str) -> float:
    try:
        p = float(value)
    except (TypeError, ValueError):
        raise SchemaMismatch(f"{what} must be a number, got {value!r}") from None
    if not 0.0 <= p <= 1.0:
        raise SchemaMismatch(f"{what} is {p}, outside [0, 1]")
    return p


def _as_float(value: object, what: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise SchemaMismatch(f"{what} must be a number, got {value!r}") from None


# ---------------------------------------------------------------------------
# Grounder


@dataclass
class GrounderOutput:
    report: str
    p_true: float
    key_factor: str


def parse_grounder_output(text: str) -> GrounderOutput:
    payload = extract_fenced_payload(text)
    if not isinstance(payload.value, dict):
        raise SchemaMismatch("grounder payload must be an object")
    if "p_true" not in payload.value:
        raise SchemaMismatch("grounder payload missing 'p_true'")
    return GrounderOutput(
        report=payload.report,
        p_true=_as_probability(payload.value["p_true"], "p_true"),
        key_factor=str(payload.value.get("key_factor", "")),
    )


# ---------------------------------------------------------------------------
# Analyzer


@dataclass
class Expansion:
    parent: str
    children: dict[str, str]
    causality: str = ""


@dataclass
class AnalyzerOutput:
    expansions: list[Expansion] = field(default_factory=list)
    report: str = ""

    def is_completion_signal(self) -> bool:
        """An expansion list that adds zero nodes means the analysis is done."""
        return all(not e.children for e in self.expansions)


def parse_analyzer_output(text: str, existing_ids: set[str]) -> AnalyzerOutput:
    """Validate the expansion list against the ids already in the tree.

    Parents must exist (in the tree or earlier in the batch) and every new
    id must be fresh and well-formed; violations raise IdConflict so the
    retry loop can feed them back to the analyzer.
    """
    payload = extract_fenced_payload(text)
    if not isinstance(payload.value, list):
        raise SchemaMismatch("analyzer payload must be a list of expansions")
    known = set(existing_ids)
    expansions = []
    for i, entry in enumerate(payload.value):
        if not isinstance(entry, dict):
            raise SchemaMismatch(f"expansion {i} is not an object")
        parent = entry.get("parent")
        if not isinstance(parent, str) or parent not in known:
            raise IdConflict(f"expansion {i} parent {parent!r} does not exist")
        children = entry.get("children")
        if children is None:
            children = {}
        if not isinstance(children, dict):
            raise SchemaMismatch(f"expansion {i} children must be an object")
        clean: dict[str, str] = {}
        for cid, statement in children.items():
            if not is_valid_node_id(cid):
                raise IdConflict(f"malformed node id {cid!r}")
            if cid in known:
                raise IdConflict(f"node id {cid!r} already used")
            if not isinstance(statement, str) or not statement.strip():
                raise SchemaMismatch(f"child {cid} has an empty statement")
            clean[cid] = statement
            known.add(cid)
        expansions.append(Expansion(parent=parent, children=clean,
                                    causality=str(entry.get("causality", ""))))
    return AnalyzerOutput(expansions=expansions, report=payload.report)


# ---------------------------------------------------------------------------
# Synthesizer


@dataclass
class SynthesizerOutput:
    record: object
    report: str
    p_true: float | None = None  # only the vanilla rule carries a value


def parse_synthesizer_output(text: str, rule_kind: str, child_ids: set[str],
                             intercept_bound: float = 0.1) -> SynthesizerOutput:
    payload = extract_fenced_payload(text)
    if not isinstance(payload.value, dict):
        raise SchemaMismatch("synthesizer payload must be an object")
    value = payload.value
    key_factor = str(value.get("key_factor", ""))

    if rule_kind in ("linear", "noisy_or"):
        beta = value.get("beta")
        if not isinstance(beta, dict):
            raise SchemaMismatch("payload needs a 'beta' object")
        if BETA_INTERCEPT_KEY not in beta:
            raise SchemaMismatch(f"beta map must carry the '{BETA_INTERCEPT_KEY}' key")
        beta0 = _as_float(beta[BETA_INTERCEPT_KEY], BETA_INTERCEPT_KEY)
        betas = {k: _as_float(v, f"beta[{k}]") for k, v in beta.items()
                 if k != BETA_INTERCEPT_KEY}
        if rule_kind == "linear":
            record = LinearRecord(beta0=beta0, betas=betas, key_factor=key_factor)
            record.validate(child_ids=child_ids, intercept_bound=intercept_bound)
        else:
            record = NoisyOrRecord(beta0=beta0, betas=betas, key_factor=key_factor)
            record.validate(child_ids=child_ids)
        return SynthesizerOutput(record=record, report=payload.report)

    if rule_kind == "simple_logic":
        formula_text = value.get("formula")
        if not isinstance(formula_text, str):
            raise SchemaMismatch("payload needs a 'formula' string")
        assumption = value.get("assumption") or {}
        if not isinstance(assumption, dict):
            raise SchemaMismatch("'assumption' must be an object")
        record = LogicRecord(
            formula_text=formula_text,
            assumption_detail=str(assumption.get("detail", "")),
            assumption_probability=_as_probability(
                assumption.get("probability", 0.0), "assumption probability"),
            key_factor=key_factor,
        )
        parse_formula(formula_text)  # surfaces FormulaParseError (retryable)
        issues = validate_logic(record, child_ids)
        if issues:
            rendered = ", ".join(f"{i.code}({i.variable})" for i in issues)
            raise SchemaMismatch(f"formula does not fit the children: {rendered}")
        return SynthesizerOutput(record=record, report=payload.report)

    if rule_kind == "vanilla":
        if "p_true" not in value:
            raise SchemaMismatch("vanilla payload missing 'p_true'")
        return SynthesizerOutput(
            record=VanillaRecord(key_factor=key_factor),
            report=payload.report,
            p_true=_as_probability(value["p_true"], "p_true"),
        )

    raise InvalidInput(f"unknown rule kind {rule_kind!r}")

"""Synthesis-record types and their wire shapes.

A record captures how a parent's soft truth value is derived from its
children: linear coefficients, a fuzzy formula plus assumption, or the
free-form (vanilla) case where the agent supplied the value directly.

Wire shape inside the tree document mirrors the agent output schemas:
  {"rule": "linear", "beta": {"beta_0": ..., "<child_id>": ...}, "key_factor": ...}
  {"rule": "simple_logic", "formula": "...", "assumption": {"detail": ..., "probability": ...}, "key_factor": ...}
  {"rule": "vanilla", "key_factor": ...}
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CoefficientError, InvalidInput, SchemaMismatch

DEFAULT_INTERCEPT_BOUND = 0.1

BETA_INTERCEPT_KEY = "beta_0"


@dataclass
class LinearRecord:
    """Coefficients for the weighted-sum rule: parent = beta0 + sum(beta_j * child_j)."""

    beta0: float
    betas: dict[str, float]
    key_factor: str = ""

    def validate(self, child_ids: set[str] | None = None,
                 intercept_bound: float = DEFAULT_INTERCEPT_BOUND) -> None:
        if abs(self.beta0) > intercept_bound + 1e-12:
            raise CoefficientError(
                f"intercept {self.beta0} exceeds bound {intercept_bound}")
        for cid, b in self.betas.items():
            if abs(b) >= 1.0:
                raise CoefficientError(f"weight for {cid} is {b}, |beta| must be < 1")
        if child_ids is not None and set(self.betas) != set(child_ids):
            missing = sorted(set(child_ids) - set(self.betas))
            extra = sorted(set(self.betas) - set(child_ids))
            raise SchemaMismatch(
                f"beta keys do not match children (missing={missing}, extra={extra})")

    def to_wire(self) -> dict:
        beta = {BETA_INTERCEPT_KEY: self.beta0}
        beta.update(self.betas)
        return {"rule": "linear", "beta": beta, "key_factor": self.key_factor}


@dataclass
class LogicRecord:
    """Fuzzy formula over child ids plus the assumption variable PA."""

    formula_text: str
    assumption_detail: str
    assumption_probability: float
    key_factor: str = ""

    def validate(self) -> None:
        if not 0.0 <= self.assumption_probability <= 1.0:
            raise InvalidInput(
                f"assumption probability {self.assumption_probability} outside [0, 1]")

    def to_wire(self) -> dict:
        return {
            "rule": "simple_logic",
            "formula": self.formula_text,
            "assumption": {"detail": self.assumption_detail,
                           "probability": self.assumption_probability},
            "key_factor": self.key_factor,
        }


@dataclass
class VanillaRecord:
    """Free-form synthesis: the agent emitted p_true directly."""

    key_factor: str = ""

    def to_wire(self) -> dict:
        return {"rule": "vanilla", "key_factor": self.key_factor}


@dataclass
class AverageRecord:
    """Unweighted mean of the children (ablation rule, no agent involved)."""

    key_factor: str = ""

    def to_wire(self) -> dict:
        return {"rule": "average", "key_factor": self.key_factor}


@dataclass
class NoisyOrRecord:
    """Independent-activation coefficients: parent = 1 - (1-b0) * prod(1 - b_j v_j)."""

    beta0: float
    betas: dict[str, float]
    key_factor: str = ""

    def validate(self, child_ids: set[str] | None = None) -> None:
        if not 0.0 <= self.beta0 <= 1.0:
            raise CoefficientError(f"activation prior {self.beta0} outside [0, 1]")
        for cid, b in self.betas.items():
            if not 0.0 <= b <= 1.0:
                raise CoefficientError(f"activation weight for {cid} is {b}, must be in [0, 1]")
        if child_ids is not None and set(self.betas) != set(child_ids):
            missing = sorted(set(child_ids) - set(self.betas))
            extra = sorted(set(self.betas) - set(child_ids))
            raise SchemaMismatch(
                f"beta keys do not match children (missing={missing}, extra={extra})")

    def to_wire(self) -> dict:
        beta = {BETA_INTERCEPT_KEY: self.beta0}
        beta.update(self.betas)
        return {"rule": "noisy_or", "beta": beta, "key_factor": self.key_factor}


SynthesisRecord = LinearRecord | LogicRecord | VanillaRecord | AverageRecord | NoisyOrRecord


def record_from_wire(wire: dict) -> SynthesisRecord:
    """Rebuild a record from its document form. Raises SchemaMismatch on bad shape."""
    try:
        rule = wire["rule"]
    except (TypeError, KeyError):
        raise SchemaMismatch("synthesis record missing 'rule'") from None
    key_factor = wire.get("key_factor", "")
    if rule in ("linear", "noisy_or"):
        beta = wire.get("beta")
        if not isinstance(beta, dict) or BETA_INTERCEPT_KEY not in beta:
            raise SchemaMismatch(f"{rule} record needs a beta map with '{BETA_INTERCEPT_KEY}'")
        beta0 = float(beta[BETA_INTERCEPT_KEY])
        betas = {k: float(v) for k, v in beta.items() if k != BETA_INTERCEPT_KEY}
        cls = LinearRecord if rule == "linear" else NoisyOrRecord
        return cls(beta0=beta0, betas=betas, key_factor=key_factor)
    if rule == "simple_logic":
        assumption = wire.get("assumption") or {}
        return LogicRecord(
            formula_text=str(wire.get("formula", "")),
            assumption_detail=str(assumption.get("detail", "")),
            assumption_probability=float(assumption.get("probability", 0.0)),
            key_factor=key_factor,
        )
    if rule == "vanilla":
        return VanillaRecord(key_factor=key_factor)
    if rule == "average":
        return AverageRecord(key_factor=key_factor)
    raise SchemaMismatch(f"unknown synthesis rule {rule!r}")

"""Translating a linear synthesis step into a Bayesian-network CPD and
checking it by exhaustive weighted model counting.

With binary child variables C_j of prior Pr(C_j=1) = v_j and the CPD
Pr(P=1 | c_1..c_k) = b0 + sum_j b_j c_j, marginalizing the children gives
back exactly the linear rule b0 + sum_j b_j v_j, provided every
coefficient is non-negative and b0 + sum_j b_j <= 1 (each CPD entry must
be a probability). Coefficients outside that regime can be rescaled:
min-max shifts everything non-negative then divides by the total, softmax
exponentiates and normalizes; both place the coefficients (intercept
included) on the simplex.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp
from typing import Mapping

from .errors import ConstraintViolation, InvalidInput, TooLarge
from .records import LinearRecord

MAX_EXACT_CHILDREN = 20

NORMALIZATION_NONE = "none"
NORMALIZATION_MINMAX = "minmax"
NORMALIZATION_SOFTMAX = "softmax"

_SLACK = 1e-12


@dataclass
class BayesNetExport:
    child_priors: dict[str, float]
    beta0: float
    betas: dict[str, float]
    cpd: dict[str, float]
    normalization_applied: bool
    method: str

    @property
    def child_order(self) -> list[str]:
        return sorted(self.betas)


def _coefficients_valid(beta0: float, betas: Mapping[str, float]) -> bool:
    if not 0.0 <= beta0 <= 1.0:
        return False
    if any(not 0.0 <= b <= 1.0 for b in betas.values()):
        return False
    return beta0 + sum(betas.values()) <= 1.0 + _SLACK


def _minmax(beta0: float, betas: dict[str, float]) -> tuple[float, dict[str, float]]:
    values = [beta0, *betas.values()]
    low = min(values)
    shift = -low if low < 0 else 0.0
    shifted = [v + shift for v in values]
    total = sum(shifted)
    if total <= 0:
        # All coefficients equal; fall back to the uniform simplex.
        n = len(values)
        shifted = [1.0] * n
        total = float(n)
    scaled = [v / total for v in shifted]
    return scaled[0], dict(zip(betas.keys(), scaled[1:]))


def _softmax(beta0: float, betas: dict[str, float]) -> tuple[float, dict[str, float]]:
    values = [beta0, *betas.values()]
    peak = max(values)
    exps = [exp(v - peak) for v in values]
    total = sum(exps)
    scaled = [v / total for v in exps]
    return scaled[0], dict(zip(betas.keys(), scaled[1:]))


def to_bayes_net(record: LinearRecord, child_priors: Mapping[str, float],
                 normalization: str = NORMALIZATION_NONE) -> BayesNetExport:
    """Build the CPD table over all 2^k child assignments.

    Coefficients already in the valid regime export verbatim with
    normalization_applied=False; otherwise the chosen rescaling is applied.
    normalization="none" with violated constraints raises ConstraintViolation.
    """
    if set(child_priors) != set(record.betas):
        raise InvalidInput("child priors must cover exactly the record's children")
    for cid, p in child_priors.items():
        if not 0.0 <= p <= 1.0:
            raise InvalidInput(f"prior for {cid} is {p}, outside [0, 1]")
    k = len(record.betas)
    if k > MAX_EXACT_CHILDREN:
        raise TooLarge(f"{k} children exceeds the exact-enumeration cap")

    beta0, betas = record.beta0, dict(record.betas)
    applied = False
    if not _coefficients_valid(beta0, betas):
        if normalization == NORMALIZATION_NONE:
            raise ConstraintViolation(
                "coefficients need beta_j in [0, 1] and beta_0 + sum(beta_j) <= 1")
        if normalization == NORMALIZATION_MINMAX:
            beta0, betas = _minmax(beta0, betas)
        elif normalization == NORMALIZATION_SOFTMAX:
            beta0, betas = _softmax(beta0, betas)
        else:
            raise InvalidInput(f"unknown normalization {normalization!r}")
        applied = True

    order = sorted(betas)
    cpd = {}
    for index in range(2 ** k):
        bits = [(index >> j) & 1 for j in range(k)]
        entry = beta0 + sum(betas[cid] * bit for cid, bit in zip(order, bits))
        cpd["".join(str(b) for b in bits)] = entry
    return BayesNetExport(
        child_priors={cid: float(child_priors[cid]) for cid in order},
        beta0=beta0,
        betas=betas,
        cpd=cpd,
        normalization_applied=applied,
        method=normalization if applied else NORMALIZATION_NONE,
    )


def wmc_probability(export: BayesNetExport) -> float:
    """Marginal of the parent by summing CPD(assignment) * prod(priors) over
    every assignment of the children. Exhaustive on purpose: this is the
    oracle the linear rule is checked against."""
    order = export.child_order
    k = len(order)
    if k > MAX_EXACT_CHILDREN:
        raise TooLarge(f"{k} children exceeds the exact-enumeration cap")
    total = 0.0
    for index in range(2 ** k):
        bits = [(index >> j) & 1 for j in range(k)]
        weight = 1.0
        for cid, bit in zip(order, bits):
            p = export.child_priors[cid]
            weight *= p if bit else (1.0 - p)
        total += export.cpd["".join(str(b) for b in bits)] * weight
    return total

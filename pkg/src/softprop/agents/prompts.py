"""Versioned prompt templates and strict placeholder substitution.

Templates are data: the engine never branches on their contents, it only
substitutes ``{name}`` placeholders. Rendering is strict in both
directions, a placeholder without a binding and a binding without a
placeholder are both errors, so drifting templates fail loudly.
"""

from __future__ import annotations

import re
from functools import lru_cache

from ..errors import TemplateError

_PLACEHOLDER_RE = re.compile(r"\{([a-z_][a-z0-9_]*)\}")

ANALYZER_TEMPLATE = """\
You are an analyst who breaks a complex claim into a tree of supporting \
sub-claims. Each sub-claim must be a single, self-contained sentence that \
can be judged true or false on its own, without the parent as context. \
Prefer a small number of high-level, weakly correlated drivers over \
fine-grained restatements, and do not add negations or rewordings of \
siblings.

You will receive the current tree as JSON. Decide which nodes to expand \
and reply with your reasoning followed by exactly one fenced block:

```json
[
  {"parent": "<node id>",
   "children": {"<new node id>": "<child claim sentence>"},
   "causality": "<one sentence on how the children bear on the parent>"}
]
```

The root id is always P0. Give every new node a unique id such as P1, P2, \
P1.2, or P1.3.2.1; never reuse an existing id. The entries must keep the \
structure a tree rooted at P0. Aim for roughly {max_leaves} leaves in \
total; reply with an empty list [] when the analysis is complete and no \
further expansion is useful.
"""

GROUNDER_TEMPLATE = """\
You are a research analyst. You will be given one claim. Gather and weigh \
the evidence for and against it, using only information published before \
{knowledge_cutoff}, and write a concise report of your findings: key data \
points, their sources, and how they bear on the claim.

After the report, append exactly one fenced block:

```json
{"p_true": <float>, "key_factor": "<one or two sentences>"}
```

where p_true is your probability between 0.00 and 1.00 that the claim is \
true, and key_factor names the single most decisive consideration.
"""

SYNTHESIZER_LINEAR_TEMPLATE = """\
You are an analyst combining the graded conclusions of several research \
reports. You will receive a parent claim and its child claims as JSON; \
each child carries a probability p_true in [0, 1] and a report. Weigh the \
children by how strongly each bears on the parent and how much you trust \
its report, then model the parent probability as an intercept plus a \
weighted sum of the child probabilities.

Write your reasoning, including a risk assessment of what could make the \
parent claim false, then append exactly one fenced block:

```json
{"beta": {"beta_0": <float>, "<child id>": <float>},
 "key_factor": "<one or two sentences>"}
```

Rules: the intercept key must be "beta_0" and its absolute value must be \
less than {abs_intercept_max}; every child id must appear as a key with \
a weight whose absolute value is below 1; and the implied parent value, \
intercept plus weighted sum, must land between 0 and 1. Check the \
arithmetic yourself before answering.
"""

SYNTHESIZER_SIMPLE_LOGIC_TEMPLATE = """\
You are an analyst combining the graded conclusions of several research \
reports. You will receive a parent claim and its child claims as JSON; \
each child carries a probability p_true in [0, 1] and a report. Express \
how the children jointly determine the parent as a logical formula using \
AND, OR, NOT, and parentheses, evaluated softly: A AND B means A*B, \
A OR B means A+B-A*B, NOT A means 1-A.

You may include one extra variable for unmodeled external factors; its \
id in the formula must ALWAYS BE "PA", and you must state what it stands \
for and how likely it is. Every other variable in the formula must be the \
id of a child, and the formula must use ALL the children.

Write your reasoning, then append exactly one fenced block:

```json
{"formula": "<e.g. (P1 AND P2) OR (P3 AND NOT PA)>",
 "assumption": {"detail": "<one or two sentences>", "probability": <float>},
 "key_factor": "<one or two sentences>"}
```
"""

SYNTHESIZER_VANILLA_TEMPLATE = """\
You are an analyst combining the graded conclusions of several research \
reports. You will receive a parent claim and its child claims as JSON; \
each child carries a probability p_true in [0, 1] and a report. Weigh the \
children's findings, write your own assessment of the parent claim with a \
risk discussion, then append exactly one fenced block:

```json
{"p_true": <float>, "key_factor": "<one or two sentences>"}
```

where p_true is your probability between 0.00 and 1.00 that the parent \
claim is true.
"""

TEMPLATES: dict[str, str] = {
    "analyzer": ANALYZER_TEMPLATE,
    "grounder": GROUNDER_TEMPLATE,
    "synthesizer_linear": SYNTHESIZER_LINEAR_TEMPLATE,
    "synthesizer_simple_logic": SYNTHESIZER_SIMPLE_LOGIC_TEMPLATE,
    "synthesizer_vanilla": SYNTHESIZER_VANILLA_TEMPLATE,
}


def template_placeholders(text: str) -> set[str]:
    return set(_PLACEHOLDER_RE.findall(text))


def render_prompt(template_id: str, bindings: dict[str, object] | None = None) -> str:
    """Substitute every placeholder; strict about unknown or missing names."""
    frozen = tuple(sorted((k, str(v)) for k, v in (bindings or {}).items()))
    return _render_cached(template_id, frozen)


@lru_cache(maxsize=256)
def _render_cached(template_id: str, frozen_bindings: tuple) -> str:
    try:
        template = TEMPLATES[template_id]
    except KeyError:
        raise TemplateError(f"unknown template {template_id!r}") from None
    bindings = dict(frozen_bindings)
    expected = template_placeholders(template)
    missing = expected - set(bindings)
    if missing:
        raise TemplateError(
            f"missing bindings for {sorted(missing)} in template {template_id!r}")
    unknown = set(bindings) - expected
    if unknown:
        raise TemplateError(
            f"unknown placeholders {sorted(unknown)} for template {template_id!r}")

    def substitute(match: re.Match) -> str:
        return bindings[match.group(1)]

    return _PLACEHOLDER_RE.sub(substitute, template)

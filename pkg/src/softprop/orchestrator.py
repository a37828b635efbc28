"""Run orchestration: tree expansion, parallel grounding, bottom-up
synthesis, recursive deepening, and incremental what-if resynthesis.

Execution model: the orchestrator is the single writer of tree state.
Grounder and synthesizer calls run as pure tasks over immutable snapshots
on a bounded thread pool; the owner merges their results in id-sorted
order, so the final tree is identical for any concurrency cap and any
interleaving. A parent is only synthesized once every child has settled.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

from .agents.base import Agent, AgentRequest, call_with_retry
from .agents.payload import (GrounderOutput, SynthesizerOutput,
                             parse_analyzer_output, parse_grounder_output,
                             parse_synthesizer_output)
from .agents.prompts import render_prompt
from .errors import (AgentExhausted, CoefficientError, InvalidConfig,
                     InvalidInput, RunFailed, SoftpropError, Transport)
from .records import (AverageRecord, LinearRecord, LogicRecord, NoisyOrRecord,
                      SynthesisRecord, VanillaRecord)
from .rules import (RULE_AVERAGE, RULE_KINDS, RULE_LINEAR, RULE_NOISY_OR,
                    RULE_SIMPLE_LOGIC, RULE_VANILLA, average_apply,
                    linear_apply, logic_apply, noisy_or_apply)
from .tree import (STATUS_GROUNDED, STATUS_SYNTHESIZED, PropositionNode,
                   PropositionTree, add_children, create_tree, leaves,
                   node_depths, node_sort_key, utc_now_iso)

GROUNDING_FAILED_REPORT = "grounding failed"
SYNTHESIS_FAILED_REPORT = "synthesis failed"
CLAMPED_NOTE = "result clamped to [0, 1] after retries"


@dataclass
class RunConfig:
    l_max: int = 10
    t_max: int = 10
    rule: str = RULE_LINEAR
    max_concurrent_prove: int = 20
    max_proof_retries: int = 3
    max_exception_retry: int = 3
    recursion_depth: int = 1
    decision_threshold: float | None = None
    seed: int = 0
    intercept_bound: float = 0.1
    knowledge_cutoff: str = ""
    sequential_recursion: bool = False

    def __post_init__(self):
        if self.l_max < 1 or self.t_max < 1:
            raise InvalidConfig("l_max and t_max must be >= 1")
        if self.max_concurrent_prove < 1:
            raise InvalidConfig("max_concurrent_prove must be >= 1")
        if self.recursion_depth < 1:
            raise InvalidConfig("recursion_depth must be >= 1")
        if self.rule not in RULE_KINDS:
            raise InvalidConfig(f"unknown synthesis rule {self.rule!r}")

    def snapshot(self) -> dict:
        """Semantic limits only; execution knobs such as the concurrency cap
        do not change results and are kept out of the tree document."""
        return {
            "L_max": self.l_max,
            "T_max": self.t_max,
            "rule": self.rule,
            "n": self.recursion_depth,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        aliases = {"L_max": "l_max", "T_max": "t_max", "n": "recursion_depth",
                   "concurrency": "max_concurrent_prove",
                   "delta": "decision_threshold"}
        kwargs = {}
        for key, value in (data or {}).items():
            kwargs[aliases.get(key, key)] = value
        return cls(**kwargs)


@dataclass
class AgentSuite:
    analyzer: Agent | None = None
    grounder: Agent | None = None
    synthesizer: Agent | None = None


@dataclass
class Counters:
    agent_calls: int = 0
    retries: int = 0
    grounder_failures: int = 0
    analyzer_calls: int = 0
    grounder_calls: int = 0
    synthesizer_calls: int = 0

    def absorb(self, outcome) -> None:
        self.agent_calls += outcome.attempts
        self.retries += outcome.retries

    def merge(self, other: "Counters") -> None:
        for key, value in other.__dict__.items():
            setattr(self, key, getattr(self, key) + value)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class RunManifest:
    query: str
    config: dict
    agents: dict[str, str] = field(default_factory=dict)
    tree_ref: str | None = None
    timings_ms: dict[str, float] = field(default_factory=dict)
    counters: dict = field(default_factory=dict)
    failed_nodes: list[str] = field(default_factory=list)
    predictions: dict = field(default_factory=dict)

    def to_doc(self) -> dict:
        return {
            "query": self.query,
            "config": self.config,
            "agents": self.agents,
            "tree_ref": self.tree_ref,
            "timings": self.timings_ms,
            "counters": self.counters,
            "failed_nodes": self.failed_nodes,
            "predictions": self.predictions,
        }


@dataclass
class RunResult:
    tree: PropositionTree
    manifest: RunManifest


# ---------------------------------------------------------------------------
# Prompt/request builders. The synthesizer payload carries exactly one node
# plus its direct children, never the rest of the tree.


def _tree_state(tree: PropositionTree) -> dict:
    return {nid: {"statement": n.statement, "children": list(n.children)}
            for nid, n in sorted(tree.nodes.items(),
                                 key=lambda kv: node_sort_key(kv[0]))}


def build_analyzer_request(tree: PropositionTree, config: RunConfig,
                           round_no: int) -> AgentRequest:
    state = _tree_state(tree)
    system = render_prompt("analyzer", {"max_leaves": config.l_max})
    user = (f"Round {round_no}. Current tree:\n```json\n"
            f"{json.dumps(state, sort_keys=True)}\n```")
    return AgentRequest(
        role="analyzer",
        messages=[{"role": "system", "content": system},
                  {"role": "user", "content": user}],
        node_id=tree.root,
        statement=tree.nodes[tree.root].statement,
        metadata={"tree_state": state, "round": round_no},
    )


def build_grounder_request(node: PropositionNode, config: RunConfig) -> AgentRequest:
    cutoff = config.knowledge_cutoff or "your training cutoff"
    system = render_prompt("grounder", {"knowledge_cutoff": cutoff})
    return AgentRequest(
        role="grounder",
        messages=[{"role": "system", "content": system},
                  {"role": "user", "content": f"Claim: {node.statement}"}],
        node_id=node.id,
        statement=node.statement,
    )


_SYNTH_TEMPLATE_BY_RULE = {
    RULE_LINEAR: "synthesizer_linear",
    RULE_NOISY_OR: "synthesizer_linear",
    RULE_SIMPLE_LOGIC: "synthesizer_simple_logic",
    RULE_VANILLA: "synthesizer_vanilla",
}


def build_synthesizer_request(tree: PropositionTree, node_id: str,
                              config: RunConfig) -> AgentRequest:
    node = tree.node(node_id)
    template = _SYNTH_TEMPLATE_BY_RULE[config.rule]
    bindings = {}
    if template == "synthesizer_linear":
        bindings["abs_intercept_max"] = config.intercept_bound
    system = render_prompt(template, bindings)
    children_payload = []
    for cid in node.children:
        child = tree.node(cid)
        children_payload.append({
            "id": cid,
            "statement": child.statement,
            "p_true": child.p_true,
            "report": child.report,
            "key_factor": child.key_factor,
        })
    user_payload = {
        "parent": {"id": node_id, "statement": node.statement,
                   "causality": node.causality},
        "children": children_payload,
    }
    user = f"```json\n{json.dumps(user_payload, sort_keys=True)}\n```"
    return AgentRequest(
        role="synthesizer",
        messages=[{"role": "system", "content": system},
                  {"role": "user", "content": user}],
        node_id=node_id,
        statement=node.statement,
        metadata={"child_ids": list(node.children)},
    )


# ---------------------------------------------------------------------------
# Analyze (tree expansion)


def analyze(tree: PropositionTree, analyzer: Agent, config: RunConfig,
            counters: Counters | None = None) -> PropositionTree:
    """Expand until the leaf budget is met, the step budget runs out, or the
    analyzer signals completion with an empty expansion list. The final
    batch may overshoot the leaf budget; that is expected."""
    counters = counters if counters is not None else Counters()
    for round_no in range(1, config.t_max + 1):
        if len(leaves(tree)) >= config.l_max:
            break
        request = build_analyzer_request(tree, config, round_no)
        existing = set(tree.nodes)
        counters.analyzer_calls += 1
        try:
            outcome = call_with_retry(
                analyzer, request,
                validator=lambda text: parse_analyzer_output(text, existing),
                max_exception_retry=config.max_exception_retry)
        except AgentExhausted as exc:
            counters.agent_calls += config.max_exception_retry + 1
            exc.partial_tree = tree
            raise
        counters.absorb(outcome)
        output = outcome.value
        if output.is_completion_signal():
            break
        for expansion in output.expansions:
            tree = add_children(tree, expansion.parent, expansion.children,
                                expansion.causality)
    return tree


# ---------------------------------------------------------------------------
# Synthesize (grounding + bottom-up aggregation)
#
# Worker functions are pure: they read an immutable snapshot and return a
# result object with local counter deltas; the owning thread merges.


@dataclass
class _GroundOutcome:
    node_id: str
    output: GrounderOutput | None
    failed: bool
    counters: Counters


def _ground_leaf(grounder: Agent, node: PropositionNode,
                 config: RunConfig) -> _GroundOutcome:
    local = Counters()
    request = build_grounder_request(node, config)
    for _attempt in range(1 + config.max_proof_retries):
        local.grounder_calls += 1
        try:
            outcome = call_with_retry(grounder, request, parse_grounder_output,
                                      max_exception_retry=config.max_exception_retry)
        except (AgentExhausted, Transport):
            local.agent_calls += config.max_exception_retry + 1
            local.retries += config.max_exception_retry
            continue
        local.absorb(outcome)
        return _GroundOutcome(node.id, outcome.value, False, local)
    local.grounder_failures += 1
    return _GroundOutcome(node.id, None, True, local)


def _apply_record(record: SynthesisRecord, child_values: dict[str, float],
                  intercept_bound: float) -> float:
    """Raw rule application used by the synthesis path; range errors
    propagate so the retry loop can push back on the agent."""
    if isinstance(record, LinearRecord):
        return linear_apply(record, child_values, intercept_bound=intercept_bound)
    if isinstance(record, NoisyOrRecord):
        return noisy_or_apply(record, child_values)
    if isinstance(record, LogicRecord):
        return logic_apply(record, child_values)
    if isinstance(record, AverageRecord):
        return average_apply(child_values)
    raise InvalidInput(f"record {type(record).__name__} has no closed form")


def _clamped_linear(record: LinearRecord, child_values: dict[str, float]) -> float:
    raw = record.beta0 + sum(record.betas[c] * child_values[c]
                             for c in child_values)
    return min(1.0, max(0.0, raw))


@dataclass
class _SynthOutcome:
    node: PropositionNode
    counters: Counters
    failed: bool = False


def _synthesize_node(tree: PropositionTree, node_id: str,
                     synthesizer: Agent | None,
                     config: RunConfig) -> _SynthOutcome:
    node = tree.node(node_id)
    child_values = {cid: tree.node(cid).p_true for cid in node.children}
    local = Counters()

    if config.rule == RULE_AVERAGE:
        value = average_apply(child_values)
        local.synthesizer_calls += 1
        return _SynthOutcome(
            replace(node, p_true=value, status=STATUS_SYNTHESIZED,
                    synthesis=AverageRecord(),
                    report="Unweighted average of the children.",
                    key_factor="equal weighting"),
            local)

    if synthesizer is None:
        raise InvalidConfig(f"rule {config.rule!r} needs a synthesizer agent")

    request = build_synthesizer_request(tree, node_id, config)
    child_ids = set(node.children)

    def validator(text: str) -> tuple[SynthesizerOutput, float]:
        output = parse_synthesizer_output(text, config.rule, child_ids,
                                          intercept_bound=config.intercept_bound)
        if config.rule == RULE_VANILLA:
            return output, output.p_true
        value = _apply_record(output.record, child_values, config.intercept_bound)
        return output, value

    local.synthesizer_calls += 1
    try:
        outcome = call_with_retry(synthesizer, request, validator,
                                  max_exception_retry=config.max_exception_retry)
    except AgentExhausted as exc:
        local.agent_calls += config.max_exception_retry + 1
        local.retries += config.max_exception_retry
        # Invalid weights with an otherwise well-formed record: clamp and
        # keep going, a final answer is still required. Anything less
        # salvageable degrades to the neutral failure policy, except at the
        # root where nothing useful remains.
        if isinstance(exc.last_error, CoefficientError) and exc.last_response:
            try:
                output = parse_synthesizer_output(
                    exc.last_response, config.rule, child_ids,
                    intercept_bound=config.intercept_bound)
                if isinstance(output.record, LinearRecord):
                    value = _clamped_linear(output.record, child_values)
                    return _SynthOutcome(
                        replace(node, p_true=value, status=STATUS_SYNTHESIZED,
                                synthesis=output.record,
                                report=f"{output.report}\n\n[{CLAMPED_NOTE}]",
                                key_factor=output.record.key_factor or None),
                        local, failed=True)
            except SoftpropError:
                pass
        if node_id == tree.root:
            raise RunFailed(f"synthesizer exhausted at root: {exc}",
                            partial_tree=tree) from exc
        return _SynthOutcome(
            replace(node, p_true=0.5, status=STATUS_SYNTHESIZED,
                    synthesis=None, report=SYNTHESIS_FAILED_REPORT,
                    key_factor=None),
            local, failed=True)
    local.absorb(outcome)
    output, value = outcome.value
    return _SynthOutcome(
        replace(node, p_true=value, status=STATUS_SYNTHESIZED,
                synthesis=output.record, report=output.report,
                key_factor=(output.record.key_factor or None)),
        local)


def _subtree_ids(tree: PropositionTree, root_id: str) -> set[str]:
    seen = set()
    stack = [root_id]
    while stack:
        nid = stack.pop()
        if nid in seen:
            continue
        seen.add(nid)
        stack.extend(tree.node(nid).children)
    return seen


def synthesize(tree: PropositionTree, node_id: str, grounder: Agent,
               synthesizer: Agent | None, config: RunConfig,
               counters: Counters | None = None,
               failed_nodes: list[str] | None = None,
               timings: dict[str, float] | None = None,
               on_phase: Callable[[str], None] | None = None) -> PropositionTree:
    """Ground every leaf under ``node_id`` (in parallel, bounded by the
    concurrency cap), then synthesize internal nodes level by level from
    the deepest up. Leaves that exhaust their proof retries are pinned at
    the neutral value 0.5 with a failure report and the run continues."""
    counters = counters if counters is not None else Counters()
    failed_nodes = failed_nodes if failed_nodes is not None else []
    region = _subtree_ids(tree, node_id)
    leaf_ids = sorted((nid for nid in region if tree.node(nid).is_leaf()),
                      key=node_sort_key)

    if on_phase is not None:
        on_phase("grounding")
    ground_start = time.perf_counter()
    with ThreadPoolExecutor(max_workers=config.max_concurrent_prove) as pool:
        futures = {nid: pool.submit(_ground_leaf, grounder, tree.node(nid), config)
                   for nid in leaf_ids}
        results = {nid: futures[nid].result() for nid in leaf_ids}
    for nid in leaf_ids:  # merge in id-sorted order for determinism
        res = results[nid]
        counters.merge(res.counters)
        node = tree.node(nid)
        if res.failed:
            failed_nodes.append(nid)
            tree = tree.with_node(replace(node, p_true=0.5,
                                          report=GROUNDING_FAILED_REPORT,
                                          key_factor=None,
                                          status=STATUS_GROUNDED))
        else:
            out = res.output
            tree = tree.with_node(replace(node, p_true=out.p_true,
                                          report=out.report,
                                          key_factor=out.key_factor or None,
                                          status=STATUS_GROUNDED))
    ground_end = time.perf_counter()

    if on_phase is not None:
        on_phase("synthesizing")
    internal = [nid for nid in region if not tree.node(nid).is_leaf()]
    depths = node_depths(tree)
    by_depth: dict[int, list[str]] = {}
    for nid in internal:
        by_depth.setdefault(depths[nid], []).append(nid)
    with ThreadPoolExecutor(max_workers=config.max_concurrent_prove) as pool:
        for depth in sorted(by_depth, reverse=True):
            level = sorted(by_depth[depth], key=node_sort_key)
            snapshot = tree
            futures = {nid: pool.submit(_synthesize_node, snapshot, nid,
                                        synthesizer, config)
                       for nid in level}
            for nid in level:
                outcome = futures[nid].result()
                counters.merge(outcome.counters)
                if outcome.failed:
                    failed_nodes.append(nid)
                tree = tree.with_node(outcome.node)
    synth_end = time.perf_counter()

    if timings is not None:
        timings["ground_ms"] = timings.get("ground_ms", 0.0) + \
            (ground_end - ground_start) * 1000.0
        timings["synthesize_ms"] = timings.get("synthesize_ms", 0.0) + \
            (synth_end - ground_end) * 1000.0
    return tree


# ---------------------------------------------------------------------------
# Full runs


def run_detailed(query: str, agents: AgentSuite, config: RunConfig,
                 clock: Callable[[], str] | None = None,
                 on_phase: Callable[[str], None] | None = None) -> RunResult:
    clock = clock or utc_now_iso
    counters = Counters()
    failed_nodes: list[str] = []
    timings: dict[str, float] = {}
    manifest = RunManifest(
        query=query, config=config.snapshot(),
        agents={role: type(agent).__name__
                for role, agent in (("analyzer", agents.analyzer),
                                    ("grounder", agents.grounder),
                                    ("synthesizer", agents.synthesizer))
                if agent is not None})

    if on_phase is not None:
        on_phase("analyzing")
    start = time.perf_counter()
    if config.recursion_depth > 1:
        tree = _expand_structure(query, agents, config, counters,
                                 config.recursion_depth, clock)
    else:
        tree = create_tree(query, created_at=clock(),
                           config_snapshot=config.snapshot())
        tree = analyze(tree, agents.analyzer, config, counters)
    analyze_end = time.perf_counter()
    timings["analyze_ms"] = (analyze_end - start) * 1000.0

    tree = synthesize(tree, tree.root, agents.grounder, agents.synthesizer,
                      config, counters, failed_nodes, timings,
                      on_phase=on_phase)
    timings["total_ms"] = (time.perf_counter() - start) * 1000.0

    manifest.timings_ms = timings
    manifest.counters = counters.to_dict()
    manifest.failed_nodes = sorted(set(failed_nodes), key=node_sort_key)
    return RunResult(tree=tree, manifest=manifest)


def run(query: str, agents: AgentSuite, config: RunConfig,
        clock: Callable[[], str] | None = None) -> PropositionTree:
    return run_detailed(query, agents, config, clock).tree


def _rename_sub_id(sub_id: str, host_id: str) -> str:
    # Sub-run node P3 hosted under leaf P1.2 becomes P1.2.3.
    return f"{host_id}.{sub_id[1:]}"


def _graft(tree: PropositionTree, host_leaf: str,
           sub: PropositionTree) -> PropositionTree:
    """Merge a sub-run's structure under a host leaf. The sub-root collapses
    into the host leaf (same statement by construction) and every other sub
    node id is re-prefixed with the host id to preserve global uniqueness."""
    nodes = dict(tree.nodes)
    sub_root = sub.node(sub.root)
    host = nodes[host_leaf]
    nodes[host_leaf] = replace(
        host,
        children=[_rename_sub_id(cid, host_leaf) for cid in sub_root.children],
        causality=sub_root.causality,
        status=sub_root.status if sub_root.children else host.status,
    )
    for nid, node in sub.nodes.items():
        if nid == sub.root:
            continue
        new_id = _rename_sub_id(nid, host_leaf)
        nodes[new_id] = replace(
            node,
            id=new_id,
            children=[_rename_sub_id(cid, host_leaf) for cid in node.children],
        )
    return replace(tree, nodes=nodes)


def _expand_structure(statement: str, agents: AgentSuite, config: RunConfig,
                      counters: Counters, depth: int,
                      clock: Callable[[], str]) -> PropositionTree:
    """Recursive analysis: each leaf of this level's tree seeds a fresh
    sub-analysis one level shallower. Grounding is deferred to the single
    final synthesis pass, so grounder work is spent only on the final
    leaves and the grounding phase parallelizes across all of them at once.
    """
    tree = create_tree(statement, created_at=clock(),
                       config_snapshot=config.snapshot())
    tree = analyze(tree, agents.analyzer, config, counters)
    if depth <= 1:
        return tree
    host_leaves = leaves(tree)

    def expand_leaf(leaf_id: str) -> tuple[str, PropositionTree, Counters]:
        local = Counters()
        sub = _expand_structure(tree.node(leaf_id).statement, agents, config,
                                local, depth - 1, clock)
        return leaf_id, sub, local

    if config.sequential_recursion:
        grafts = [expand_leaf(nid) for nid in host_leaves]
    else:
        with ThreadPoolExecutor(max_workers=config.max_concurrent_prove) as pool:
            grafts = list(pool.map(expand_leaf, host_leaves))
    for leaf_id, sub, local in sorted(grafts, key=lambda kv: node_sort_key(kv[0])):
        counters.merge(local)
        tree = _graft(tree, leaf_id, sub)
    return tree


def run_recursive(query: str, agents: AgentSuite, config: RunConfig,
                  clock: Callable[[], str] | None = None) -> RunResult:
    """Depth-n run: analysis recurses at leaves, then one synthesis pass
    grounds all final leaves in parallel and aggregates to the root."""
    return run_detailed(query, agents, config, clock)


def binary_complement(p: float) -> float:
    """Second option of a two-option mutually exclusive task."""
    if not 0.0 <= p <= 1.0:
        raise InvalidInput(f"probability {p} outside [0, 1]")
    return 1.0 - p


# ---------------------------------------------------------------------------
# Resynthesis


@dataclass
class NodeEdit:
    node_id: str
    p_true: float | None = None
    statement: str | None = None


@dataclass
class DeltaEntry:
    node_id: str
    old_p_true: float | None
    new_p_true: float | None


@dataclass
class ResynthesisResult:
    tree: PropositionTree
    delta: list[DeltaEntry]
    dirty_nodes: list[str]
    synthesizer_calls: int


def compute_dirty_set(tree: PropositionTree, edited: list[str]) -> list[str]:
    """Proper ancestors of the edited nodes, deepest first. Closed under
    parent by construction; sibling subtrees are never touched."""
    dirty: set[str] = set()
    for nid in edited:
        dirty.update(tree.ancestors_of(nid))
    return sorted(dirty, key=lambda nid: (-tree.depth_of(nid), node_sort_key(nid)))


def _replay_record(node: PropositionNode, child_values: dict[str, float],
                   intercept_bound: float) -> float:
    record = node.synthesis
    if record is None or isinstance(record, VanillaRecord):
        raise InvalidInput(
            f"node {node.id} has no replayable synthesis record; "
            "supply a synthesizer agent")
    try:
        return _apply_record(record, child_values, intercept_bound)
    except CoefficientError:
        return _clamped_linear(record, child_values)


def resynthesize(tree: PropositionTree, edits: list[NodeEdit],
                 synthesizer: Agent | None = None,
                 config: RunConfig | None = None,
                 grounder: Agent | None = None) -> ResynthesisResult:
    """Apply edits, then re-synthesize only the edited nodes' ancestor
    chains, deepest first. Untouched branches come through byte-identical.

    With no synthesizer agent the stored per-node records are replayed,
    which matches a from-scratch pass under deterministic synthesizers.
    Edits are validated up front and applied atomically: any bad edit
    leaves the input tree untouched (trees are immutable values).
    """
    config = config or RunConfig()
    root = tree.node(tree.root)
    if root.status not in (STATUS_GROUNDED, STATUS_SYNTHESIZED):
        raise InvalidInput("tree is not fully synthesized")

    for edit in edits:
        node = tree.node(edit.node_id)  # raises NotFound
        if edit.p_true is not None and not 0.0 <= edit.p_true <= 1.0:
            raise InvalidInput(f"edit on {edit.node_id}: p_true {edit.p_true} "
                               "outside [0, 1]")
        if edit.statement is not None and not edit.statement.strip():
            raise InvalidInput(f"edit on {edit.node_id}: empty statement")
        if edit.p_true is None and edit.statement is None:
            raise InvalidInput(f"edit on {edit.node_id} changes nothing")

    old_values = {nid: n.p_true for nid, n in tree.nodes.items()}
    new_tree = tree
    effective: list[str] = []
    for edit in edits:
        node = new_tree.node(edit.node_id)
        updates: dict = {}
        if edit.statement is not None and edit.statement != node.statement:
            updates["statement"] = edit.statement
        if edit.p_true is not None and edit.p_true != node.p_true:
            updates["p_true"] = edit.p_true
            updates["report"] = "analyst override"
        elif "statement" in updates and edit.p_true is None and node.is_leaf() \
                and grounder is not None:
            # Statement changed without an explicit value: re-ground the leaf.
            result = _ground_leaf(grounder,
                                  replace(node, statement=edit.statement),
                                  config)
            if result.failed:
                updates["p_true"] = 0.5
                updates["report"] = GROUNDING_FAILED_REPORT
            else:
                updates["p_true"] = result.output.p_true
                updates["report"] = result.output.report
                updates["key_factor"] = result.output.key_factor or None
        if updates:
            new_tree = new_tree.with_node(replace(node, **updates))
            effective.append(edit.node_id)

    dirty = compute_dirty_set(new_tree, effective)
    new_tree, synth_calls = synthesize_dirty(new_tree, dirty, synthesizer, config)
    delta = build_delta(old_values, new_tree)
    return ResynthesisResult(tree=new_tree, delta=delta, dirty_nodes=dirty,
                             synthesizer_calls=synth_calls)


def synthesize_dirty(tree: PropositionTree, dirty: list[str],
                     synthesizer: Agent | None,
                     config: RunConfig) -> tuple[PropositionTree, int]:
    """Re-synthesize the given internal nodes in the given (deepest-first)
    order, either through the agent or by replaying stored records."""
    synth_calls = 0
    counters = Counters()
    for nid in dirty:
        node = tree.node(nid)
        child_values = {cid: tree.node(cid).p_true for cid in node.children}
        if synthesizer is not None or config.rule == RULE_AVERAGE:
            outcome = _synthesize_node(tree, nid, synthesizer, config)
            counters.merge(outcome.counters)
            tree = tree.with_node(outcome.node)
        else:
            value = _replay_record(node, child_values, config.intercept_bound)
            tree = tree.with_node(replace(node, p_true=value))
        synth_calls += 1
    return tree, synth_calls


def build_delta(old_values: dict[str, float | None],
                new_tree: PropositionTree) -> list[DeltaEntry]:
    return [DeltaEntry(nid, old_values[nid], new_tree.node(nid).p_true)
            for nid in sorted(new_tree.nodes, key=node_sort_key)
            if nid in old_values and old_values[nid] != new_tree.node(nid).p_true]

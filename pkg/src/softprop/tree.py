"""Proposition-tree data model: nodes, lifecycle states, structural ops,
validation, and the canonical on-disk document.

Trees are treated as immutable values: every structural or value mutation
returns a new tree and leaves the input untouched, so snapshots can be
shared freely across threads while a single owner serializes writes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Callable, Iterable, Mapping

from .canonical import canonical_bytes, canonical_dumps, canonical_loads
from .errors import IdConflict, InvalidInput, NotFound
from .records import SynthesisRecord, record_from_wire

ROOT_ID = "P0"

NODE_ID_RE = re.compile(r"^P\d+(\.\d+)*$")

STATUS_PENDING = "pending"
STATUS_EXPANDED = "expanded"
STATUS_GROUNDED = "grounded"
STATUS_SYNTHESIZED = "synthesized"

_STATUSES = (STATUS_PENDING, STATUS_EXPANDED, STATUS_GROUNDED, STATUS_SYNTHESIZED)


def is_valid_node_id(node_id: str) -> bool:
    return isinstance(node_id, str) and bool(NODE_ID_RE.match(node_id))


def node_sort_key(node_id: str) -> tuple[int, ...]:
    """Numeric-aware ordering so P2 < P10 and P1.2 < P1.10."""
    return tuple(int(part) for part in node_id[1:].split("."))


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@dataclass
class PropositionNode:
    id: str
    statement: str
    p_true: float | None = None
    report: str | None = None
    key_factor: str | None = None
    children: list[str] = field(default_factory=list)
    causality: str | None = None
    status: str = STATUS_PENDING
    synthesis: SynthesisRecord | None = None

    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class PropositionTree:
    root: str
    nodes: dict[str, PropositionNode]
    created_at: str
    config_snapshot: dict = field(default_factory=dict)

    def node(self, node_id: str) -> PropositionNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise NotFound(f"no node {node_id!r} in tree") from None

    def parent_of(self, node_id: str) -> str | None:
        for nid, node in self.nodes.items():
            if node_id in node.children:
                return nid
        return None

    def ancestors_of(self, node_id: str) -> list[str]:
        """Proper ancestors from parent up to the root."""
        parents = {}
        for nid, node in self.nodes.items():
            for cid in node.children:
                parents[cid] = nid
        chain = []
        cur = node_id
        while cur in parents:
            cur = parents[cur]
            chain.append(cur)
        return chain

    def depth_of(self, node_id: str) -> int:
        return len(self.ancestors_of(node_id))

    def with_node(self, node: PropositionNode) -> "PropositionTree":
        nodes = dict(self.nodes)
        nodes[node.id] = node
        return replace(self, nodes=nodes)


@dataclass
class Violation:
    node_id: str
    code: str
    message: str


# ---------------------------------------------------------------------------
# Structural operations


def create_tree(root_statement: str, *, created_at: str | None = None,
                config_snapshot: dict | None = None) -> PropositionTree:
    """Start a tree with the single pending root proposition."""
    if not root_statement or not root_statement.strip():
        raise InvalidInput("root statement must be non-empty")
    root = PropositionNode(id=ROOT_ID, statement=root_statement)
    return PropositionTree(
        root=ROOT_ID,
        nodes={ROOT_ID: root},
        created_at=created_at if created_at is not None else utc_now_iso(),
        config_snapshot=dict(config_snapshot or {}),
    )


def add_children(tree: PropositionTree, parent: str,
                 children: Mapping[str, str], causality: str = "") -> PropositionTree:
    """Append children to a node, in the order given.

    The parent moves to the expanded state even when the mapping is empty.
    New ids must be well-formed and fresh across the whole tree.
    """
    parent_node = tree.node(parent)
    for cid in children:
        if not is_valid_node_id(cid):
            raise IdConflict(f"malformed node id {cid!r}")
        if cid in tree.nodes:
            raise IdConflict(f"node id {cid!r} already exists")
    # Reject duplicates inside the batch itself (Mapping keys are unique by
    # construction, but callers may pass sequences of pairs upstream).
    nodes = dict(tree.nodes)
    for cid, statement in children.items():
        if not statement or not str(statement).strip():
            raise InvalidInput(f"empty statement for child {cid!r}")
        nodes[cid] = PropositionNode(id=cid, statement=str(statement))
    new_parent = replace(
        parent_node,
        children=list(parent_node.children) + list(children.keys()),
        causality=causality if causality else parent_node.causality,
        status=STATUS_EXPANDED,
    )
    nodes[parent] = new_parent
    return replace(tree, nodes=nodes)


def leaves(tree: PropositionTree) -> list[str]:
    """Node ids with no children, in id-sorted order."""
    return sorted((nid for nid, n in tree.nodes.items() if not n.children),
                  key=node_sort_key)


def node_depths(tree: PropositionTree) -> dict[str, int]:
    """Depth of every node reachable from the root, in one traversal."""
    depths = {tree.root: 0}
    stack = [tree.root]
    while stack:
        nid = stack.pop()
        for cid in tree.nodes[nid].children:
            if cid in tree.nodes and cid not in depths:
                depths[cid] = depths[nid] + 1
                stack.append(cid)
    return depths


def internal_nodes(tree: PropositionTree) -> list[str]:
    return sorted((nid for nid, n in tree.nodes.items() if n.children),
                  key=node_sort_key)


def validate_tree(tree: PropositionTree) -> list[Violation]:
    """Structural and lifecycle checks; empty report iff all invariants hold."""
    out: list[Violation] = []
    if tree.root != ROOT_ID:
        out.append(Violation(tree.root, "bad-root", f"root must be {ROOT_ID}"))
    if tree.root not in tree.nodes:
        out.append(Violation(tree.root, "missing-root", "root id not present in nodes"))
        return out

    parents: dict[str, list[str]] = {}
    for nid, node in tree.nodes.items():
        if not is_valid_node_id(nid):
            out.append(Violation(nid, "bad-id", f"malformed node id {nid!r}"))
        if nid != node.id:
            out.append(Violation(nid, "id-mismatch", "node.id differs from its key"))
        seen_children = set()
        for cid in node.children:
            if cid not in tree.nodes:
                out.append(Violation(nid, "dangling-reference",
                                     f"child {cid!r} not present in nodes"))
                continue
            if cid in seen_children:
                out.append(Violation(nid, "duplicate-child",
                                     f"child {cid!r} listed twice"))
            seen_children.add(cid)
            parents.setdefault(cid, []).append(nid)

    for cid, ps in parents.items():
        if len(ps) > 1:
            out.append(Violation(cid, "multiple-parents",
                                 f"node has parents {sorted(ps)}"))
    if tree.root in parents:
        out.append(Violation(tree.root, "root-has-parent", "root may not be a child"))

    # Reachability: every non-root node must hang off the root (no orphans,
    # which together with the single-parent check rules out cycles).
    reachable = set()
    stack = [tree.root]
    while stack:
        nid = stack.pop()
        if nid in reachable or nid not in tree.nodes:
            continue
        reachable.add(nid)
        stack.extend(tree.nodes[nid].children)
    for nid in tree.nodes:
        if nid not in reachable:
            out.append(Violation(nid, "unreachable", "node not reachable from root"))

    for nid, node in tree.nodes.items():
        if node.status not in _STATUSES:
            out.append(Violation(nid, "bad-status", f"unknown status {node.status!r}"))
        has_value = node.p_true is not None
        if node.status in (STATUS_GROUNDED, STATUS_SYNTHESIZED):
            if not has_value:
                out.append(Violation(nid, "missing-value",
                                     f"{node.status} node lacks p_true"))
            elif not 0.0 <= node.p_true <= 1.0:
                out.append(Violation(nid, "value-range",
                                     f"p_true {node.p_true} outside [0, 1]"))
        elif has_value:
            out.append(Violation(nid, "premature-value",
                                 f"{node.status} node carries p_true"))
        if node.status == STATUS_GROUNDED and node.children:
            out.append(Violation(nid, "grounded-internal",
                                 "grounded nodes must be leaves"))
        if node.status == STATUS_SYNTHESIZED:
            for cid in node.children:
                child = tree.nodes.get(cid)
                if child is not None and child.status not in (STATUS_GROUNDED,
                                                              STATUS_SYNTHESIZED):
                    out.append(Violation(nid, "unsettled-child",
                                         f"child {cid} is {child.status}"))
    return out


# ---------------------------------------------------------------------------
# Event log: add_children is the only structural mutator, so a recorded
# sequence of events replays to an identical tree.


@dataclass
class AddChildrenEvent:
    parent: str
    children: dict[str, str]
    causality: str = ""


def replay_events(root_statement: str, events: Iterable[AddChildrenEvent],
                  *, created_at: str | None = None) -> PropositionTree:
    tree = create_tree(root_statement, created_at=created_at)
    for ev in events:
        tree = add_children(tree, ev.parent, ev.children, ev.causality)
    return tree


# ---------------------------------------------------------------------------
# Canonical document


def tree_to_doc(tree: PropositionTree) -> dict:
    nodes = {}
    for nid, n in tree.nodes.items():
        nodes[nid] = {
            "statement": n.statement,
            "p_true": n.p_true,
            "report": n.report,
            "key_factor": n.key_factor,
            "children": list(n.children),
            "causality": n.causality,
            "status": n.status,
            "synthesis": n.synthesis.to_wire() if n.synthesis is not None else None,
        }
    return {
        "root": tree.root,
        "nodes": nodes,
        "created_at": tree.created_at,
        "config_snapshot": tree.config_snapshot,
    }


def tree_from_doc(doc: dict) -> PropositionTree:
    nodes = {}
    for nid, payload in doc["nodes"].items():
        synthesis = payload.get("synthesis")
        nodes[nid] = PropositionNode(
            id=nid,
            statement=payload["statement"],
            p_true=payload.get("p_true"),
            report=payload.get("report"),
            key_factor=payload.get("key_factor"),
            children=list(payload.get("children", [])),
            causality=payload.get("causality"),
            status=payload.get("status", STATUS_PENDING),
            synthesis=record_from_wire(synthesis) if synthesis is not None else None,
        )
    return PropositionTree(
        root=doc["root"],
        nodes=nodes,
        created_at=doc["created_at"],
        config_snapshot=dict(doc.get("config_snapshot", {})),
    )


def serialize_tree(tree: PropositionTree) -> bytes:
    return canonical_bytes(tree_to_doc(tree))


def deserialize_tree(data: str | bytes) -> PropositionTree:
    return tree_from_doc(canonical_loads(data))


def trees_equal(a: PropositionTree, b: PropositionTree) -> bool:
    return serialize_tree(a) == serialize_tree(b)

"""REST surface over the orchestrator and store, consumed by the UI and
other clients.

Runs execute in an in-process background pool and are observed by polling
their record. Baseline trees are immutable; what-if edits go through
scenario sessions, each of which owns an edit log whose replay from the
base tree reproduces the session tree exactly. Edits apply atomically:
either the whole PATCH lands and resynthesis succeeds, or the session
tree is unchanged.
"""

from __future__ import annotations

import dataclasses
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .agents.base import AgentConfig
from .agents.remote import RemoteChatAgent
from .agents.scripted import load_fixture_file
from .agents.synthetic import (SyntheticAnalyzer, SyntheticGrounder,
                               SyntheticSynthesizer)
from .canonical import canonical_loads
from .errors import InvalidConfig, InvalidInput, NotFound, SoftpropError
from .evalharness import Prediction, aggregate, load_events, score_event
from .orchestrator import (AgentSuite, NodeEdit, RunConfig, binary_complement,
                           build_delta, compute_dirty_set, resynthesize,
                           run_detailed, synthesize_dirty)
from .records import VanillaRecord
from .store import Store, new_id
from .tree import (PropositionTree, add_children, tree_from_doc, tree_to_doc,
                   utc_now_iso)

API_PREFIX = "/v1"


@dataclass
class ServiceConfig:
    store_dir: str
    run: dict = field(default_factory=dict)
    agents: dict = field(default_factory=dict)
    created_at: str | None = None  # fixed clock for reproducible documents

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        doc = canonical_loads(Path(path).read_bytes())
        return cls(store_dir=doc.get("store_dir", "./softprop-store"),
                   run=doc.get("run", doc.get("config", {})),
                   agents=doc.get("agents", {}),
                   created_at=doc.get("created_at"))


def build_agent(role: str, spec: dict, fixture_cache: dict):
    kind = spec.get("kind", "scripted")
    if kind == "scripted":
        fixture = spec.get("fixture")
        if not fixture:
            raise InvalidConfig(f"scripted {role} needs a fixture path")
        if fixture not in fixture_cache:
            fixture_cache[fixture] = load_fixture_file(fixture)
        agents = fixture_cache[fixture]
        if role not in agents:
            raise InvalidConfig(f"fixture {fixture} has no {role} section")
        return agents[role]
    if kind == "synthetic":
        if role == "analyzer":
            return SyntheticAnalyzer(branching=int(spec.get("branching", 3)),
                                     latency_s=float(spec.get("latency_s", 0.0)))
        if role == "grounder":
            return SyntheticGrounder(latency_s=float(spec.get("latency_s", 0.0)))
        return SyntheticSynthesizer(latency_s=float(spec.get("latency_s", 0.0)))
    if kind == "remote":
        config = AgentConfig(
            role=role,
            endpoint=spec.get("endpoint", ""),
            model=spec.get("model", ""),
            temperature=float(spec.get("temperature", 0.1)),
            knowledge_cutoff=spec.get("knowledge_cutoff", ""),
        )
        if not config.endpoint:
            config = AgentConfig.from_env(role, model=config.model or None)
        return RemoteChatAgent(config=config)
    raise InvalidConfig(f"unknown agent kind {kind!r} for {role}")


def build_agent_suite(agents_spec: dict) -> AgentSuite:
    cache: dict = {}
    return AgentSuite(
        analyzer=build_agent("analyzer", agents_spec.get("analyzer", {}), cache),
        grounder=build_agent("grounder", agents_spec.get("grounder", {}), cache),
        synthesizer=build_agent("synthesizer",
                                agents_spec.get("synthesizer", {}), cache),
    )


# ---------------------------------------------------------------------------
# Request bodies


class RunRequest(BaseModel):
    query: str | None = None
    event: dict | None = None
    config: dict | None = None


class AddChildSpec(BaseModel):
    statement: str
    p_true: float


class PatchRequest(BaseModel):
    p_true: float | None = None
    statement: str | None = None
    add_children: dict[str, AddChildSpec] | None = None
    remove: bool = False


class CommitRequest(BaseModel):
    name: str | None = None


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


# ---------------------------------------------------------------------------
# Application state


class ServiceState:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.store = Store(config.store_dir)
        self.executor = ThreadPoolExecutor(max_workers=4)
        self.session_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def fresh_agents(self) -> AgentSuite:
        """A new suite per run: scripted sequence cursors start rewound and
        concurrent runs never share mutable agent state."""
        return build_agent_suite(self.config.agents)

    def clock(self) -> str:
        if self.config.created_at:
            return self.config.created_at
        return utc_now_iso()

    def run_config(self, overrides: dict | None = None) -> RunConfig:
        merged = dict(self.config.run)
        merged.update(overrides or {})
        return RunConfig.from_dict(merged)

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self.session_locks.setdefault(session_id, threading.Lock())


def _execute_run(state: ServiceState, run_id: str, request: RunRequest) -> None:
    store = state.store
    record = store.get_run(run_id)

    def set_status(status: str) -> None:
        record["status"] = status
        store.put_run(record)

    try:
        config = state.run_config(request.config)
        agents = state.fresh_agents()
        if request.event is not None:
            _execute_event_run(state, record, request.event, config,
                               set_status, agents)
        else:
            result = run_detailed(request.query, agents, config,
                                  clock=state.clock, on_phase=set_status)
            tree_ref = store.put_doc(tree_to_doc(result.tree))
            result.manifest.tree_ref = tree_ref
            record["tree_ref"] = tree_ref
            record["manifest"] = result.manifest.to_doc()
        record["status"] = "done"
    except SoftpropError as exc:
        record["status"] = "failed"
        record["error"] = str(exc)
    store.put_run(record)


def _execute_event_run(state: ServiceState, record: dict, event: dict,
                       config: RunConfig, set_status,
                       agents: AgentSuite) -> None:
    """Ground each option's proposition; two-option tasks run only the
    first and derive the complement."""
    options = event.get("options") or []
    if len(options) < 2:
        raise InvalidInput("event needs at least two options")
    predictions: dict[str, float] = {}
    option_trees: dict[str, str] = {}
    manifest_doc = None
    binary = len(options) == 2
    for index, option in enumerate(options):
        if binary and index == 1:
            predictions[str(option["id"])] = binary_complement(
                predictions[str(options[0]["id"])])
            continue
        result = run_detailed(str(option["statement"]), agents, config,
                              clock=state.clock, on_phase=set_status)
        agents = state.fresh_agents()
        ref = state.store.put_doc(tree_to_doc(result.tree))
        option_trees[str(option["id"])] = ref
        predictions[str(option["id"])] = result.tree.node(
            result.tree.root).p_true
        if manifest_doc is None:
            result.manifest.tree_ref = ref
            manifest_doc = result.manifest.to_doc()
    manifest_doc = manifest_doc or {}
    manifest_doc["predictions"] = predictions
    record["manifest"] = manifest_doc
    record["tree_ref"] = next(iter(option_trees.values()), None)
    record["option_trees"] = option_trees
    record["event"] = event


# ---------------------------------------------------------------------------
# Session edit machinery


def _load_tree(store: Store, ref: str) -> PropositionTree:
    return tree_from_doc(store.get_doc(ref))


def _apply_patch(state: ServiceState, session: dict, node_id: str,
                 patch: PatchRequest) -> tuple[PropositionTree, list]:
    store = state.store
    tree = _load_tree(store, session["current_tree_ref"])
    run_record = store.get_run(session["run_id"])
    config = state.run_config(run_record.get("config"))
    tree.node(node_id)  # NotFound guard before any work

    if patch.add_children is None and not patch.remove:
        if patch.p_true is None and patch.statement is None:
            raise InvalidInput("patch changes nothing")
        uses_vanilla = isinstance(tree.node(tree.root).synthesis, VanillaRecord) \
            or config.rule == "vanilla"
        synthesizer = state.fresh_agents().synthesizer if uses_vanilla else None
        result = resynthesize(
            tree, [NodeEdit(node_id, p_true=patch.p_true,
                            statement=patch.statement)],
            synthesizer=synthesizer, config=config)
        return result.tree, result.delta

    old_values = {nid: n.p_true for nid, n in tree.nodes.items()}
    if patch.remove:
        if node_id == tree.root:
            raise InvalidInput("cannot remove the root")
        parent_id = tree.parent_of(node_id)
        parent = tree.node(parent_id)
        if len(parent.children) <= 1:
            raise InvalidInput("cannot remove the last child of a node")
        drop = set()
        stack = [node_id]
        while stack:
            nid = stack.pop()
            stack.extend(tree.node(nid).children)
            drop.add(nid)
        nodes = {nid: n for nid, n in tree.nodes.items() if nid not in drop}
        nodes[parent_id] = dataclasses.replace(
            parent, children=[c for c in parent.children if c != node_id])
        tree = PropositionTree(root=tree.root, nodes=nodes,
                               created_at=tree.created_at,
                               config_snapshot=tree.config_snapshot)
        seed = parent_id
    else:
        children = {cid: spec.statement
                    for cid, spec in patch.add_children.items()}
        tree = add_children(tree, node_id, children,
                            causality="analyst addition")
        for cid, spec in patch.add_children.items():
            if not 0.0 <= spec.p_true <= 1.0:
                raise InvalidInput(f"child {cid}: p_true outside [0, 1]")
            node = tree.node(cid)
            tree = tree.with_node(dataclasses.replace(
                node, p_true=spec.p_true, status="grounded",
                report="analyst assumption"))
        seed = node_id

    # compute_dirty_set gives proper ancestors; the structurally changed
    # node itself must be re-synthesized too (its child set changed).
    dirty = [seed] + compute_dirty_set(tree, [seed])
    synthesizer = state.fresh_agents().synthesizer
    if synthesizer is None and config.rule != "average":
        raise InvalidInput("structural edits need a synthesizer agent")
    new_tree, _calls = synthesize_dirty(tree, dirty, synthesizer, config)
    return new_tree, build_delta(old_values, new_tree)


# ---------------------------------------------------------------------------
# App factory


def create_app(config: ServiceConfig) -> FastAPI:
    state = ServiceState(config)
    app = FastAPI(title="softprop", version="0.1.0")
    app.state.service = state

    @app.exception_handler(RequestValidationError)
    async def bad_schema(_request: Request, exc: RequestValidationError):
        return _error(400, f"schema: {exc.errors()[:3]}")

    @app.post(f"{API_PREFIX}/runs", status_code=202)
    def post_run(body: RunRequest):
        if (body.query is None) == (body.event is None):
            return _error(400, "provide exactly one of query or event")
        try:
            run_config = state.run_config(body.config)
        except (InvalidConfig, TypeError) as exc:
            return _error(400, str(exc))
        run_id = new_id("run")
        record = {
            "run_id": run_id,
            "query": body.query or (body.event or {}).get("description", ""),
            "config": {**state.config.run, **(body.config or {})},
            "status": "queued",
            "tree_ref": None,
            "manifest": None,
            "error": None,
            "sessions": [],
            "snapshots": {},
            "created_at": state.clock(),
        }
        state.store.put_run(record)
        state.store.append_index({"run_id": run_id, "query": record["query"],
                                  "created_at": record["created_at"]})
        state.executor.submit(_execute_run, state, run_id, body)
        return {"run_id": run_id, "status": "queued",
                "config": run_config.snapshot()}

    @app.get(f"{API_PREFIX}/runs/{{run_id}}")
    def get_run(run_id: str):
        try:
            return state.store.get_run(run_id)
        except NotFound as exc:
            return _error(404, str(exc))

    @app.get(f"{API_PREFIX}/trees/{{ref}}")
    def get_tree(ref: str):
        try:
            return state.store.get_doc(ref)
        except NotFound as exc:
            return _error(404, str(exc))
        except SoftpropError as exc:
            return _error(500, str(exc))

    @app.post(f"{API_PREFIX}/runs/{{run_id}}/sessions", status_code=201)
    def post_session(run_id: str):
        try:
            record = state.store.get_run(run_id)
        except NotFound as exc:
            return _error(404, str(exc))
        if record["status"] != "done" or not record.get("tree_ref"):
            return _error(409, "run is not done; sessions need a synthesized tree")
        session_id = new_id("session")
        session = {
            "session_id": session_id,
            "run_id": run_id,
            "base_tree_ref": record["tree_ref"],
            "current_tree_ref": record["tree_ref"],
            "edit_log": [],
            "created_at": state.clock(),
            "committed": {},
        }
        state.store.put_session(session)
        record["sessions"] = record.get("sessions", []) + [session_id]
        state.store.put_run(record)
        return {"session_id": session_id, "base_tree_ref": record["tree_ref"]}

    @app.patch(f"{API_PREFIX}/runs/{{run_id}}/nodes/{{node_id}}")
    def patch_baseline(run_id: str, node_id: str):
        return _error(409, "baseline trees are immutable; create a session "
                           f"via POST {API_PREFIX}/runs/{run_id}/sessions")

    @app.patch(f"{API_PREFIX}/sessions/{{session_id}}/nodes/{{node_id}}")
    def patch_node(session_id: str, node_id: str, patch: PatchRequest):
        try:
            session = state.store.get_session(session_id)
        except NotFound as exc:
            return _error(404, str(exc))
        with state.session_lock(session_id):
            session = state.store.get_session(session_id)
            try:
                new_tree, delta = _apply_patch(state, session, node_id, patch)
            except NotFound as exc:
                return _error(404, str(exc))
            except (InvalidInput, SoftpropError) as exc:
                return _error(422, str(exc))
            new_ref = state.store.put_doc(tree_to_doc(new_tree))
            session["current_tree_ref"] = new_ref
            session["edit_log"] = session["edit_log"] + [{
                "node_id": node_id,
                "patch": patch.model_dump(exclude_none=True),
            }]
            state.store.put_session(session)
        return {
            "tree_ref": new_ref,
            "delta": [{"node_id": d.node_id, "old_p_true": d.old_p_true,
                       "new_p_true": d.new_p_true} for d in delta],
        }

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/commit")
    def commit_session(session_id: str, body: CommitRequest):
        try:
            session = state.store.get_session(session_id)
        except NotFound as exc:
            return _error(404, str(exc))
        name = body.name or f"snapshot-{len(session.get('committed', {})) + 1}"
        with state.session_lock(session_id):
            session = state.store.get_session(session_id)
            ref = session["current_tree_ref"]
            session.setdefault("committed", {})[name] = ref
            state.store.put_session(session)
            record = state.store.get_run(session["run_id"])
            record.setdefault("snapshots", {})[name] = ref
            state.store.put_run(record)
        return {"name": name, "tree_ref": ref}

    @app.get(f"{API_PREFIX}/runs/{{run_id}}/metrics")
    def run_metrics(run_id: str, events: str = Query(...)):
        try:
            record = state.store.get_run(run_id)
        except NotFound as exc:
            return _error(404, str(exc))
        manifest = record.get("manifest") or {}
        predictions = manifest.get("predictions") or {}
        event = record.get("event")
        if not predictions or not event:
            return _error(400, "run carries no event predictions")
        try:
            with open(events, "r", encoding="utf-8") as fh:
                tasks, _issues = load_events(fh)
        except OSError as exc:
            return _error(400, f"cannot read events file: {exc}")
        task = next((t for t in tasks if t.id == str(event.get("id"))), None)
        if task is None:
            return _error(404, f"event {event.get('id')!r} not in events file")
        try:
            row = score_event(task, Prediction(task_id=task.id,
                                               p_true=predictions))
        except SoftpropError as exc:
            return _error(422, str(exc))
        return aggregate([row]).to_doc()

    return app

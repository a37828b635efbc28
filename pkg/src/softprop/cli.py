"""Command-line entry points.

Exit codes: 0 success, 2 validation problem (bad flags, bad config, bad
input documents), 3 agent failure (retries exhausted, backend down),
4 I/O problem (missing or unreadable files, store corruption).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bayes import to_bayes_net, wmc_probability
from .canonical import canonical_dumps, canonical_loads
from .errors import (AgentExhausted, IntegrityError, RunFailed, SoftpropError,
                     Transport)
from .evalharness import (calibrate_threshold, load_events, load_predictions,
                          score_batch, threshold_accuracy)
from .orchestrator import NodeEdit, RunConfig, resynthesize, run_detailed
from .records import LinearRecord, LogicRecord, record_from_wire
from .rules import sensitivity_grid
from .simlab import (NoiseModel, SyntheticTreeSpec, emit_plot_data,
                     monte_carlo_bias_variance, robustness_sweep,
                     scalability_benchmark)
from .service import ServiceConfig, build_agent_suite, create_app
from .tree import deserialize_tree, serialize_tree, tree_to_doc

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_AGENT = 3
EXIT_IO = 4


def _load_json(path: str):
    return canonical_loads(Path(path).read_bytes())


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _service_config(args) -> ServiceConfig:
    if not args.config:
        raise SoftpropError("--config FILE is required for this command")
    return ServiceConfig.from_file(args.config)


def cmd_run(args) -> int:
    service_config = _service_config(args)
    run_overrides = dict(service_config.run)
    if args.seed is not None:
        run_overrides["seed"] = args.seed
    config = RunConfig.from_dict(run_overrides)
    agents = build_agent_suite(service_config.agents)
    clock = (lambda: service_config.created_at) if service_config.created_at \
        else None
    result = run_detailed(args.query, agents, config, clock=clock)
    out = _out_dir(args)
    tree_path = out / "tree.json"
    tree_path.write_bytes(serialize_tree(result.tree))
    (out / "manifest.json").write_text(
        canonical_dumps(result.manifest.to_doc()), encoding="utf-8")
    root = result.tree.node(result.tree.root)
    print(f"root p_true: {root.p_true:.4f}")
    print(f"tree: {tree_path}")
    return EXIT_OK


def cmd_resynthesize(args) -> int:
    tree = deserialize_tree(Path(args.tree).read_bytes())
    edits_doc = _load_json(args.edits)
    edits = [NodeEdit(node_id=e["node_id"], p_true=e.get("p_true"),
                      statement=e.get("statement")) for e in edits_doc]
    result = resynthesize(tree, edits)
    out = _out_dir(args)
    (out / "tree.resynthesized.json").write_bytes(serialize_tree(result.tree))
    delta_doc = [{"node_id": d.node_id, "old_p_true": d.old_p_true,
                  "new_p_true": d.new_p_true} for d in result.delta]
    (out / "delta.json").write_text(canonical_dumps(delta_doc),
                                    encoding="utf-8")
    for entry in delta_doc:
        print(f"{entry['node_id']}: {entry['old_p_true']} -> "
              f"{entry['new_p_true']}")
    if not delta_doc:
        print("no changes")
    return EXIT_OK


def _synthetic_spec(doc: dict, seed_override: int | None) -> SyntheticTreeSpec:
    spec = dict(doc.get("synthetic", {}))
    if seed_override is not None:
        spec["seed"] = seed_override
    return SyntheticTreeSpec(**spec)


def cmd_simulate(args) -> int:
    doc = _load_json(args.spec)
    out = _out_dir(args)
    seed = args.seed if args.seed is not None else doc.get("seed", 0)
    runs = int(doc.get("runs", 10_000))

    if args.experiment == "bias-variance":
        spec = _synthetic_spec(doc, args.seed)
        noise_doc = doc.get("noise", {"kind": "uncertain", "alpha": 0.2})
        report = monte_carlo_bias_variance(
            spec, NoiseModel(**noise_doc), rule=doc.get("rule", "linear"),
            runs=runs, seed=seed)
        csv_text = emit_plot_data(report)
        path = out / "bias_variance.csv"
        summary = (f"rule={report.rule} kind={report.noise_kind} "
                   f"alpha={report.alpha} bias={report.bias:.6f} "
                   f"variance={report.variance:.6f} mse={report.mse:.6f} "
                   f"residual={report.residual:.2e}")
    elif args.experiment == "robustness":
        spec = _synthetic_spec(doc, args.seed)
        rows = robustness_sweep(
            spec,
            rules=tuple(doc.get("rules", ("linear", "logic_and"))),
            alphas=tuple(doc.get("alphas", (0.0, 0.1, 0.2, 0.3))),
            kinds=tuple(doc.get("kinds", ("normal", "uncertain", "reverse"))),
            runs=runs, seed=seed)
        csv_text = emit_plot_data(rows)
        path = out / "robustness.csv"
        summary = f"{len(rows)} cells"
    elif args.experiment == "scalability":
        rows = scalability_benchmark(
            branching=int(doc.get("branching", 3)),
            depths=tuple(doc.get("depths", (1, 2, 3))),
            grounder_latency_s=float(doc.get("grounder_latency_s", 0.05)),
            workers=int(doc.get("workers", 64)),
            seed=seed)
        csv_text = emit_plot_data(rows)
        path = out / "scalability.csv"
        summary = " ".join(f"n={r.recursion_depth}:{r.wall_ms:.0f}ms"
                           f"/{r.node_count}nodes" for r in rows)
    else:  # sensitivity-grid
        record_doc = doc.get("record")
        rule = doc.get("rule", "linear")
        if rule == "simple_logic":
            record = LogicRecord(formula_text=record_doc["formula"],
                                 assumption_detail="",
                                 assumption_probability=float(
                                     record_doc.get("assumption", 0.5)))
        else:
            record = record_from_wire({"rule": rule, **record_doc})
        grid = sensitivity_grid(rule, record, int(doc.get("resolution", 21)))
        csv_text = emit_plot_data(grid)
        path = out / "sensitivity_grid.csv"
        summary = f"{len(grid)} lattice points"

    path.write_text(csv_text, encoding="utf-8")
    print(f"{args.experiment}: {summary}")
    print(f"csv: {path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    with open(args.events, "r", encoding="utf-8") as fh:
        tasks, event_issues = load_events(fh)
    with open(args.predictions, "r", encoding="utf-8") as fh:
        predictions, pred_issues = load_predictions(fh)
    for issue in event_issues + pred_issues:
        print(f"lint: line {issue.line_no}: {issue.message}", file=sys.stderr)
    report = score_batch(tasks, predictions)
    doc = report.to_doc()

    if args.calibrate or args.threshold is not None:
        if args.calibrate:
            pairs_doc = _load_json(args.calibrate)
            pairs = [(float(p["p_true"]), bool(p["label"])) for p in pairs_doc]
            delta = calibrate_threshold(pairs)
            doc["delta"] = delta
            doc["calibration_accuracy"] = threshold_accuracy(pairs, delta)
        else:
            delta = args.threshold
            doc["delta"] = delta
        binary_pairs = []
        by_task = {p.task_id: p for p in predictions}
        for task in tasks:
            if len(task.options) != 2:
                continue
            first = task.options[0]
            best = max(o.dollar_value for o in task.options)
            binary_pairs.append((by_task[task.id].p_true[first.id],
                                 first.dollar_value == best))
        if binary_pairs:
            doc["threshold_accuracy"] = threshold_accuracy(binary_pairs, delta)

    out = _out_dir(args)
    (out / "metrics.json").write_text(canonical_dumps(doc), encoding="utf-8")
    (out / "metrics.csv").write_text(
        emit_plot_data(report.rows,
                       columns=("task_id", "accuracy", "hard", "soft", "brier",
                                "confidence", "tie_flag")),
        encoding="utf-8")
    formatted = report.formatted()
    print(" ".join(f"{k}={v}" for k, v in formatted.items()))
    return EXIT_OK


def cmd_export_bayes(args) -> int:
    tree = deserialize_tree(Path(args.tree).read_bytes())
    exports = {}
    for nid in sorted(tree.nodes):
        node = tree.node(nid)
        if not node.children or not isinstance(node.synthesis, LinearRecord):
            continue
        priors = {cid: tree.node(cid).p_true or 0.0 for cid in node.children}
        export = to_bayes_net(node.synthesis, priors,
                              normalization=args.normalization)
        exports[nid] = {
            "child_priors": export.child_priors,
            "cpd": export.cpd,
            "normalization_applied": export.normalization_applied,
            "method": export.method,
            "marginal": wmc_probability(export),
        }
    out = _out_dir(args)
    path = out / "bayes_export.json"
    path.write_text(canonical_dumps(exports), encoding="utf-8")
    print(f"exported {len(exports)} CPD tables to {path}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn
    config = _service_config(args)
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softprop",
        description="Soft propositional reasoning engine")
    parser.add_argument("--config", help="configuration document (JSON)")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", help="output directory (default: cwd)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="analyze, ground, and synthesize a query")
    p_run.add_argument("query")
    p_run.set_defaults(fn=cmd_run)

    p_res = sub.add_parser("resynthesize",
                           help="apply edits to a tree document and "
                                "recompute affected branches")
    p_res.add_argument("--tree", required=True)
    p_res.add_argument("--edits", required=True)
    p_res.set_defaults(fn=cmd_resynthesize)

    p_sim = sub.add_parser("simulate", help="synthetic experiments")
    p_sim.add_argument("experiment",
                       choices=("bias-variance", "robustness", "scalability",
                                "sensitivity-grid"))
    p_sim.add_argument("--spec", required=True,
                       help="experiment spec document (JSON)")
    p_sim.set_defaults(fn=cmd_simulate)

    p_eval = sub.add_parser("evaluate", help="score predictions on events")
    p_eval.add_argument("--events", required=True)
    p_eval.add_argument("--predictions", required=True)
    group = p_eval.add_mutually_exclusive_group()
    group.add_argument("--threshold", type=float, default=None)
    group.add_argument("--calibrate",
                       help="validation pairs document for threshold search")
    p_eval.set_defaults(fn=cmd_evaluate)

    p_exp = sub.add_parser("export-bayes",
                           help="emit CPD tables for every linear node")
    p_exp.add_argument("--tree", required=True)
    p_exp.add_argument("--normalization", default="none",
                       choices=("none", "minmax", "softmax"))
    p_exp.set_defaults(fn=cmd_export_bayes)

    p_srv = sub.add_parser("serve", help="start the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (AgentExhausted, RunFailed, Transport) as exc:
        print(f"agent failure: {exc}", file=sys.stderr)
        return EXIT_AGENT
    except (OSError, IntegrityError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SoftpropError, KeyError, TypeError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

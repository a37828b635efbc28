"""Acceptance gate: every criterion at its stated tolerance, one printed
pass/fail line each. Run with ``pytest tests/test_acceptance.py -v -s``.
"""

from __future__ import annotations

import contextlib
import dataclasses
import math
import random
import time
from pathlib import Path

import numpy as np
import pytest

from softprop.agents.scripted import load_fixture_file
from softprop.bayes import to_bayes_net, wmc_probability
from softprop.errors import SoftpropError
from softprop.evalharness import (EventOption, EventTask, Prediction,
                                  aggregate, calibrate_threshold, score_event,
                                  threshold_accuracy)
from softprop.formula import (And, Not, Or, Var, eval_formula,
                              exact_boolean_probability, formula_to_text,
                              formula_vars)
from softprop.orchestrator import (AgentSuite, NodeEdit, RunConfig,
                                   binary_complement, resynthesize,
                                   run_detailed, synthesize_dirty)
from softprop.records import LinearRecord, LogicRecord, NoisyOrRecord
from softprop.rules import linear_apply, logic_apply, noisy_or_apply, sensitivity
from softprop.simlab import (NoiseModel, SyntheticTreeSpec,
                             generate_synthetic_tree, monte_carlo_bias_variance,
                             robustness_sweep, scalability_benchmark)
from softprop.tree import (PropositionTree, node_sort_key, serialize_tree)

from conftest import FIXED_CLOCK

FIXTURE_PATH = Path(__file__).parent / "fixtures" / "golden_agents.json"
QUERY = "Long stock NVDA and hold for one year is the best option"


@contextlib.contextmanager
def criterion(number: int, name: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number:2d} [FAIL] {name}")
        raise
    print(f"ACCEPTANCE {number:2d} [PASS] {name}")


def golden_agents() -> AgentSuite:
    agents = load_fixture_file(str(FIXTURE_PATH))
    return AgentSuite(analyzer=agents["analyzer"], grounder=agents["grounder"],
                      synthesizer=agents["synthesizer"])


def fixed_clock() -> str:
    return FIXED_CLOCK


def test_01_golden_tree_fixture():
    with criterion(1, "golden-tree fixture replays published values"):
        start = time.perf_counter()
        result = run_detailed(QUERY, golden_agents(), RunConfig(l_max=10),
                              clock=fixed_clock)
        elapsed = time.perf_counter() - start
        tree = result.tree
        assert tree.node("P0").p_true == pytest.approx(0.8720, abs=1e-3)
        assert tree.node("P1").p_true == pytest.approx(0.7896, abs=1e-3)
        assert tree.node("P1.1").p_true == pytest.approx(0.855, abs=1e-3)
        assert elapsed < 1.0, f"scripted replay took {elapsed:.2f}s"


def test_02_wmc_equivalence():
    with criterion(2, "WMC enumeration equals the linear rule (1000 records)"):
        rng = random.Random(20_240_601)
        start = time.perf_counter()
        for _ in range(1000):
            k = rng.randint(1, 10)
            raw = [rng.random() for _ in range(k + 1)]
            scale = rng.uniform(0.1, 1.0) / sum(raw)
            beta0, *betas = [v * scale for v in raw]
            record = LinearRecord(
                beta0=beta0,
                betas={f"P{j + 1}": b for j, b in enumerate(betas)})
            priors = {f"P{j + 1}": rng.random() for j in range(k)}
            export = to_bayes_net(record, priors)
            direct = record.beta0 + sum(record.betas[c] * priors[c]
                                        for c in priors)
            assert abs(wmc_probability(export) - direct) <= 1e-9
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"took {elapsed:.2f}s"


def _random_formula(rng: random.Random, max_vars: int = 4):
    n = rng.randint(1, max_vars)
    nodes = [Var(f"P{i + 1}") for i in range(n)]
    while len(nodes) > 1:
        i = rng.randrange(len(nodes) - 1)
        left, right = nodes[i], nodes[i + 1]
        if rng.random() < 0.3:
            left = Not(left)
        op = And if rng.random() < 0.5 else Or
        nodes[i:i + 2] = [op(left, right)]
    if rng.random() < 0.3:
        nodes[0] = Not(nodes[0])
    return nodes[0]


def _central_difference(fn, values: dict[str, float], name: str,
                        h: float = 1e-5) -> float:
    hi = dict(values)
    lo = dict(values)
    hi[name] += h
    lo[name] -= h
    return (fn(hi) - fn(lo)) / (2 * h)


def test_03_sensitivity_matches_finite_differences():
    with criterion(3, "analytic sensitivities match central differences"):
        rng = random.Random(3)
        checked = 0
        while checked < 500:
            family = rng.choice(("linear", "simple_logic", "noisy_or"))
            k = rng.randint(1, 4)
            ids = [f"P{i + 1}" for i in range(k)]
            values = {cid: rng.uniform(0.05, 0.95) for cid in ids}
            if family == "linear":
                raw = [rng.random() for _ in range(k)]
                scale = rng.uniform(0.2, 0.85) / max(sum(raw), 1e-9)
                record = LinearRecord(
                    beta0=rng.uniform(0.0, 0.1),
                    betas={cid: r * scale for cid, r in zip(ids, raw)})
                fn = lambda v: linear_apply(record, v)  # noqa: E731
            elif family == "noisy_or":
                record = NoisyOrRecord(
                    beta0=rng.uniform(0.0, 0.9),
                    betas={cid: rng.uniform(0.0, 1.0) for cid in ids})
                fn = lambda v: noisy_or_apply(record, v)  # noqa: E731
            else:
                ast = _random_formula(rng, max_vars=k)
                record = LogicRecord(formula_to_text(ast), "", 0.5)
                names = sorted(formula_vars(ast))
                values = {name: rng.uniform(0.05, 0.95) for name in names}
                fn = lambda v: eval_formula(ast, v)  # noqa: E731
            partials = sensitivity(family, record, values)
            for name in values:
                fd = _central_difference(fn, values, name)
                assert abs(partials.get(name, 0.0) - fd) <= 1e-6, (
                    family, name, partials.get(name), fd)
                checked += 1
        # Linear sensitivity is the same at any two points, exactly.
        record = LinearRecord(beta0=0.05, betas={"P1": 0.3, "P2": -0.4})
        a = sensitivity("linear", record, {"P1": 0.11, "P2": 0.93})
        b = sensitivity("linear", record, {"P1": 0.71, "P2": 0.05})
        assert a == b


def test_04_variance_law():
    with criterion(4, "root variance tracks sigma^2/K with slope -1"):
        start = time.perf_counter()
        alpha = 0.48  # leaf variance alpha/12 = 0.04 exactly at p = 0.5
        sigma2 = alpha / 12.0
        ks, variances = [], []
        for k in (2, 4, 8, 16):
            spec = SyntheticTreeSpec(depth=1, branching=k,
                                     leaf_values=[0.5] * k)
            report = monte_carlo_bias_variance(
                spec, NoiseModel("uncertain", alpha), rule="linear",
                runs=100_000, seed=1000 + k)
            assert report.variance == pytest.approx(sigma2 / k, rel=0.10), k
            ks.append(k)
            variances.append(report.variance)
        slope = float(np.polyfit(np.log(ks), np.log(variances), 1)[0])
        assert slope == pytest.approx(-1.0, abs=0.1)
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0, f"took {elapsed:.2f}s"


def test_05_error_decomposition_identity():
    with criterion(5, "mse - bias^2 - variance = 0 to 1e-9 on every report"):
        rng = random.Random(5)
        for _ in range(60):
            spec = SyntheticTreeSpec(depth=rng.randint(0, 2),
                                     branching=rng.randint(2, 4),
                                     weight_scheme=rng.choice(
                                         ("equal", "dirichlet")),
                                     seed=rng.randrange(10_000))
            noise = NoiseModel(rng.choice(("normal", "uncertain", "reverse")),
                               rng.random())
            report = monte_carlo_bias_variance(
                spec, noise, rule=rng.choice(("linear", "average")),
                runs=1000, seed=rng.randrange(10_000))
            assert report.residual <= 1e-9


def test_06_robustness_ordering():
    with criterion(6, "linear rule beats the AND-chain under reverse noise"):
        spec = SyntheticTreeSpec(depth=1, branching=4, leaf_values=[0.9] * 4)
        rows = robustness_sweep(spec, rules=("linear", "logic_and"),
                                alphas=(0.3,), kinds=("reverse",),
                                runs=10_000, seed=6)
        by_rule = {r.rule: r.mse for r in rows}
        assert by_rule["linear"] < by_rule["logic_and"]
        assert by_rule["logic_and"] - by_rule["linear"] > 0.0

        alphas = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
        sweep = robustness_sweep(spec,
                                 rules=("linear", "average", "logic_and",
                                        "logic_or", "noisy_or"),
                                 alphas=alphas, runs=100_000, seed=7)
        series: dict[tuple[str, str], list[float]] = {}
        for row in sweep:
            series.setdefault((row.rule, row.kind), []).append(row.mse)
        for key, mses in series.items():
            for lo, hi in zip(mses, mses[1:]):
                assert hi >= lo - 1e-12, (key, mses)


def test_07_scalability():
    with criterion(7, "work grows ~K^n while wall time stays near-linear"):
        start = time.perf_counter()
        rows = scalability_benchmark(branching=3, depths=(1, 2, 3, 4),
                                     grounder_latency_s=0.05, workers=64,
                                     seed=0)
        for row, depth in zip(rows, (1, 2, 3, 4)):
            assert row.leaf_count == 3 ** depth
            assert row.grounder_calls == 3 ** depth
        for prev, cur in zip(rows, rows[1:]):
            node_ratio = cur.node_count / prev.node_count
            time_ratio = cur.wall_ms / prev.wall_ms
            assert node_ratio >= 3.0
            assert time_ratio <= 2.0, (prev, cur)
        elapsed = time.perf_counter() - start
        assert elapsed < 120.0, f"took {elapsed:.2f}s"


def _synthesized_from_spec(spec: SyntheticTreeSpec) -> PropositionTree:
    """A fully synthesized all-linear tree: leaves at their ground truths,
    internal values from replaying the stored records bottom-up."""
    synthetic = generate_synthetic_tree(spec)
    tree = synthetic.tree
    for nid, value in synthetic.leaf_gt.items():
        node = tree.node(nid)
        tree = tree.with_node(dataclasses.replace(
            node, p_true=value, status="grounded", report="synthetic"))
    internal = sorted((nid for nid in tree.nodes if tree.node(nid).children),
                      key=lambda nid: (-tree.depth_of(nid), node_sort_key(nid)))
    tree, _ = synthesize_dirty(tree, internal, None, RunConfig())
    for nid in internal:
        tree = tree.with_node(dataclasses.replace(tree.node(nid),
                                                  status="synthesized"))
    return tree


def _full_replay(tree: PropositionTree, edits: list[NodeEdit]) -> PropositionTree:
    """Independent from-scratch pass: apply the edits, then replay every
    internal record bottom-up."""
    for edit in edits:
        node = tree.node(edit.node_id)
        tree = tree.with_node(dataclasses.replace(
            node, p_true=edit.p_true, report="analyst override"))
    internal = sorted((nid for nid in tree.nodes if tree.node(nid).children),
                      key=lambda nid: (-tree.depth_of(nid), node_sort_key(nid)))
    tree, _ = synthesize_dirty(tree, internal, None, RunConfig())
    return tree


def test_08_resynthesis_soundness():
    with criterion(8, "incremental resynthesis equals full recomputation"):
        rng = random.Random(8)
        for round_no in range(200):
            spec = SyntheticTreeSpec(depth=rng.randint(1, 3),
                                     branching=rng.randint(2, 3),
                                     weight_scheme="dirichlet",
                                     seed=round_no)
            tree = _synthesized_from_spec(spec)
            leaf_ids = [nid for nid in tree.nodes if tree.node(nid).is_leaf()]
            edited = rng.sample(leaf_ids, k=min(len(leaf_ids),
                                                rng.randint(1, 3)))
            edits = [NodeEdit(nid, p_true=rng.random()) for nid in edited]
            result = resynthesize(tree, edits)
            expect_dirty = set()
            for nid in edited:
                expect_dirty.update(tree.ancestors_of(nid))
            assert result.synthesizer_calls == len(expect_dirty)
            full = _full_replay(tree, edits)
            assert serialize_tree(result.tree) == serialize_tree(full)

        # Published depth-1 fixture: edit P2 from 0.9040 to 1.0.
        agents = golden_agents()
        depth1 = run_detailed(QUERY, agents, RunConfig(l_max=4),
                              clock=fixed_clock).tree
        out = resynthesize(depth1, [NodeEdit("P2", p_true=1.0)])
        assert depth1.node("P0").p_true == pytest.approx(0.872, abs=1e-3)
        assert out.tree.node("P0").p_true == pytest.approx(0.9008, abs=1e-3)


def test_09_determinism_across_concurrency():
    with criterion(9, "byte-identical documents for caps {1, 4, 20}"):
        docs = set()
        for cap in (1, 4, 20):
            result = run_detailed(QUERY, golden_agents(),
                                  RunConfig(l_max=10, max_concurrent_prove=cap),
                                  clock=fixed_clock)
            docs.add(serialize_tree(result.tree))
        assert len(docs) == 1


def _metrics_fixture() -> tuple[list[EventTask], list[Prediction]]:
    def task(tid, values):
        return EventTask(id=tid, description="d", current_date="2024-06-01",
                         options=[EventOption(id=k, statement=k, dollar_value=v)
                                  for k, v in values.items()])

    tasks = [
        task("E1", {"A": 2.0, "B": 1.0}),
        task("E2", {"A": 1.0, "B": 3.0}),
        task("E3", {"A": 1.0, "B": 2.0, "C": 3.0}),
        task("E4", {"A": 5.0, "B": 1.0}),
        task("E5", {"A": 1.0, "B": 2.0}),
    ]
    p2 = binary_complement(0.3)
    predictions = [
        Prediction("E1", {"A": 0.6, "B": 0.4}),
        Prediction("E2", {"A": 0.3, "B": p2}),
        Prediction("E3", {"A": 0.2, "B": 0.3, "C": 0.5}),
        Prediction("E4", {"A": 0.2, "B": 0.8}),
        Prediction("E5", {"A": 0.5, "B": 0.5}),
    ]
    return tasks, predictions


def test_10_metrics_oracle():
    with criterion(10, "hand-computed 5-event metrics match exactly"):
        tasks, predictions = _metrics_fixture()
        rows = [score_event(t, p) for t, p in zip(tasks, predictions)]
        expected = {
            # task: (accuracy, hard, soft, brier), each derived by hand from
            # min-max normalized values and sum-normalized probabilities.
            "E1": (1.0, 1.0, 0.6, ((0.6 - 1) ** 2 + 0.4 ** 2) / 2),
            "E2": (1.0, 1.0, 0.7, (0.3 ** 2 + (0.7 - 1) ** 2) / 2),
            "E3": (1.0, 1.0, 0.3 * 0.5 + 0.5 * 1.0,
                   (0.2 ** 2 + 0.3 ** 2 + (0.5 - 1) ** 2) / 3),
            "E4": (0.0, 0.0, 0.2, ((0.2 - 1) ** 2 + 0.8 ** 2) / 2),
            "E5": (0.0, 0.0, 0.5, (0.5 ** 2 + (0.5 - 1) ** 2) / 2),
        }
        for row in rows:
            acc, hard, soft, bs = expected[row.task_id]
            assert row.accuracy == acc, row.task_id
            assert row.hard == pytest.approx(hard, abs=1e-12)
            assert row.soft == pytest.approx(soft, abs=1e-12)
            assert row.brier == pytest.approx(bs, abs=1e-12)
        report = aggregate(rows)
        assert report.accuracy == pytest.approx(0.6, abs=1e-12)
        assert report.hard == pytest.approx(0.6, abs=1e-12)
        assert report.soft == pytest.approx((0.6 + 0.7 + 0.65 + 0.2 + 0.5) / 5,
                                            abs=1e-12)
        # Binary complement is exact.
        assert binary_complement(0.3) == 0.7
        assert binary_complement(1.0) == 0.0
        # Threshold calibration on the separable fixture.
        pairs = [(0.2, False), (0.8, True)]
        delta = calibrate_threshold(pairs)
        assert delta == pytest.approx(0.5)
        assert threshold_accuracy(pairs, delta) == 1.0


def _random_read_once(rng: random.Random, max_vars: int = 10):
    n = rng.randint(1, max_vars)
    nodes = [Var(f"P{i + 1}") for i in range(n)]
    while len(nodes) > 1:
        i = rng.randrange(len(nodes) - 1)
        left, right = nodes[i], nodes[i + 1]
        if rng.random() < 0.3:
            left = Not(left)
        if rng.random() < 0.3:
            right = Not(right)
        op = And if rng.random() < 0.5 else Or
        nodes[i:i + 2] = [op(left, right)]
    return nodes[0]


def test_11_read_once_fuzzy_exactness():
    with criterion(11, "read-once fuzzy evaluation equals enumeration"):
        rng = random.Random(11)
        for _ in range(500):
            ast = _random_read_once(rng)
            names = sorted(formula_vars(ast))
            values = {name: rng.random() for name in names}
            fuzzy = eval_formula(ast, values)
            exact = exact_boolean_probability(ast, values)
            assert abs(fuzzy - exact) <= 1e-12

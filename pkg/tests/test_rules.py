from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from softprop.errors import (CoefficientError, InvalidInput, SchemaMismatch,
                             Unsupported)
from softprop.records import (LinearRecord, LogicRecord, NoisyOrRecord,
                              VanillaRecord, record_from_wire)
from softprop.rules import (average_apply, linear_apply, logic_apply,
                            noisy_or_apply, propagate_noise_variance,
                            sensitivity, sensitivity_grid, validate_logic)

from conftest import DEPTH1_BETAS, DEPTH1_VALUES


class TestLinearApply:
    def test_published_root_formula(self):
        beta0, betas = DEPTH1_BETAS
        record = LinearRecord(beta0=beta0, betas=dict(betas))
        assert linear_apply(record, DEPTH1_VALUES) == pytest.approx(0.8720, abs=1e-3)

    def test_near_identity_pass_through(self):
        record = LinearRecord(beta0=0.0, betas={"P1": 0.999999})
        assert linear_apply(record, {"P1": 0.5}) == pytest.approx(0.4999995)

    def test_negative_intercept_three_children(self):
        record = LinearRecord(beta0=-0.05,
                              betas={"P1": 0.40, "P2": 0.35, "P3": 0.25})
        values = {"P1": 0.90, "P2": 0.90, "P3": 0.92}
        assert linear_apply(record, values) == pytest.approx(0.855, abs=1e-9)

    def test_missing_child_key(self):
        record = LinearRecord(beta0=0.0, betas={"P1": 0.5, "P2": 0.4})
        with pytest.raises(SchemaMismatch):
            linear_apply(record, {"P1": 0.5})

    def test_extra_child_key(self):
        record = LinearRecord(beta0=0.0, betas={"P1": 0.5})
        with pytest.raises(SchemaMismatch):
            linear_apply(record, {"P1": 0.5, "P2": 0.1})

    def test_out_of_range_result(self):
        record = LinearRecord(beta0=-0.1, betas={"P1": 0.05})
        with pytest.raises(CoefficientError):
            linear_apply(record, {"P1": 0.5})

    def test_weight_magnitude_bound(self):
        record = LinearRecord(beta0=0.0, betas={"P1": 1.0})
        with pytest.raises(CoefficientError):
            linear_apply(record, {"P1": 0.5})

    def test_intercept_bound_configurable(self):
        record = LinearRecord(beta0=0.2, betas={"P1": 0.5})
        with pytest.raises(CoefficientError):
            linear_apply(record, {"P1": 0.5})
        assert linear_apply(record, {"P1": 0.5},
                            intercept_bound=0.3) == pytest.approx(0.45)

    def test_intercept_at_bound_accepted(self):
        record = LinearRecord(beta0=0.1, betas={"P1": 0.5})
        assert linear_apply(record, {"P1": 0.5}) == pytest.approx(0.35)


class TestAverageApply:
    def test_symmetry(self):
        assert average_apply([0.2, 0.8]) == pytest.approx(0.5)

    def test_published_children_mean(self):
        assert average_apply(list(DEPTH1_VALUES.values())) == pytest.approx(0.845125)

    def test_empty_rejected(self):
        with pytest.raises(InvalidInput):
            average_apply([])

    def test_accepts_mapping(self):
        assert average_apply({"P1": 0.4, "P2": 0.6}) == pytest.approx(0.5)


class TestNoisyOr:
    def test_single_full_weight_pass_through(self):
        record = NoisyOrRecord(beta0=0.0, betas={"P1": 1.0})
        assert noisy_or_apply(record, {"P1": 0.7}) == pytest.approx(0.7)

    def test_two_child_example(self):
        record = NoisyOrRecord(beta0=0.1, betas={"P1": 0.4, "P2": 0.4})
        assert noisy_or_apply(record, {"P1": 0.5, "P2": 0.5}) == pytest.approx(0.424)

    def test_certain_cause(self):
        record = NoisyOrRecord(beta0=1.0, betas={"P1": 0.3, "P2": 0.9})
        assert noisy_or_apply(record, {"P1": 0.0, "P2": 0.4}) == pytest.approx(1.0)

    def test_coefficient_out_of_range(self):
        with pytest.raises(CoefficientError):
            noisy_or_apply(NoisyOrRecord(beta0=0.0, betas={"P1": 1.2}), {"P1": 0.5})
        with pytest.raises(CoefficientError):
            noisy_or_apply(NoisyOrRecord(beta0=-0.1, betas={"P1": 0.5}), {"P1": 0.5})

    def test_brute_force_activation_worlds(self):
        # Enumerate (b0, b1, c1, b2, c2) activation worlds directly.
        record = NoisyOrRecord(beta0=0.1, betas={"P1": 0.4, "P2": 0.7})
        values = {"P1": 0.5, "P2": 0.3}
        total = 0.0
        for w0 in (0, 1):
            p0 = record.beta0 if w0 else 1 - record.beta0
            for a1 in (0, 1):
                pa1 = record.betas["P1"] if a1 else 1 - record.betas["P1"]
                for c1 in (0, 1):
                    pc1 = values["P1"] if c1 else 1 - values["P1"]
                    for a2 in (0, 1):
                        pa2 = record.betas["P2"] if a2 else 1 - record.betas["P2"]
                        for c2 in (0, 1):
                            pc2 = values["P2"] if c2 else 1 - values["P2"]
                            fires = w0 or (a1 and c1) or (a2 and c2)
                            if fires:
                                total += p0 * pa1 * pc1 * pa2 * pc2
        assert noisy_or_apply(record, values) == pytest.approx(total, abs=1e-9)

    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)),
                    min_size=1, max_size=5),
           st.floats(0, 1), st.integers(0, 4), st.floats(0, 1))
    def test_monotone_in_weights_and_values(self, pairs, beta0, bump_idx, bump):
        betas = {f"P{i + 1}": b for i, (b, _) in enumerate(pairs)}
        values = {f"P{i + 1}": v for i, (_, v) in enumerate(pairs)}
        record = NoisyOrRecord(beta0=beta0, betas=betas)
        base = noisy_or_apply(record, values)
        key = f"P{(bump_idx % len(pairs)) + 1}"
        raised = dict(values)
        raised[key] = min(1.0, raised[key] + bump)
        assert noisy_or_apply(record, raised) >= base - 1e-12
        heavier = dict(betas)
        heavier[key] = min(1.0, heavier[key] + bump)
        assert noisy_or_apply(NoisyOrRecord(beta0=beta0, betas=heavier),
                              values) >= base - 1e-12


class TestValidateLogic:
    def test_prompt_shaped_formula_valid(self):
        record = LogicRecord("(P1 AND P2) OR (P3 AND NOT PA)", "ext", 0.5)
        assert validate_logic(record, {"P1", "P2", "P3"}) == []

    def test_missing_child(self):
        record = LogicRecord("P1 AND P3", "ext", 0.5)
        issues = validate_logic(record, {"P1", "P2", "P3"})
        assert [(i.code, i.variable) for i in issues] == [("MissingChild", "P2")]

    def test_unknown_variable(self):
        record = LogicRecord("P1 AND P2 AND P9", "ext", 0.5)
        issues = validate_logic(record, {"P1", "P2"})
        assert ("UnknownVariable", "P9") in [(i.code, i.variable) for i in issues]


class TestSensitivity:
    def test_linear_constant(self):
        record = LinearRecord(beta0=0.1, betas={"P1": 0.4, "P2": 0.4})
        a = sensitivity("linear", record, {"P1": 0.2, "P2": 0.9})
        b = sensitivity("linear", record, {"P1": 0.7, "P2": 0.1})
        assert a == b == {"P1": 0.4, "P2": 0.4}

    def test_and_cofactor(self):
        record = LogicRecord("P1 AND P2", "", 0.0)
        grad = sensitivity("simple_logic", record, {"P1": 0.2, "P2": 0.9})
        assert grad["P1"] == pytest.approx(0.9)

    def test_or_one_minus_cofactor(self):
        record = LogicRecord("P1 OR P2", "", 0.0)
        grad = sensitivity("simple_logic", record, {"P1": 0.2, "P2": 0.9})
        assert grad["P1"] == pytest.approx(0.1)

    def test_vanilla_unsupported(self):
        with pytest.raises(Unsupported):
            sensitivity("vanilla", VanillaRecord(), {"P1": 0.5})

    def test_noisy_or_partials(self):
        record = NoisyOrRecord(beta0=0.1, betas={"P1": 0.4, "P2": 0.7})
        values = {"P1": 0.5, "P2": 0.3}
        grad = sensitivity("noisy_or", record, values)
        assert grad["P1"] == pytest.approx(0.4 * 0.9 * (1 - 0.7 * 0.3))


class TestPropagateNoiseVariance:
    def test_linear_closed_form(self):
        record = LinearRecord(beta0=0.1, betas={"P1": 0.4, "P2": 0.4})
        out = propagate_noise_variance("linear", record, {"P1": 0.5, "P2": 0.5},
                                       {"P1": 0.01, "P2": 0.01})
        assert out == pytest.approx(0.0032)

    def test_and_at_corner(self):
        record = LogicRecord("P1 AND P2", "", 0.0)
        out = propagate_noise_variance("simple_logic", record,
                                       {"P1": 1.0, "P2": 1.0},
                                       {"P1": 0.003, "P2": 0.003})
        assert out == pytest.approx(0.006)

    def test_zero_sigma(self):
        record = LinearRecord(beta0=0.0, betas={"P1": 0.5})
        assert propagate_noise_variance("linear", record, {"P1": 0.5},
                                        {"P1": 0.0}) == 0.0


class TestSensitivityGrid:
    def test_linear_flat_plane(self):
        record = LinearRecord(beta0=0.1, betas={"P1": 0.4, "P2": 0.4})
        grid = sensitivity_grid("linear", record, 3)
        assert len(grid) == 9
        assert all(p.abs_partials == (0.4, 0.4) for p in grid)

    def test_and_corners(self):
        record = LogicRecord("P1 AND P2", "", 0.0)
        grid = sensitivity_grid("simple_logic", record, 2)
        by_input = {p.inputs: p.abs_partials for p in grid}
        assert by_input[(0.0, 0.0)] == (0.0, 0.0)
        assert by_input[(1.0, 1.0)] == (1.0, 1.0)
        assert by_input[(0.0, 1.0)] == (1.0, 0.0)

    def test_zero_resolution(self):
        record = LinearRecord(beta0=0.0, betas={"P1": 0.4, "P2": 0.4})
        with pytest.raises(InvalidInput):
            sensitivity_grid("linear", record, 0)

    def test_wrong_child_count(self):
        record = LinearRecord(beta0=0.0, betas={"P1": 0.4})
        with pytest.raises(Unsupported):
            sensitivity_grid("linear", record, 3)


class TestRecordWire:
    def test_linear_round_trip(self):
        record = LinearRecord(beta0=0.05, betas={"P1": 0.2, "P2": 0.3},
                              key_factor="kf")
        wire = record.to_wire()
        assert wire["beta"]["beta_0"] == 0.05
        back = record_from_wire(wire)
        assert back == record

    def test_logic_round_trip(self):
        record = LogicRecord("(P1 AND P2) OR PA", "detail", 0.8, "kf")
        assert record_from_wire(record.to_wire()) == record

    def test_vanilla_round_trip(self):
        record = VanillaRecord(key_factor="kf")
        assert record_from_wire(record.to_wire()) == record

    def test_bad_wire(self):
        with pytest.raises(SchemaMismatch):
            record_from_wire({"rule": "mystery"})
        with pytest.raises(SchemaMismatch):
            record_from_wire({"rule": "linear", "beta": {"P1": 0.5}})

"""Tests for joint tables, structural models and the effect oracles."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from app.causal import (
    CausalDiagram,
    Event,
    JointTable,
    Mechanism,
    MissingRole,
    PositivityViolation,
    ScopeMismatch,
    StructuralModel,
    UnknownVariable,
    Variable,
    ZeroSupport,
    adjustment_estimate,
    cell_bits,
    condition_table,
    crude_risk_difference,
    do_replace,
    joint,
    marginal,
    randomize,
    tau,
    tau_truncated,
    total_variation,
)
from app.enumeration import ModelClass, ParameterGrid
from tests.conftest import fig1_cell


def fig1_observed_oracle() -> dict[tuple[int, int, int], float]:
    """P(X, T, Y) of the canonical fig1 truth, summing U out by hand."""
    return {
        (x, t, y): sum(fig1_cell(u, x, t, y) for u in (0, 1))
        for x, t, y in itertools.product((0, 1), repeat=3)
    }


class TestJointTable:
    """Tests for JointTable construction and cell order"""

    def test_cell_order_first_variable_most_significant(self):
        """Row i of cell_bits is i written in binary"""
        bits = cell_bits(3)
        assert bits.shape == (8, 3)
        for row, cell in enumerate(bits):
            assert int("".join(map(str, cell)), 2) == row

    def test_rejects_unnormalized_table(self):
        """Tables must sum to one"""
        with pytest.raises(ValueError):
            JointTable(("A",), np.array([0.3, 0.3]))

    def test_rejects_negative_entries(self):
        with pytest.raises(ValueError):
            JointTable(("A",), np.array([1.5, -0.5]))

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            JointTable(("A", "B"), np.array([0.5, 0.5]))

    def test_probs_are_read_only(self):
        table = JointTable(("A",), np.array([0.25, 0.75]))
        with pytest.raises(ValueError):
            table.probs[0] = 1.0

    def test_as_dict_keys_follow_scope(self):
        table = JointTable.from_mapping(("A", "B"), {(0, 1): 0.25, (1, 0): 0.75})
        assert table.as_dict() == {"00": 0.0, "01": 0.25, "10": 0.75, "11": 0.0}


class TestMarginalAndCondition:
    """Tests for marginal and condition_table against direct summation"""

    def test_fig1_observed_marginal_matches_oracle(self, fig1):
        """Marginal onto (X, T, Y) equals summing U out cell by cell"""
        observed = marginal(joint(fig1.ground_truth), ("X", "T", "Y"))
        oracle = fig1_observed_oracle()
        for cell, p in observed.items():
            assert p == pytest.approx(oracle[cell], abs=1e-12)

    def test_marginal_respects_requested_order(self, fig1):
        table = joint(fig1.ground_truth)
        forward = marginal(table, ("X", "Y"))
        backward = marginal(table, ("Y", "X"))
        for (x, y), p in forward.items():
            assert backward.probs[2 * y + x] == pytest.approx(p)

    def test_marginal_unknown_variable(self, fig1):
        with pytest.raises(UnknownVariable):
            marginal(joint(fig1.ground_truth), ("Z",))

    def test_condition_matches_renormalization_oracle(self, fig1):
        """Conditioning on X=1 renormalizes the X=1 cells"""
        observed = marginal(joint(fig1.ground_truth), ("X", "T", "Y"))
        conditioned = condition_table(observed, Event.of(X=1))
        oracle = fig1_observed_oracle()
        mass = sum(p for (x, _, _), p in oracle.items() if x == 1)
        assert mass == pytest.approx(0.5)
        for (x, t, y), p in conditioned.items():
            expected = oracle[(x, t, y)] / mass if x == 1 else 0.0
            assert p == pytest.approx(expected, abs=1e-12)

    def test_condition_on_zero_event(self):
        table = JointTable(("A", "B"), np.array([0.5, 0.5, 0.0, 0.0]))
        with pytest.raises(ZeroSupport):
            condition_table(table, Event.of(A=1))

    def test_condition_on_sure_event_is_identity(self, fig1):
        table = joint(fig1.ground_truth)
        both = condition_table(table, Event(clauses=(("X", 1),)))
        again = condition_table(both, Event.of(X=1))
        assert again.allclose(both, atol=1e-15)

    def test_event_rejects_repeated_variable(self):
        with pytest.raises(ValueError):
            Event(clauses=(("A", 1), ("A", 0)))

    def test_total_variation_scope_mismatch(self):
        left = JointTable(("A",), np.array([0.5, 0.5]))
        right = JointTable(("B",), np.array([0.5, 0.5]))
        with pytest.raises(ScopeMismatch):
            total_variation(left, right)

    def test_total_variation_value(self):
        left = JointTable(("A",), np.array([0.5, 0.5]))
        right = JointTable(("A",), np.array([0.25, 0.75]))
        assert total_variation(left, right) == pytest.approx(0.25)


class TestDiagram:
    """Tests for CausalDiagram validation and graph queries"""

    def test_rejects_cycle(self):
        with pytest.raises(ValueError):
            CausalDiagram(
                variables=(Variable(name="A"), Variable(name="B")),
                edges=(("A", "B"), ("B", "A")),
            )

    def test_rejects_undeclared_endpoint(self):
        with pytest.raises(ValueError):
            CausalDiagram(variables=(Variable(name="A"),), edges=(("A", "B"),))

    def test_parents_in_declaration_order(self, fig1):
        assert fig1.diagram.parents("Y") == ("U", "T")

    def test_topological_order_breaks_ties_by_declaration(self, fig1):
        assert fig1.diagram.topological_order() == ("U", "X", "T", "Y")

    def test_missing_role(self):
        diagram = CausalDiagram(variables=(Variable(name="A"),))
        with pytest.raises(MissingRole):
            diagram.treatment

    def test_mechanism_needs_every_parent_row(self):
        with pytest.raises(ValueError):
            Mechanism(child="Y", parents=("T",), table={(0,): 0.5})


class TestEffects:
    """Tests for tau, its truncated-factorization oracle and interventions"""

    def test_fig1_tau(self, fig1):
        """sum_u P(u) (P(Y|u,1) - P(Y|u,0)) = 0.5 * 0.5 + 0.5 * 0.5"""
        assert tau(fig1.ground_truth) == pytest.approx(0.5, abs=1e-12)
        assert tau_truncated(fig1.ground_truth) == pytest.approx(0.5, abs=1e-12)

    def test_trial_tau(self, trial):
        assert tau(trial.ground_truth) == pytest.approx(0.3, abs=1e-12)

    def test_tau_matches_truncated_on_fig1_half_grid(self, fig1_half_class):
        """Exhaustive sweep of the step-0.5 fig1 class"""
        for index in range(fig1_half_class.size):
            model = fig1_half_class.model_at(index)
            assert abs(tau(model) - tau_truncated(model)) <= 1e-9

    def test_do_replace_cuts_incoming_edges(self, fig1):
        replaced = do_replace(fig1.ground_truth, "T", 0.5)
        assert replaced.diagram.parents("T") == ()
        assert replaced.mechanism("T").table == {(): 0.5}

    def test_do_replace_rejects_bad_probability(self, fig1):
        with pytest.raises(ValueError):
            do_replace(fig1.ground_truth, "T", 1.5)

    def test_randomized_world_crude_difference_equals_tau(self, fig1):
        """After T is set by a fair coin, the crude difference is the effect"""
        model = do_replace(fig1.ground_truth, "T", 0.5)
        world = randomize(joint(fig1.ground_truth), model, "T")
        observed = marginal(world, fig1.diagram.observed)
        assert crude_risk_difference(observed, "T", "Y") == pytest.approx(0.5, abs=1e-9)

    def test_randomize_keeps_non_descendant_law(self, fig1):
        model = do_replace(fig1.ground_truth, "T", 0.25)
        before = joint(fig1.ground_truth)
        after = randomize(before, model, "T")
        assert marginal(after, ("U", "X")).allclose(marginal(before, ("U", "X")))
        assert marginal(after, ("T",)).probs[1] == pytest.approx(0.25)


class TestAdjustment:
    """Tests for the standardized risk difference"""

    def test_fig1_adjusting_x_recovers_tau(self, fig1):
        observed = marginal(joint(fig1.ground_truth), fig1.diagram.observed)
        assert adjustment_estimate(observed, "T", "Y", ("X",)) == pytest.approx(0.5, abs=1e-12)

    def test_fig1_crude_difference_is_confounded(self, fig1):
        """P(Y|T=1) - P(Y|T=0) = 0.7875 - 0.2125"""
        observed = marginal(joint(fig1.ground_truth), fig1.diagram.observed)
        assert crude_risk_difference(observed, "T", "Y") == pytest.approx(0.575, abs=1e-12)

    def test_positivity_violation_after_restriction(self, fig1):
        """Once X=1 is all that is left, the X=0 stratum is empty"""
        observed = marginal(joint(fig1.ground_truth), fig1.diagram.observed)
        restricted = condition_table(observed, Event.of(X=1))
        with pytest.raises(PositivityViolation) as excinfo:
            adjustment_estimate(restricted, "T", "Y", ("X",))
        assert excinfo.value.stratum == {"X": 0}

    def test_rejects_treatment_in_adjustment_set(self, fig1):
        observed = marginal(joint(fig1.ground_truth), fig1.diagram.observed)
        with pytest.raises(ValueError):
            adjustment_estimate(observed, "T", "Y", ("T",))

    def test_backdoor_identity_on_fig1_quarter_grid(self, fig1):
        """Adjusting for X equals tau on every positive step-0.25 fig1 model"""
        from app.enumeration import BatchEvaluator, split_blocks

        model_class = ModelClass(diagram=fig1.diagram, grid=fig1.grid)
        evaluator = BatchEvaluator(model_class)
        checked = 0
        for block in split_blocks(np.arange(model_class.size, dtype=np.int64), 65_536):
            theta = model_class.thetas(block)
            laws = evaluator.observed_laws(evaluator.joint(theta))
            estimates, positive = evaluator.adjusted_estimates(laws, ("X",))
            taus = evaluator.tau(theta)
            assert np.all(np.abs(estimates[positive] - taus[positive]) <= 1e-9)
            checked += int(positive.sum())
        assert checked > 0


def _random_model(data, diagram: CausalDiagram) -> StructuralModel:
    probability = st.floats(min_value=0.0, max_value=1.0)
    mechanisms = []
    for name in diagram.names:
        parents = diagram.parents(name)
        table = {
            tuple(int(b) for b in row): data.draw(probability) for row in cell_bits(len(parents))
        }
        mechanisms.append(Mechanism(child=name, parents=parents, table=table))
    return StructuralModel(diagram=diagram, mechanisms=tuple(mechanisms))


class TestEffectProperties:
    """Property tests over continuous fig1 and s2 parameters"""

    @given(data=st.data())
    @settings(deadline=None, max_examples=100)
    def test_tau_equals_truncated(self, fig1, data):
        model = _random_model(data, fig1.diagram)
        assert math.isclose(tau(model), tau_truncated(model), abs_tol=1e-9)

    @given(data=st.data())
    @settings(deadline=None, max_examples=100)
    def test_tau_bounded(self, s2, data):
        model = _random_model(data, s2.diagram)
        assert -1.0 - 1e-12 <= tau(model) <= 1.0 + 1e-12

    @given(data=st.data())
    @settings(deadline=None, max_examples=50)
    def test_joint_is_normalized(self, s2, data):
        model = _random_model(data, s2.diagram)
        assert joint(model).probs.sum() == pytest.approx(1.0)


class TestVectorizedAgreement:
    """The batch evaluator agrees with the scalar path"""

    def test_joint_rows_match_scalar(self, fig1_half_class):
        from app.enumeration import BatchEvaluator

        evaluator = BatchEvaluator(fig1_half_class)
        indices = np.arange(0, fig1_half_class.size, 97, dtype=np.int64)
        tables = evaluator.joint(fig1_half_class.thetas(indices))
        for row, index in enumerate(indices):
            scalar = joint(fig1_half_class.model_at(int(index)))
            assert np.allclose(tables[row], scalar.probs, atol=1e-12)

    def test_s2_tau_matches_truncated(self, s2, half_grid):
        """Every step-0.5 s2 model: vectorized tau against the scalar oracle"""
        from app.enumeration import BatchEvaluator

        model_class = ModelClass(diagram=s2.diagram, grid=half_grid)
        evaluator = BatchEvaluator(model_class)
        indices = np.arange(model_class.size, dtype=np.int64)
        taus = evaluator.tau(model_class.thetas(indices))
        for index in range(0, model_class.size, 7):
            assert abs(taus[index] - tau_truncated(model_class.model_at(index))) <= 1e-9

    def test_grid_parameter_layout(self, fig1, half_grid):
        model_class = ModelClass(diagram=fig1.diagram, grid=half_grid)
        assert model_class.parameter_count == 9
        assert model_class.size == 3 ** 9
        model = model_class.model_at(model_class.size - 1)
        assert model.parameters() == (1.0,) * 9
        assert model_class.index_of(model) == model_class.size - 1

    def test_grid_from_step(self):
        assert ParameterGrid.from_step(0.25).levels == (0.0, 0.25, 0.5, 0.75, 1.0)
        with pytest.raises(ValueError):
            ParameterGrid.from_step(0.3)

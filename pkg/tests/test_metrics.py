"""Tests for identified sets, entropy, divergence, residual k and the audit."""

import dataclasses
import itertools
import math
from collections import Counter, defaultdict

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from app.causal import CausalDiagram, Event, Variable, joint, marginal, tau_truncated
from app.enumeration import AdmissibleSet, ModelClass, ParameterGrid
from app.metrics import (
    EmptyAdmissible,
    constraint_audit,
    delta_breadth,
    delta_cause,
    histogram_entropy,
    identifiable,
    identification,
    kl_bits,
    member_taus,
    residual_k,
    tau_histogram,
    tau_set,
)
from app.metrics.identification import tau_bins
from app.models.domain import KSettings
from app.models.operations import Pipeline, Restrict
from app.operators import initial_state, run_pipeline
from app.scenario import parse_scenario
from tests.conftest import fig1_cell

BINS = 41


def bin_of(value: float, bins: int = BINS) -> int:
    return min(max(math.floor((value + 1.0) / 2.0 * bins), 0), bins - 1)


def entropy_oracle(counts) -> float:
    total = sum(counts)
    return -sum(c / total * math.log2(c / total) for c in counts if c > 0)


def scalar_entropy(state, bins: int = BINS) -> float:
    """Entropy of the tau histogram, one scalar tau per admissible member."""
    model_class = state.world.model_class
    counts = Counter(
        bin_of(tau_truncated(model_class.model_at(int(index))), bins)
        for index in state.admissible.members
    )
    return entropy_oracle(counts.values())


def residual_oracle(model_class: ModelClass, quantum: float, bins: int, epsilon: float) -> float:
    """k by direct grouping and pooling, one model at a time."""
    observed = model_class.diagram.observed
    groups: dict[tuple[int, ...], Counter] = defaultdict(Counter)
    interior: set[tuple[int, ...]] = set()
    for index in range(model_class.size):
        model = model_class.model_at(index)
        law = marginal(joint(model), observed).probs
        key = tuple(int(round(p / quantum)) for p in law)
        groups[key][bin_of(tau_truncated(model), bins)] += 1
        if all(0.0 < p < 1.0 for p in model.parameters()):
            interior.add(key)
    keys = list(groups)
    points = np.array(keys, dtype=np.float64) * quantum
    best = math.inf
    for row, key in enumerate(keys):
        if interior and key not in interior:
            continue
        near = np.abs(points - points[row]).sum(axis=1) <= 2.0 * epsilon
        pooled = Counter()
        for other in np.flatnonzero(near):
            pooled.update(groups[keys[other]])
        best = min(best, entropy_oracle(pooled.values()))
    return max(best, 0.0)


K_SETTINGS = KSettings(grid=[0.0, 0.25, 0.5, 0.75, 1.0], quantum=1e-6, bins=BINS, epsilon=0.02)


class TestTauSet:
    """Tests for tau summaries"""

    def test_bins_cover_closed_interval(self):
        assert tau_bins(np.array([-1.0, 0.0, 1.0]), BINS).tolist() == [0, 20, 40]

    def test_histogram_counts_every_member(self, fig1_state):
        summary = tau_set(fig1_state)
        assert sum(summary.histogram) == summary.member_count == fig1_state.admissible.count
        assert summary.width == pytest.approx(summary.max - summary.min)

    def test_member_taus_match_scalar(self, fig1_state):
        taus = member_taus(fig1_state)
        model_class = fig1_state.world.model_class
        for position in range(0, taus.shape[0], max(1, taus.shape[0] // 50)):
            index = int(fig1_state.admissible.members[position])
            assert taus[position] == pytest.approx(
                tau_truncated(model_class.model_at(index)), abs=1e-9
            )

    def test_empty_admissible(self, fig1_state):
        empty = AdmissibleSet(fig1_state.world.model_class, np.array([], dtype=np.int64))
        state = dataclasses.replace(fig1_state, admissible=empty)
        with pytest.raises(EmptyAdmissible):
            tau_set(state)


class TestIdentification:
    """Tests for identification verdicts on fig1"""

    def test_adjust_is_identifiable(self, fig1, fig1_state):
        state = run_pipeline(fig1_state, fig1.pipeline("C"))[-1]
        verdict = identification(state)
        assert verdict.identifiable
        assert verdict.route == "adjustment"
        assert verdict.adjusted_estimate == pytest.approx(0.5, abs=1e-12)

    def test_adjust_then_restrict_is_identifiable(self, fig1, fig1_state):
        state = run_pipeline(fig1_state, fig1.pipeline("CR"))[-1]
        verdict = identification(state, eps_id=0.05)
        assert verdict.identifiable
        assert verdict.route == "adjustment"
        assert verdict.adjustment_set == ["X"]
        assert verdict.positivity_violation is None

    def test_restrict_then_adjust_is_not_identifiable(self, fig1, fig1_state):
        state = run_pipeline(fig1_state, fig1.pipeline("RC"))[-1]
        verdict = identification(state, eps_id=0.05)
        assert not verdict.identifiable
        assert verdict.route == "none"
        assert verdict.width > 0.05
        assert verdict.positivity_violation is not None
        assert verdict.adjusted_estimate is None

    def test_singleton_admissible_is_identifiable(self, independent_state):
        assert independent_state.admissible.count == 1
        verdict = identification(independent_state)
        assert verdict.identifiable
        assert verdict.width == 0.0
        assert identifiable(independent_state)


class TestEntropy:
    """Tests for delta_cause"""

    def test_origin_has_no_drop(self, fig1_state):
        report = delta_cause(fig1_state)
        assert report.delta_cause == 0.0
        assert report.h_state == report.h_prior

    def test_cr_matches_oracle(self, fig1, fig1_state):
        state = run_pipeline(fig1_state, fig1.pipeline("CR"))[-1]
        report = delta_cause(state, BINS)
        assert report.h_prior == pytest.approx(scalar_entropy(fig1_state), abs=1e-9)
        assert report.h_state == pytest.approx(scalar_entropy(state), abs=1e-9)
        assert report.delta_cause == pytest.approx(report.h_prior - report.h_state)

    def test_singleton_has_zero_entropy(self, independent_state):
        assert delta_cause(independent_state).h_state == 0.0

    def test_histogram_entropy(self):
        assert histogram_entropy(np.array([3, 0, 3])) == pytest.approx(1.0)
        assert histogram_entropy(np.array([0, 5, 0])) == 0.0

    @given(
        values=st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=1, max_size=200),
        bins=st.integers(min_value=1, max_value=64),
    )
    @settings(deadline=None)
    def test_entropy_bounds(self, values, bins):
        h = histogram_entropy(tau_histogram(np.array(values), bins))
        assert 0.0 <= h <= math.log2(bins) + 1e-12


class TestBreadth:
    """Tests for delta_breadth and the KL helper"""

    def test_origin_is_zero(self, fig1_state):
        report = delta_breadth(fig1_state)
        assert report.kl_bits == 0.0
        assert report.dominated

    def test_point_mass_on_half(self):
        kl, dominated = kl_bits(np.array([1.0, 0.0]), np.array([0.5, 0.5]))
        assert dominated
        assert kl == pytest.approx(1.0)

    def test_not_dominated(self):
        kl, dominated = kl_bits(np.array([0.5, 0.5]), np.array([1.0, 0.0]))
        assert kl is None
        assert not dominated

    def test_fig1_restriction_matches_oracle(self, fig1, fig1_state):
        """KL(P(. | X=1) || P) = -log2 P(X=1) = 1 bit"""
        state = run_pipeline(fig1_state, fig1.pipeline("RC"))[-1]
        full = {
            (x, t, y): sum(fig1_cell(u, x, t, y) for u in (0, 1))
            for x, t, y in itertools.product((0, 1), repeat=3)
        }
        mass = sum(p for (x, _, _), p in full.items() if x == 1)
        oracle = sum(
            (p / mass) * math.log2((p / mass) / p) for (x, _, _), p in full.items() if x == 1
        )
        report = delta_breadth(state)
        assert report.kl_bits == pytest.approx(oracle, abs=1e-12)
        assert report.kl_bits == pytest.approx(1.0, abs=1e-12)

    def test_trial_pipeline_moves_away_from_full_table(self, trial, trial_state):
        state = run_pipeline(trial_state, trial.pipeline("RIR"))[-1]
        report = delta_breadth(state)
        assert report.dominated
        assert report.kl_bits > 0.0

    @given(
        p=st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=4, max_size=4),
        q=st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=4, max_size=4),
    )
    @settings(deadline=None)
    def test_kl_non_negative(self, p, q):
        p = np.array(p) / sum(p)
        q = np.array(q) / sum(q)
        kl, dominated = kl_bits(p, q)
        assert dominated
        assert kl >= 0.0


class TestResidualK:
    """Tests for the residual constant k"""

    def test_parentless_treatment_gives_zero(self):
        diagram = CausalDiagram(
            variables=(
                Variable(name="T", role="treatment"),
                Variable(name="Y", role="outcome"),
            ),
            edges=(("T", "Y"),),
        )
        model_class = ModelClass(diagram=diagram, grid=ParameterGrid.from_step(0.25))
        assert residual_k(model_class) == 0.0

    def test_singleton_class_gives_zero(self, fig1):
        model_class = ModelClass(diagram=fig1.diagram, grid=ParameterGrid(levels=(0.5,)))
        assert model_class.size == 1
        assert residual_k(model_class) == 0.0

    def test_fig1_half_grid_matches_oracle(self, fig1_half_class):
        expected = residual_oracle(fig1_half_class, 1e-6, BINS, 0.02)
        assert residual_k(fig1_half_class, 1e-6, BINS, 0.02) == pytest.approx(expected, abs=1e-9)

    def test_block_partition_does_not_change_k(self, fig1_half_class):
        single = residual_k(fig1_half_class)
        split = residual_k(fig1_half_class, block_size=1000, parallel=4)
        assert single == split

    def test_s2_k_is_positive(self, s2, half_grid):
        # The uniform law is reached by the all-0.5 model (tau 0) and by
        # models where T copies U and Y's off-diagonal rows differ (tau 0.5).
        model_class = ModelClass(diagram=s2.diagram, grid=half_grid)
        k = residual_k(model_class, 1e-6, BINS, 0.02)
        assert 0.0 < k <= math.log2(BINS)

    @pytest.mark.slow
    def test_s2_k_matches_oracle(self, s2, half_grid):
        model_class = ModelClass(diagram=s2.diagram, grid=half_grid)
        expected = residual_oracle(model_class, 1e-6, BINS, 0.02)
        assert expected > 0.0
        assert residual_k(model_class, 1e-6, BINS, 0.02) == pytest.approx(expected, abs=1e-9)

    def test_k_ignores_groups_without_interior_models(self, fig1):
        # On {0, 1} no model is interior, so every group counts.
        model_class = ModelClass(diagram=fig1.diagram, grid=ParameterGrid(levels=(0.0, 1.0)))
        assert residual_k(model_class, 1e-6, BINS, 0.02) == pytest.approx(
            residual_oracle(model_class, 1e-6, BINS, 0.02), abs=1e-9
        )


class TestConstraintAudit:
    """Tests for the product audit"""

    def test_trivial_pipeline(self, fig1_state):
        report = constraint_audit([fig1_state], 0.0, K_SETTINGS)
        assert report.product == 0.0
        assert report.satisfied is True
        assert constraint_audit([fig1_state], 0.5, K_SETTINGS).satisfied is False

    @pytest.mark.parametrize(
        "name, events",
        [
            ("fig1", ({"X": 1}, {"T": 1})),
            ("fig1", ({"T": 1}, {"X": 1}, {"Y": 0})),
            ("s2", ({"X": 1}, {"T": 1})),
            ("s2", ({"T": 0}, {"X": 0})),
            ("trial", ({"V": 1}, {"A": 1})),
            ("trial", ({"A": 1}, {"V": 1}, {"Y": 1})),
        ],
    )
    def test_restrictions_never_lower_divergence(self, name, events, request, half_grid):
        scenario = request.getfixturevalue(name)
        initial = initial_state(scenario.ground_truth, half_grid, epsilon=0.02)
        steps = tuple(Restrict(event=Event.of(**e)) for e in events)
        states = run_pipeline(initial, Pipeline(label="R", steps=steps))
        report = constraint_audit(states, 0.0, K_SETTINGS, label="R")
        assert not any(s.kl_decreased for s in report.steps)
        kls = [s.kl_bits for s in report.steps]
        assert all(a <= b + 1e-12 for a, b in zip(kls, kls[1:]))

    def test_fig1_cr_audit(self, fig1, fig1_state):
        states = run_pipeline(fig1_state, fig1.pipeline("CR"))
        report = constraint_audit(states, 0.1, K_SETTINGS, label="CR")
        assert report.pipeline == "CR"
        assert [s.operation for s in report.steps] == ["initial", "adjust X", "restrict X=1"]
        assert report.delta_breadth == pytest.approx(1.0, abs=1e-12)
        assert report.product == pytest.approx(report.delta_cause * report.delta_breadth)
        assert report.satisfied == (report.product >= 0.1 - 1e-9)
        flagged = sum(1 for s in report.steps if s.h_increased or s.kl_decreased)
        assert report.monotonicity_violations == flagged

    def test_unbounded_breadth(self):
        scenario = parse_scenario(
            "scenario sure\n"
            "var T obs treatment\n"
            "var Y obs outcome\n"
            "edge T Y\n"
            "grid 0 0.5 1\n"
            "truth T = 1\n"
            "truth Y 0 = 0.5\n"
            "truth Y 1 = 0.5\n"
            "pipeline I: intervene T p=0.5\n"
        )
        from app.operators import initial_state

        initial = initial_state(scenario.ground_truth, scenario.grid)
        states = run_pipeline(initial, scenario.pipeline("I"))
        report = constraint_audit(states, 0.0, K_SETTINGS)
        assert report.delta_breadth is None
        assert report.product is None
        assert report.satisfied is None
        assert delta_breadth(states[-1]).unbounded

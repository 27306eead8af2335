"""Scenario runner - evaluates a scenario's pipelines end to end."""

import logging
import time
from contextlib import contextmanager
from typing import Iterator, Optional, Sequence

from app.causal.tables import PositivityViolation, crude_risk_difference
from app.config import EngineSettings
from app.enumeration.grid import ParameterGrid
from app.errors import ScenarioError
from app.metrics.audit import constraint_audit
from app.metrics.identification import identification, tau_set
from app.metrics.information import delta_breadth, delta_cause
from app.metrics.residual import residual_k
from app.models.domain import (
    CommutationReport,
    ConstraintReport,
    KSettings,
    PipelineReport,
    RunReport,
    SettingsEcho,
)
from app.models.operations import Pipeline
from app.operators.commutation import compare_orders
from app.operators.pipeline import run_pipeline
from app.operators.state import EvidentialState, initial_state
from app.scenario.model import Scenario, ScenarioSettings
from app.scenario.render import render_scenario

logger = logging.getLogger(__name__)


class UnknownLabel(ScenarioError):
    """Raised when a command names a pipeline the scenario does not define."""

    def __init__(self, label: str, available: Sequence[str]):
        self.label = label
        super().__init__(f"Unknown pipeline {label!r}; scenario defines {list(available)}")


class ScenarioRunner:
    """Runs a scenario through the engine.

    Handles the complete evaluation cycle:
    1. Resolving effective settings (engine < scenario < command line)
    2. Building the initial evidential state over the grid model class
    3. Computing the residual constant k of the class
    4. Running every pipeline and measuring its final state
    5. Comparing the requested pipeline pairs
    6. Assembling the run report
    """

    def __init__(
        self,
        settings: EngineSettings,
        overrides: Optional[dict] = None,
        grid_step: Optional[float] = None,
        timings: bool = False,
    ):
        """Initialize ScenarioRunner.

        Args:
            settings: Engine defaults (environment and .env already applied)
            overrides: Settings given on the command line; they win over the scenario
            grid_step: Replace the scenario grid by levels 0, step, ..., 1
            timings: Record wall time per phase in the report
        """
        self._settings = settings
        self._overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        self._grid_step = grid_step
        self._timings_enabled = timings
        self._timings: dict[str, float] = {}

    @contextmanager
    def _phase(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        yield
        elapsed = time.perf_counter() - start
        self._timings[name] = self._timings.get(name, 0.0) + elapsed
        logger.info(f"Phase {name} took {elapsed:.3f}s")

    def effective_settings(self, scenario: Scenario) -> EngineSettings:
        update = {**scenario.settings.as_overrides(), **self._overrides}
        return self._settings.model_copy(update=update)

    def grid_for(self, scenario: Scenario) -> ParameterGrid:
        if self._grid_step is not None:
            return ParameterGrid.from_step(self._grid_step)
        return scenario.grid

    def _pipeline(self, scenario: Scenario, label: str) -> Pipeline:
        try:
            return scenario.pipeline(label)
        except KeyError:
            raise UnknownLabel(label, [p.label for p in scenario.pipelines]) from None

    def prepare(self, scenario: Scenario) -> tuple[EngineSettings, EvidentialState]:
        """Steps 1-2: effective settings and the initial state."""
        settings = self.effective_settings(scenario)
        grid = self.grid_for(scenario)
        logger.info(
            f"Scenario {scenario.name}: grid={list(grid.levels)}, epsilon={settings.epsilon}, "
            f"eps_id={settings.eps_id}, bins={settings.bins}"
        )
        with self._phase("initial_state"):
            state = initial_state(
                scenario.ground_truth,
                grid,
                epsilon=settings.epsilon,
                cap=settings.cap,
                block_size=settings.block_size,
                parallel=settings.parallel,
            )
        return settings, state

    def residual(self, settings: EngineSettings, state: EvidentialState) -> tuple[float, KSettings]:
        """Step 3: k for the class, with the settings it depends on."""
        model_class = state.world.model_class
        with self._phase("residual_k"):
            k = residual_k(
                model_class,
                settings.quantum,
                settings.bins,
                settings.epsilon,
                cap=settings.cap,
                block_size=settings.block_size,
                parallel=settings.parallel,
            )
        k_settings = KSettings(
            grid=list(model_class.grid.levels),
            quantum=settings.quantum,
            bins=settings.bins,
            epsilon=settings.epsilon,
        )
        return k, k_settings

    def measure(
        self,
        settings: EngineSettings,
        initial: EvidentialState,
        pipeline: Pipeline,
        k: float,
        k_settings: KSettings,
    ) -> PipelineReport:
        """Step 4 for one pipeline."""
        with self._phase(f"pipeline:{pipeline.label}"):
            states = run_pipeline(initial, pipeline)
            final = states[-1]
            diagram = final.world.diagram
            try:
                world_effect = crude_risk_difference(final.observed, diagram.treatment, diagram.outcome)
            except PositivityViolation as e:
                logger.info(f"No in-world effect for {pipeline.label}: {e}")
                world_effect = None
            return PipelineReport(
                label=pipeline.label,
                steps=[step.describe() for step in pipeline.steps],
                member_count=final.admissible.count,
                final_observed=final.observed.as_dict(),
                world_effect=world_effect,
                tau_set=tau_set(final, settings.bins),
                entropy=delta_cause(final, settings.bins),
                breadth=delta_breadth(final),
                identification=identification(final, settings.eps_id, settings.bins),
                constraint=constraint_audit(
                    states, k, k_settings, label=pipeline.label, bins=settings.bins
                ),
            )

    def run(self, scenario: Scenario, extra_comparisons: Sequence[tuple[str, str]] = ()) -> RunReport:
        """Run every pipeline of the scenario and the requested comparisons.

        Args:
            scenario: The parsed scenario
            extra_comparisons: Pipeline pairs to compare besides the scenario's own

        Returns:
            RunReport with one entry per pipeline and per comparison
        """
        self._timings = {}
        settings, initial = self.prepare(scenario)
        k, k_settings = self.residual(settings, initial)

        reports = [
            self.measure(settings, initial, pipeline, k, k_settings)
            for pipeline in scenario.pipelines
        ]

        pairs = list(scenario.comparisons)
        for pair in extra_comparisons:
            if pair not in pairs:
                pairs.append(pair)
        comparisons = [self._compare(scenario, settings, initial, a, b) for a, b in pairs]

        grid = initial.world.model_class.grid
        return RunReport(
            scenario=scenario.name,
            settings=self._echo(settings, grid),
            scenario_text=render_scenario(self._resolved(scenario, settings, grid)),
            model_count=initial.world.model_class.size,
            k=k,
            pipelines=reports,
            comparisons=comparisons,
            timings=dict(self._timings) if self._timings_enabled else None,
        )

    def _compare(
        self,
        scenario: Scenario,
        settings: EngineSettings,
        initial: EvidentialState,
        a: str,
        b: str,
    ) -> CommutationReport:
        with self._phase(f"compare:{a}:{b}"):
            return compare_orders(
                initial, self._pipeline(scenario, a), self._pipeline(scenario, b), bins=settings.bins
            )

    def compare(self, scenario: Scenario, a: str, b: str) -> CommutationReport:
        """Compare two of the scenario's pipelines."""
        self._pipeline(scenario, a)
        self._pipeline(scenario, b)
        settings, initial = self.prepare(scenario)
        return self._compare(scenario, settings, initial, a, b)

    def audit(self, scenario: Scenario, label: str) -> ConstraintReport:
        """Constraint audit of one pipeline."""
        pipeline = self._pipeline(scenario, label)
        settings, initial = self.prepare(scenario)
        k, k_settings = self.residual(settings, initial)
        with self._phase(f"audit:{label}"):
            states = run_pipeline(initial, pipeline)
            return constraint_audit(states, k, k_settings, label=label, bins=settings.bins)

    @staticmethod
    def _echo(settings: EngineSettings, grid: ParameterGrid) -> SettingsEcho:
        return SettingsEcho(
            grid=list(grid.levels),
            epsilon=settings.epsilon,
            eps_id=settings.eps_id,
            bins=settings.bins,
            quantum=settings.quantum,
            cap=settings.cap,
        )

    @staticmethod
    def _resolved(scenario: Scenario, settings: EngineSettings, grid: ParameterGrid) -> Scenario:
        pinned = ScenarioSettings(
            epsilon=settings.epsilon,
            eps_id=settings.eps_id,
            bins=settings.bins,
            quantum=settings.quantum,
            cap=settings.cap,
        )
        return scenario.model_copy(update={"grid": grid, "settings": pinned})

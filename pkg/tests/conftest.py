"""Shared fixtures: builtin scenarios, small grids and prepared states."""

import pytest

from app.causal.model import CausalDiagram, Mechanism, StructuralModel, Variable
from app.enumeration.grid import ModelClass, ParameterGrid
from app.operators.state import initial_state
from app.scenario.builtins import load_builtin

# Canonical fig1 ground truth, written out independently of the builtin text.
FIG1_P_U = 0.5
FIG1_P_X = {0: 0.25, 1: 0.75}  # P(X=1 | U=u)
FIG1_P_T = {0: 0.25, 1: 0.75}  # P(T=1 | X=x)
FIG1_P_Y = {(0, 0): 0.1, (0, 1): 0.6, (1, 0): 0.4, (1, 1): 0.9}  # P(Y=1 | U=u, T=t)


def bern(p: float, value: int) -> float:
    return p if value == 1 else 1.0 - p


def fig1_cell(u: int, x: int, t: int, y: int) -> float:
    """P(U=u, X=x, T=t, Y=y) of the canonical fig1 truth by direct multiplication."""
    return (
        bern(FIG1_P_U, u)
        * bern(FIG1_P_X[u], x)
        * bern(FIG1_P_T[x], t)
        * bern(FIG1_P_Y[(u, t)], y)
    )


@pytest.fixture(scope="session")
def fig1():
    """Builtin fig1 scenario."""
    return load_builtin("fig1")


@pytest.fixture(scope="session")
def s2():
    """Builtin s2 scenario."""
    return load_builtin("s2")


@pytest.fixture(scope="session")
def trial():
    """Builtin trial scenario."""
    return load_builtin("trial")


@pytest.fixture(scope="session")
def independent():
    """Builtin independent-restrictions scenario."""
    return load_builtin("independent")


@pytest.fixture(scope="session")
def half_grid():
    """Levels 0, 0.5, 1."""
    return ParameterGrid.from_step(0.5)


@pytest.fixture(scope="session")
def fig1_half_class(fig1, half_grid):
    """fig1 diagram on the step-0.5 grid (3**9 models)."""
    return ModelClass(diagram=fig1.diagram, grid=half_grid)


@pytest.fixture(scope="session")
def fig1_state(fig1):
    """Initial state of fig1 on its own step-0.25 grid, epsilon 0.02."""
    return initial_state(fig1.ground_truth, fig1.grid, epsilon=0.02)


@pytest.fixture(scope="session")
def independent_state(independent):
    """Initial state of the independent scenario."""
    return initial_state(independent.ground_truth, independent.grid, epsilon=0.02)


@pytest.fixture(scope="session")
def trial_state(trial):
    """Initial state of the trial scenario on its step-0.5 grid."""
    return initial_state(trial.ground_truth, trial.grid, epsilon=0.02)


@pytest.fixture
def coin_model():
    """Two observed variables: T parentless, Y depends on T."""
    diagram = CausalDiagram(
        variables=(
            Variable(name="T", visibility="observed", role="treatment"),
            Variable(name="Y", visibility="observed", role="outcome"),
        ),
        edges=(("T", "Y"),),
    )
    return StructuralModel(
        diagram=diagram,
        mechanisms=(
            Mechanism.constant("T", 0.5),
            Mechanism(child="Y", parents=("T",), table={(0,): 0.2, (1,): 0.7}),
        ),
    )

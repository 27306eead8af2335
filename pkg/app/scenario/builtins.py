"""Scenarios shipped with the engine."""

from app.scenario.model import Scenario
from app.scenario.parser import ScenarioValidationError, parse_scenario

# Minimal observational diagram: a hidden U confounds X and Y, X drives T.
# The ground truth is a fixed choice; it lies off the step-0.25 grid.
FIG1 = """\
scenario fig1
var U hidden
var X obs
var T obs treatment
var Y obs outcome
edge U X
edge U Y
edge X T
edge T Y
grid 0 0.25 0.5 0.75 1
truth U = 0.5
truth X 0 = 0.25
truth X 1 = 0.75
truth T 0 = 0.25
truth T 1 = 0.75
# Y parents in declaration order: U, T
truth Y 00 = 0.1
truth Y 01 = 0.6
truth Y 10 = 0.4
truth Y 11 = 0.9
settings epsilon=0.02 eps_id=0.05 bins=41 quantum=1e-06 cap=100000000
pipeline CR: adjust X ; restrict X=1
pipeline RC: restrict X=1 ; adjust X
pipeline C: adjust X
compare CR RC
"""

# U also confounds T directly, so X no longer blocks every backdoor path.
S2 = """\
scenario s2
var U hidden
var X obs
var T obs treatment
var Y obs outcome
edge U X
edge U T
edge U Y
edge X T
edge T Y
grid 0 0.5 1
truth U = 0.5
truth X 0 = 0.25
truth X 1 = 0.75
# T parents: U, X
truth T 00 = 0.25
truth T 01 = 0.5
truth T 10 = 0.5
truth T 11 = 0.75
# Y parents: U, T
truth Y 00 = 0.1
truth Y 01 = 0.6
truth Y 10 = 0.4
truth Y 11 = 0.9
pipeline CR: adjust X ; restrict X=1
pipeline RC: restrict X=1 ; adjust X
compare CR RC
"""

# Eligibility V, randomized treatment T, adherence A depending on V and T.
TRIAL = """\
scenario trial
var V obs covariate
var T obs treatment
var A obs
var Y obs outcome
edge V T
edge V A
edge T A
edge V Y
edge T Y
grid 0 0.5 1
truth V = 0.5
truth T 0 = 0.25
truth T 1 = 0.75
# A parents: V, T
truth A 00 = 0.75
truth A 01 = 0.5
truth A 10 = 0.9
truth A 11 = 0.6
# Y parents: V, T
truth Y 00 = 0.2
truth Y 01 = 0.6
truth Y 10 = 0.3
truth Y 11 = 0.5
pipeline RIR: restrict V=1 ; intervene T p=0.5 ; restrict A=1
pipeline RRI: restrict V=1 ; restrict A=1 ; intervene T p=0.5
pipeline I: intervene T p=0.5
compare RIR RRI
"""

# Two unconnected variables: restrictions on them commute.
INDEPENDENT = """\
scenario independent
var T obs treatment
var Y obs outcome
grid 0 0.25 0.5 0.75 1
truth T = 0.5
truth Y = 0.75
pipeline AB: restrict T=1 ; restrict Y=1
pipeline BA: restrict Y=1 ; restrict T=1
compare AB BA
"""

BUILTIN_SCENARIOS = {
    "fig1": FIG1,
    "s2": S2,
    "trial": TRIAL,
    "independent": INDEPENDENT,
}


def builtin_text(name: str) -> str:
    try:
        return BUILTIN_SCENARIOS[name]
    except KeyError:
        raise ScenarioValidationError(
            f"unknown builtin {name!r}; choose from {sorted(BUILTIN_SCENARIOS)}"
        ) from None


def load_builtin(name: str) -> Scenario:
    return parse_scenario(builtin_text(name))
